#include <doctest.h>

#include "support.hpp"

using namespace testing;

namespace {

EqualitySet eqs(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<EqualityConstraint> cs;
  for (auto [i, j] : pairs) cs.push_back({i, j, {}});
  return EqualitySet(n, cs);
}

double oracle(const ChainModel& chain, const EqualitySet& s) {
  return oracle_partition(chain, [&](const Word& w) { return s.satisfied_by(w); });
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::map<Word, std::size_t> draw(const ChainModel& chain, const EqualitySet& s, std::size_t count,
                                 std::uint64_t seed) {
  Rng rng(seed);
  std::map<Word, std::size_t> counts;
  for (std::size_t k = 0; k < count; ++k) {
    const Word w = sample_equality_constrained(chain, s, rng);
    REQUIRE(s.satisfied_by(w));
    ++counts[w];
  }
  return counts;
}

}  // namespace

TEST_CASE("constraint set validation") {
  CHECK_THROWS_AS(eqs(3, {{3, 1}}), Error);
  CHECK_THROWS_AS(eqs(3, {{1, 4}}), Error);
  CHECK_THROWS_AS(eqs(3, {{1, 1}}), Error);
  CHECK_THROWS_AS(eqs(4, {{1, 3}, {1, 3}}), Error);
  CHECK_THROWS_AS(EqualitySet(3, {{1, 3, {0, 0}}}), Error);
  EqualitySet s(3, {{1, 3, {1, 0}}});
  CHECK_NOTHROW(s.validate(2));
  CHECK_THROWS_AS(s.validate(3), Error);
}

TEST_CASE("classification examples") {
  CHECK(classify(eqs(3, {{1, 3}})) == TopologyClass::kNonCrossing);
  CHECK(classify(eqs(4, {{1, 3}, {2, 4}})) == TopologyClass::kRepeatedSection);
  CHECK(classify(eqs(4, {{1, 4}, {2, 3}})) == TopologyClass::kPalindromic);
  CHECK(classify(eqs(6, {{1, 2}, {3, 5}, {4, 6}})) == TopologyClass::kGeneral);
  CHECK(classify(eqs(5, {{1, 3}, {2, 5}, {4, 5}})) == TopologyClass::kGeneral);
  CHECK(classify(eqs(4, {})) == TopologyClass::kNonCrossing);
  CHECK(to_string(TopologyClass::kRepeatedSection) == "RepeatedSection");
}

TEST_CASE("order-preserving pairs that interleave are not repeated sections") {
  // j-order follows i-order, but the second i comes after the first j.
  CHECK_FALSE(is_repeated_section(eqs(6, {{1, 3}, {2, 5}, {4, 6}})));
  CHECK(is_repeated_section(eqs(6, {{1, 4}, {2, 5}, {3, 6}})));
}

TEST_CASE("non-crossing examples") {
  const auto mu = m_u();
  const auto md = m_d();
  CHECK(partition_noncrossing(mu, eqs(3, {{1, 3}})) == doctest::Approx(0.5));
  CHECK(partition_noncrossing(md, eqs(3, {{1, 3}})) == doctest::Approx(1.0));
  CHECK(partition_noncrossing(mu, EqualitySet(3, {{1, 3, {1, 0}}})) == doctest::Approx(0.5));
}

TEST_CASE("repeated-section examples") {
  const auto mu = m_u();
  const auto md = m_d();
  CHECK(partition_repeated(mu, eqs(4, {{1, 3}, {2, 4}})) == doctest::Approx(0.25));
  CHECK(partition_repeated(md, eqs(4, {{1, 3}, {2, 4}})) == doctest::Approx(1.0));
  CHECK(partition_repeated(mu, eqs(3, {{1, 3}})) == doctest::Approx(0.5));
}

TEST_CASE("palindromic examples") {
  const auto mu = m_u();
  const auto md = m_d();
  CHECK(partition_palindromic(mu, eqs(4, {{1, 4}, {2, 3}})) == doctest::Approx(0.25));
  CHECK(partition_palindromic(md, eqs(4, {{1, 4}, {2, 3}})) == 0.0);
  CHECK(partition_palindromic(mu, eqs(5, {{1, 5}, {2, 4}})) == doctest::Approx(0.25));
}

TEST_CASE("wrong topology is a precondition error") {
  const auto mu = m_u();
  CHECK(code_of([&] { partition_noncrossing(mu, eqs(4, {{1, 3}, {2, 4}})); }) == ErrorCode::kPrecondition);
  CHECK(code_of([&] { partition_repeated(mu, eqs(4, {{1, 4}, {2, 3}})); }) == ErrorCode::kPrecondition);
  CHECK(code_of([&] { partition_palindromic(mu, eqs(4, {{1, 3}, {2, 4}})); }) == ErrorCode::kPrecondition);
  const auto general = eqs(6, {{1, 2}, {3, 5}, {4, 6}});
  CHECK(code_of([&] { partition_equality(mu.unroll(6), general); }) == ErrorCode::kUnsupportedTopology);
  Rng rng(1);
  CHECK(code_of([&] { sample_equality_constrained(mu, general, rng); }) == ErrorCode::kUnsupportedTopology);
  CHECK(code_of([&] { sample_equality_constrained(m_d(), eqs(4, {{1, 4}, {2, 3}}), rng); }) ==
        ErrorCode::kNullEvent);
}

TEST_CASE("random instances agree with the oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t a = pick(2, 3, rng);
    const std::size_t n = pick(2, 8, rng);
    const auto model = random_model(a, rng, trial % 2 == 0 ? 0.0 : 0.3);
    const auto chain = model.unroll(n);
    const auto nc = random_noncrossing(n, a, rng);
    const auto rs = random_repeated(n, a, rng);
    const auto pal = random_palindromic(n, a, rng);
    CHECK(close_rel(partition_noncrossing(model, nc), oracle(chain, nc), 1e-9));
    CHECK(close_rel(partition_repeated(model, rs), oracle(chain, rs), 1e-9));
    CHECK(close_rel(partition_palindromic(model, pal), oracle(chain, pal), 1e-9));
  }
}

TEST_CASE("inhomogeneous chains agree with the oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = pick(2, 7, rng);
    const auto chain = random_chain(3, n, rng);
    for (const auto& s : {random_noncrossing(n, 3, rng), random_repeated(n, 3, rng), random_palindromic(n, 3, rng)}) {
      CHECK(close_rel(partition_equality(chain, s), oracle(chain, s), 1e-9));
    }
  }
}

TEST_CASE("overlapping classes agree") {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t a = pick(2, 3, rng);
    const std::size_t n = pick(2, 9, rng);
    const auto model = random_model(a, rng, 0.2);
    const std::size_t i = pick(1, n - 1, rng);
    const EqualitySet single(n, {random_constraint(i, pick(i + 1, n, rng), a, rng)});
    const double nc = partition_noncrossing(model, single);
    CHECK(std::abs(partition_repeated(model, single) - nc) <= 1e-12);
    CHECK(std::abs(partition_palindromic(model, single) - nc) <= 1e-12);
    const auto disjoint = random_noncrossing(n, a, rng);
    CHECK(std::abs(partition_repeated(model, disjoint) - partition_noncrossing(model, disjoint)) <= 1e-12);
  }
}

TEST_CASE("sampler examples") {
  const auto md = m_d();
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    CHECK(md.alphabet().to_string(sample_equality_constrained(md, eqs(3, {{1, 3}}), rng)) == "aba");
  }
  const auto mu = m_u();
  for (const auto& s : {eqs(3, {{1, 3}}), eqs(4, {{1, 4}, {2, 3}}), eqs(4, {{1, 3}, {2, 4}})}) {
    const auto chain = mu.unroll(s.n());
    const auto exact = oracle_conditional(chain, [&](const Word& w) { return s.satisfied_by(w); });
    CHECK(exact.size() == 4);
    CHECK(tv_distance(draw(chain, s, 100000, 99), 100000, exact) <= 0.02);
  }
}

TEST_CASE("sampler matches the oracle on random sparse instances") {
  Rng rng(4);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = pick(3, 5, rng);
    const auto chain = random_chain(3, n, rng);
    const EqualitySet s = trial % 3 == 0   ? random_noncrossing(n, 3, rng)
                          : trial % 3 == 1 ? random_repeated(n, 3, rng)
                                           : random_palindromic(n, 3, rng);
    const auto exact = oracle_conditional(chain, [&](const Word& w) { return s.satisfied_by(w); });
    if (exact.empty()) continue;
    CHECK(tv_distance(draw(chain, s, 60000, 100 + trial), 60000, exact) <= 0.04);
  }
}
