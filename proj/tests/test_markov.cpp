#include <doctest.h>

#include "support.hpp"

using namespace testing;

namespace {

bool always(const Word&) { return true; }

}  // namespace

TEST_CASE("sequence probability on the fixtures") {
  const auto mu = m_u();
  const auto md = m_d();
  CHECK(sequence_probability(mu, mu.alphabet().word_from_chars("ab")) == doctest::Approx(0.25));
  CHECK(sequence_probability(md, md.alphabet().word_from_chars("aba")) == 1.0);
  CHECK(sequence_probability(md, md.alphabet().word_from_chars("aab")) == 0.0);
}

TEST_CASE("sequence probability rejects bad words") {
  const auto mu = m_u();
  CHECK_THROWS_AS(sequence_probability(mu, Word{0, 2}), Error);
  CHECK_THROWS_AS(sequence_probability(mu, Word{}), Error);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(MarkovModel(Alphabet({"a", "b"}), {0.6, 0.6}, Matrix(2, 0.5)), Error);
  CHECK_THROWS_AS(MarkovModel(Alphabet({"a", "b"}), {0.5, 0.5}, matrix({{0.5, 0.6}, {0.5, 0.5}})), Error);
  CHECK_THROWS_AS(MarkovModel(Alphabet({"a", "b"}), {1.5, -0.5}, Matrix(2, 0.5)), Error);
  CHECK_THROWS_AS(Alphabet({"a", "a"}), Error);
  CHECK_THROWS_AS(Alphabet(std::vector<std::string>{}), Error);
}

TEST_CASE("oracle partition examples") {
  const auto mu = m_u();
  const auto md = m_d();
  CHECK(oracle_partition(mu, 3, always) == doctest::Approx(1.0));
  CHECK(oracle_partition(mu, 3, [](const Word& w) { return w[0] == w[2]; }) == doctest::Approx(0.5));
  const Word abab = md.alphabet().word_from_chars("abab");
  CHECK(oracle_partition(md, 4, [&](const Word& w) { return w == abab; }) == doctest::Approx(1.0));
}

TEST_CASE("oracle refuses oversized enumerations") {
  const auto mu = m_u();
  CHECK_THROWS_WITH_AS(oracle_partition(mu, 30, always, 1000), doctest::Contains("1000"), Error);
  try {
    oracle_partition(mu, 30, always, 1000);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRefused);
  }
}

TEST_CASE("oracle marginals examples") {
  const auto mu = m_u();
  const auto md = m_d();
  for (const auto& row : oracle_marginals(mu, 2, always)) {
    CHECK(row[0] == doctest::Approx(0.5));
    CHECK(row[1] == doctest::Approx(0.5));
  }
  const auto m = oracle_marginals(mu, 3, [](const Word& w) { return w[0] == w[2]; });
  CHECK(m[0][0] == doctest::Approx(0.5));
  const auto d = oracle_marginals(md, 2, always);
  CHECK(d[0] == std::vector<double>{1.0, 0.0});
  CHECK(d[1] == std::vector<double>{0.0, 1.0});
  try {
    oracle_marginals(mu, 2, [](const Word&) { return false; });
    FAIL("expected a null-event error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNullEvent);
  }
}

TEST_CASE("rejection sampling examples") {
  const auto mu = m_u();
  const auto md = m_d();
  Rng rng(1);
  const auto w = rejection_sample(md, 4, always, 1, rng);
  REQUIRE(w);
  CHECK(md.alphabet().to_string(*w) == "abab");
  const auto a = rejection_sample(mu, 1, [](const Word& x) { return x[0] == 0; }, 64, rng);
  REQUIRE(a);
  CHECK(*a == Word{0});
  CHECK_FALSE(rejection_sample(mu, 3, [](const Word&) { return false; }, 10, rng));
  CHECK_THROWS_AS(rejection_sample(mu, 3, always, 0, rng), Error);
}

TEST_CASE("probabilities over all words sum to one") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t a = pick(1, 3, rng);
    const std::size_t n = pick(1, 8, rng);
    const auto model = random_model(a, rng, 0.3);
    double total = 0.0;
    enumerate_words(model.unroll(n), [&](const Word& w, double p) {
      CHECK(p == doctest::Approx(sequence_probability(model, w)).epsilon(1e-12));
      total += p;
    });
    CHECK(std::abs(total - 1.0) <= 1e-10);
    for (const auto& row : oracle_marginals(model, n, always)) {
      double s = 0.0;
      for (double v : row) s += v;
      CHECK(std::abs(s - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("position marginals match enumeration") {
  Rng rng(5);
  const auto chain = random_chain(3, 5, rng);
  const auto px = chain.position_marginals();
  std::vector<std::vector<double>> want(5, std::vector<double>(3, 0.0));
  enumerate_words(chain, [&](const Word& w, double p) {
    for (std::size_t t = 0; t < w.size(); ++t) want[t][w[t]] += p;
  });
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t x = 0; x < 3; ++x) CHECK(px[t][x] == doctest::Approx(want[t][x]).epsilon(1e-12));
  }
}

TEST_CASE("segment products compose steps") {
  Rng rng(9);
  const auto chain = random_chain(2, 6, rng);
  const Matrix whole = chain.segment(1, 5);
  const Matrix split = chain.segment(1, 3) * chain.segment(3, 5);
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) CHECK(whole(x, y) == doctest::Approx(split(x, y)).epsilon(1e-12));
  }
  CHECK(chain.segment(2, 2) == Matrix::identity(2));
}

TEST_CASE("rejection sampler matches the conditional distribution") {
  const auto mu = m_u();
  const Predicate pred = [](const Word& w) { return w[0] == w[3]; };
  const auto exact = oracle_conditional(mu.unroll(4), pred);
  Rng rng(20261016);
  std::map<Word, std::size_t> counts;
  const std::size_t total = 100000;
  for (std::size_t k = 0; k < total; ++k) {
    const auto w = rejection_sample(mu, 4, pred, 1000, rng);
    REQUIRE(w);
    ++counts[*w];
  }
  CHECK(tv_distance(counts, total, exact) <= 0.02);
}

TEST_CASE("uniform01 and sample_index are reproducible") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    const double u = uniform01(a);
    CHECK(u == uniform01(b));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  const std::vector<double> w{0.0, 2.0, 0.0};
  CHECK(sample_index(w, a) == 1);
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(sample_index(zero, a), Error);
}
