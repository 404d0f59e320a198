#include "cmseq/equality.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>
#include <utility>

namespace cmseq {

EqualitySet::EqualitySet(std::size_t n, std::vector<EqualityConstraint> constraints)
    : n_(n), constraints_(std::move(constraints)) {
  if (n_ == 0) throw Error(ErrorCode::kDomain, "sequence length must be at least 1");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& c : constraints_) {
    if (c.i < 1 || c.i >= c.j || c.j > n_) {
      throw Error(ErrorCode::kDomain, "constraint (" + std::to_string(c.i) + "," +
                                          std::to_string(c.j) + ") violates 1 <= i < j <= n");
    }
    if (!seen.emplace(c.i, c.j).second) {
      throw Error(ErrorCode::kDomain, "duplicate constraint (" + std::to_string(c.i) + "," +
                                          std::to_string(c.j) + ")");
    }
    if (!c.sigma.empty()) {
      std::vector<bool> hit(c.sigma.size(), false);
      for (Symbol s : c.sigma) {
        if (s >= c.sigma.size() || hit[s]) {
          throw Error(ErrorCode::kDomain, "sigma is not a permutation");
        }
        hit[s] = true;
      }
    }
  }
}

bool EqualitySet::satisfied_by(const Word& w) const {
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const EqualityConstraint& c) { return c.satisfied_by(w); });
}

void EqualitySet::validate(std::size_t alphabet_size) const {
  for (const auto& c : constraints_) {
    if (!c.sigma.empty() && c.sigma.size() != alphabet_size) {
      throw Error(ErrorCode::kDomain, "sigma size does not match the alphabet");
    }
  }
}

std::string_view to_string(TopologyClass c) {
  switch (c) {
    case TopologyClass::kNonCrossing: return "NonCrossing";
    case TopologyClass::kRepeatedSection: return "RepeatedSection";
    case TopologyClass::kPalindromic: return "Palindromic";
    case TopologyClass::kGeneral: return "General";
  }
  return "General";
}

namespace {

std::vector<EqualityConstraint> sorted_by_i(const EqualitySet& eqs) {
  auto cs = eqs.constraints();
  std::sort(cs.begin(), cs.end(), [](const auto& a, const auto& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return cs;
}

bool strictly_increasing_i(const std::vector<EqualityConstraint>& cs) {
  for (std::size_t k = 1; k < cs.size(); ++k) {
    if (cs[k - 1].i >= cs[k].i) return false;
  }
  return true;
}

}  // namespace

bool is_noncrossing(const EqualitySet& eqs) {
  const auto cs = sorted_by_i(eqs);
  for (std::size_t k = 1; k < cs.size(); ++k) {
    if (cs[k - 1].j >= cs[k].i) return false;
  }
  return true;
}

bool is_repeated_section(const EqualitySet& eqs) {
  const auto cs = sorted_by_i(eqs);
  if (!strictly_increasing_i(cs)) return false;
  for (std::size_t k = 1; k < cs.size(); ++k) {
    if (cs[k - 1].j >= cs[k].j) return false;
  }
  return cs.empty() || cs.back().i < cs.front().j;
}

bool is_palindromic(const EqualitySet& eqs) {
  const auto cs = sorted_by_i(eqs);
  if (!strictly_increasing_i(cs)) return false;
  for (std::size_t k = 1; k < cs.size(); ++k) {
    if (cs[k - 1].j <= cs[k].j) return false;
  }
  return cs.empty() || cs.back().i < cs.back().j;
}

TopologyClass classify(const EqualitySet& eqs) {
  if (is_noncrossing(eqs)) return TopologyClass::kNonCrossing;
  if (is_repeated_section(eqs)) return TopologyClass::kRepeatedSection;
  if (is_palindromic(eqs)) return TopologyClass::kPalindromic;
  return TopologyClass::kGeneral;
}

namespace {

// Chain of variables over the alphabet with unary weights and pairwise factors
// between neighbours. Every tractable topology reduces to one of these (the
// repeated case after conditioning on one variable to cut its cycle).
struct PathModel {
  std::vector<std::vector<double>> unary;
  std::vector<Matrix> pair;  // pair[r] links variable r to r + 1

  std::vector<std::vector<double>> forward() const {
    const std::size_t a = unary[0].size();
    std::vector<std::vector<double>> f(unary.size());
    f[0] = unary[0];
    for (std::size_t r = 1; r < unary.size(); ++r) {
      f[r].assign(a, 0.0);
      for (std::size_t x = 0; x < a; ++x) {
        if (f[r - 1][x] == 0.0) continue;
        for (std::size_t y = 0; y < a; ++y) f[r][y] += f[r - 1][x] * pair[r - 1](x, y);
      }
      for (std::size_t y = 0; y < a; ++y) f[r][y] *= unary[r][y];
    }
    return f;
  }

  static double total(const std::vector<std::vector<double>>& f) {
    double z = 0.0;
    for (double v : f.back()) z += v;
    return z;
  }

  std::vector<Symbol> sample(const std::vector<std::vector<double>>& f, Rng& rng) const {
    const std::size_t a = unary[0].size();
    std::vector<Symbol> values(unary.size());
    values.back() = static_cast<Symbol>(sample_index(f.back(), rng));
    std::vector<double> w(a);
    for (std::size_t r = unary.size() - 1; r-- > 0;) {
      for (std::size_t x = 0; x < a; ++x) w[x] = f[r][x] * pair[r](x, values[r + 1]);
      values[r] = static_cast<Symbol>(sample_index(w, rng));
    }
    return values;
  }
};

// Values pinned at constrained (0-based) positions.
using KeyAssignment = std::vector<std::pair<std::size_t, Symbol>>;

struct Solution {
  double z = 0.0;
  // Samples values at the key positions; only valid when z > 0.
  std::function<KeyAssignment(Rng&)> draw;
};

std::vector<double> forward_at(const ChainModel& chain, std::size_t pos) {
  std::vector<double> alpha = chain.p0();
  const std::size_t a = chain.alphabet_size();
  for (std::size_t t = 0; t < pos; ++t) {
    std::vector<double> next(a, 0.0);
    for (std::size_t x = 0; x < a; ++x) {
      if (alpha[x] == 0.0) continue;
      for (std::size_t y = 0; y < a; ++y) next[y] += alpha[x] * chain.step(t)(x, y);
    }
    alpha = std::move(next);
  }
  return alpha;
}

void check_chain(const ChainModel& chain, const EqualitySet& eqs) {
  if (chain.length() != eqs.n()) {
    throw Error(ErrorCode::kDomain, "equality set length does not match the chain length");
  }
  eqs.validate(chain.alphabet_size());
}

Solution solve_noncrossing(const ChainModel& chain, const EqualitySet& eqs) {
  const auto cs = sorted_by_i(eqs);
  const std::size_t a = chain.alphabet_size();
  if (cs.empty()) return {1.0, [](Rng&) { return KeyAssignment{}; }};

  // Keys alternate i_1, j_1, i_2, j_2, ...; each interval is a consecutive key
  // pair because the closed intervals are disjoint.
  std::vector<std::size_t> keys;
  for (const auto& c : cs) {
    keys.push_back(c.i - 1);
    keys.push_back(c.j - 1);
  }
  auto model = std::make_shared<PathModel>();
  model->unary.assign(keys.size(), std::vector<double>(a, 1.0));
  model->unary[0] = forward_at(chain, keys[0]);
  for (std::size_t r = 0; r + 1 < keys.size(); ++r) {
    Matrix m = chain.segment(keys[r], keys[r + 1]);
    if (r % 2 == 0) {
      const auto& c = cs[r / 2];
      for (std::size_t x = 0; x < a; ++x) {
        for (std::size_t y = 0; y < a; ++y) {
          if (x != c.image(static_cast<Symbol>(y))) m(x, y) = 0.0;
        }
      }
    }
    model->pair.push_back(std::move(m));
  }
  auto f = std::make_shared<std::vector<std::vector<double>>>(model->forward());
  const double z = PathModel::total(*f);
  return {z, [model, f, keys](Rng& rng) {
            const auto values = model->sample(*f, rng);
            KeyAssignment out;
            for (std::size_t r = 0; r < keys.size(); ++r) out.emplace_back(keys[r], values[r]);
            return out;
          }};
}

// Shared by the repeated and palindromic layouts: variable k is y_k = X_{j_k},
// and X_{i_k} = sigma_k(y_k) is folded into the factors.
KeyAssignment pair_assignment(const std::vector<EqualityConstraint>& cs,
                              const std::vector<Symbol>& y) {
  KeyAssignment out;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    out.emplace_back(cs[k].i - 1, cs[k].image(y[k]));
    out.emplace_back(cs[k].j - 1, y[k]);
  }
  return out;
}

Solution solve_repeated(const ChainModel& chain, const EqualitySet& eqs) {
  const auto cs = sorted_by_i(eqs);
  const std::size_t a = chain.alphabet_size();
  const std::size_t kk = cs.size();
  if (kk == 0) return {1.0, [](Rng&) { return KeyAssignment{}; }};

  const std::vector<double> alpha = forward_at(chain, cs[0].i - 1);
  // Bridge from the last first-section position to the first second-section one.
  const Matrix bridge = chain.segment(cs[kk - 1].i - 1, cs[0].j - 1);

  PathModel base;
  base.unary.assign(kk, std::vector<double>(a, 1.0));
  for (std::size_t y = 0; y < a; ++y) base.unary[0][y] = alpha[cs[0].image(y)];
  for (std::size_t k = 0; k + 1 < kk; ++k) {
    const Matrix first = chain.segment(cs[k].i - 1, cs[k + 1].i - 1);
    const Matrix second = chain.segment(cs[k].j - 1, cs[k + 1].j - 1);
    Matrix m(a);
    for (std::size_t y = 0; y < a; ++y) {
      for (std::size_t y2 = 0; y2 < a; ++y2) {
        m(y, y2) = first(cs[k].image(y), cs[k + 1].image(y2)) * second(y, y2);
      }
    }
    base.pair.push_back(std::move(m));
  }

  // The bridge closes a cycle y_K -> y_1; condition on y_1 to cut it.
  auto conditioned = std::make_shared<std::vector<PathModel>>();
  auto forwards = std::make_shared<std::vector<std::vector<std::vector<double>>>>();
  std::vector<double> per_start(a, 0.0);
  for (std::size_t c = 0; c < a; ++c) {
    PathModel m = base;
    for (std::size_t y = 0; y < a; ++y) {
      if (y != c) m.unary[0][y] = 0.0;
    }
    for (std::size_t y = 0; y < a; ++y) m.unary[kk - 1][y] *= bridge(cs[kk - 1].image(y), c);
    forwards->push_back(m.forward());
    per_start[c] = PathModel::total(forwards->back());
    conditioned->push_back(std::move(m));
  }
  double z = 0.0;
  for (double v : per_start) z += v;
  return {z, [conditioned, forwards, per_start, cs](Rng& rng) {
            const std::size_t c = sample_index(per_start, rng);
            return pair_assignment(cs, (*conditioned)[c].sample((*forwards)[c], rng));
          }};
}

Solution solve_palindromic(const ChainModel& chain, const EqualitySet& eqs) {
  const auto cs = sorted_by_i(eqs);
  const std::size_t a = chain.alphabet_size();
  const std::size_t kk = cs.size();
  if (kk == 0) return {1.0, [](Rng&) { return KeyAssignment{}; }};

  const std::vector<double> alpha = forward_at(chain, cs[0].i - 1);
  const Matrix middle = chain.segment(cs[kk - 1].i - 1, cs[kk - 1].j - 1);

  auto model = std::make_shared<PathModel>();
  model->unary.assign(kk, std::vector<double>(a, 1.0));
  for (std::size_t y = 0; y < a; ++y) model->unary[0][y] = alpha[cs[0].image(y)];
  for (std::size_t k = 0; k + 1 < kk; ++k) {
    const Matrix outer_left = chain.segment(cs[k].i - 1, cs[k + 1].i - 1);
    const Matrix inner_right = chain.segment(cs[k + 1].j - 1, cs[k].j - 1);
    Matrix m(a);
    for (std::size_t y = 0; y < a; ++y) {
      for (std::size_t y2 = 0; y2 < a; ++y2) {
        m(y, y2) = outer_left(cs[k].image(y), cs[k + 1].image(y2)) * inner_right(y2, y);
      }
    }
    model->pair.push_back(std::move(m));
  }
  for (std::size_t y = 0; y < a; ++y) model->unary[kk - 1][y] *= middle(cs[kk - 1].image(y), y);

  auto f = std::make_shared<std::vector<std::vector<double>>>(model->forward());
  const double z = PathModel::total(*f);
  return {z, [model, f, cs](Rng& rng) { return pair_assignment(cs, model->sample(*f, rng)); }};
}

Solution solve(const ChainModel& chain, const EqualitySet& eqs) {
  switch (classify(eqs)) {
    case TopologyClass::kNonCrossing: return solve_noncrossing(chain, eqs);
    case TopologyClass::kRepeatedSection: return solve_repeated(chain, eqs);
    case TopologyClass::kPalindromic: return solve_palindromic(chain, eqs);
    case TopologyClass::kGeneral: break;
  }
  throw Error(ErrorCode::kUnsupportedTopology,
              "equality set is not non-crossing, repeated-section or palindromic");
}

// Fills the unconstrained positions given the values at the key positions,
// drawing each gap from the chain conditioned on its two endpoints.
Word complete_word(const ChainModel& chain, KeyAssignment keys, Rng& rng) {
  const std::size_t n = chain.length();
  const std::size_t a = chain.alphabet_size();
  if (keys.empty()) return sample_unconstrained(chain, rng);
  std::sort(keys.begin(), keys.end());

  Word w(n, 0);
  for (auto [pos, value] : keys) w[pos] = value;
  std::vector<double> weights(a);

  // Prefix: backward sampling from the forward messages.
  const std::size_t first = keys.front().first;
  if (first > 0) {
    std::vector<std::vector<double>> alpha(first);
    alpha[0] = chain.p0();
    for (std::size_t t = 1; t < first; ++t) {
      alpha[t].assign(a, 0.0);
      for (std::size_t x = 0; x < a; ++x) {
        for (std::size_t y = 0; y < a; ++y) alpha[t][y] += alpha[t - 1][x] * chain.step(t - 1)(x, y);
      }
    }
    for (std::size_t t = first; t-- > 0;) {
      for (std::size_t x = 0; x < a; ++x) weights[x] = alpha[t][x] * chain.step(t)(x, w[t + 1]);
      w[t] = static_cast<Symbol>(sample_index(weights, rng));
    }
  }

  // Gaps between consecutive keys.
  for (std::size_t r = 0; r + 1 < keys.size(); ++r) {
    const std::size_t lo = keys[r].first;
    const std::size_t hi = keys[r + 1].first;
    if (hi - lo < 2) continue;
    // reach[t][x] = P(X_hi = w[hi] | X_t = x)
    std::vector<std::vector<double>> reach(hi - lo + 1, std::vector<double>(a, 0.0));
    reach[hi - lo][w[hi]] = 1.0;
    for (std::size_t t = hi; t-- > lo + 1;) {
      for (std::size_t x = 0; x < a; ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < a; ++y) s += chain.step(t)(x, y) * reach[t + 1 - lo][y];
        reach[t - lo][x] = s;
      }
    }
    for (std::size_t t = lo + 1; t < hi; ++t) {
      for (std::size_t y = 0; y < a; ++y) {
        weights[y] = chain.step(t - 1)(w[t - 1], y) * reach[t - lo][y];
      }
      w[t] = static_cast<Symbol>(sample_index(weights, rng));
    }
  }

  // Suffix: plain forward sampling.
  for (std::size_t t = keys.back().first + 1; t < n; ++t) {
    w[t] = static_cast<Symbol>(sample_index(chain.step(t - 1).row(w[t - 1]), rng));
  }
  return w;
}

}  // namespace

double partition_noncrossing(const ChainModel& chain, const EqualitySet& eqs) {
  check_chain(chain, eqs);
  if (!is_noncrossing(eqs)) {
    throw Error(ErrorCode::kPrecondition, "equality set is not non-crossing");
  }
  return solve_noncrossing(chain, eqs).z;
}

double partition_repeated(const ChainModel& chain, const EqualitySet& eqs) {
  check_chain(chain, eqs);
  if (is_repeated_section(eqs)) return solve_repeated(chain, eqs).z;
  if (is_noncrossing(eqs)) return solve_noncrossing(chain, eqs).z;
  throw Error(ErrorCode::kPrecondition, "equality set is not a repeated section");
}

double partition_palindromic(const ChainModel& chain, const EqualitySet& eqs) {
  check_chain(chain, eqs);
  if (!is_palindromic(eqs)) {
    throw Error(ErrorCode::kPrecondition, "equality set is not palindromic");
  }
  return solve_palindromic(chain, eqs).z;
}

double partition_noncrossing(const MarkovModel& model, const EqualitySet& eqs) {
  return partition_noncrossing(model.unroll(eqs.n()), eqs);
}

double partition_repeated(const MarkovModel& model, const EqualitySet& eqs) {
  return partition_repeated(model.unroll(eqs.n()), eqs);
}

double partition_palindromic(const MarkovModel& model, const EqualitySet& eqs) {
  return partition_palindromic(model.unroll(eqs.n()), eqs);
}

double partition_equality(const ChainModel& chain, const EqualitySet& eqs) {
  check_chain(chain, eqs);
  return solve(chain, eqs).z;
}

Word sample_equality_constrained(const ChainModel& chain, const EqualitySet& eqs, Rng& rng) {
  check_chain(chain, eqs);
  const Solution sol = solve(chain, eqs);
  if (!(sol.z > 0.0)) {
    throw Error(ErrorCode::kNullEvent, "equality constraints have zero probability");
  }
  return complete_word(chain, sol.draw(rng), rng);
}

Word sample_equality_constrained(const MarkovModel& model, const EqualitySet& eqs, Rng& rng) {
  return sample_equality_constrained(model.unroll(eqs.n()), eqs, rng);
}

}  // namespace cmseq
