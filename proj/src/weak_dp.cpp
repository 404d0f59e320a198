#include "cmseq/weak_dp.hpp"

#include <algorithm>
#include <cmath>

#include "span_algebra.hpp"

namespace cmseq {

namespace {

// Round-off from the subtractions; anything more negative is a bug.
constexpr double kNegativeTolerance = 1e-9;

}  // namespace

std::strong_ordering tree_compare(const ParseTree& t1, const ParseTree& t2) {
  if (auto c = t1.leaves <=> t2.leaves; c != 0) return c;
  if (auto c = t1.label <=> t2.label; c != 0) return c;
  if (t1.is_leaf()) return t1.terminal <=> t2.terminal;
  if (auto c = tree_compare(t1.children[0], t2.children[0]); c != 0) return c;
  return tree_compare(t1.children[1], t2.children[1]);
}

bool tree_less(const ParseTree& t1, const ParseTree& t2) { return tree_compare(t1, t2) < 0; }

ParseTree canonical_tree(const CnfGrammar& g, const Word& w) {
  auto trees = enumerate_parse_trees(g, w, g.start());
  if (trees.empty()) {
    throw Error(ErrorCode::kNoParse, "word '" + g.terminals().to_string(w) +
                                         "' is not in the language");
  }
  return *std::min_element(trees.begin(), trees.end(), tree_less);
}

CanonicalPartitionTable::CanonicalPartitionTable(ChainModel chain, const CnfGrammar& g)
    : chain_(std::move(chain)),
      n_(chain_.length()),
      nv_(g.num_nonterminals()),
      nr_(g.binary_rules().size()),
      na_(chain_.alphabet_size()),
      px_(chain_.position_marginals()),
      cells_(n_ * n_ * n_ * nr_ * na_ * na_, 0.0),
      blocks_(n_ * n_ * nv_ * na_ * na_, 0.0),
      rotations_(nr_) {
  const auto& rules = g.binary_rules();
  for (std::size_t r = 0; r < nr_; ++r) {
    // r = S -> A B; collect A -> C E such that S -> C D and D -> E B exist.
    const auto& outer = rules[r];
    for (std::size_t ri : g.rules_for(outer.left)) {
      const auto& inner = rules[ri];
      bool rotatable = false;
      for (std::size_t si : g.rules_for(outer.lhs)) {
        const auto& alt = rules[si];
        if (alt.left != inner.left) continue;
        for (std::size_t di : g.rules_for(alt.right)) {
          if (rules[di].left == inner.right && rules[di].right == outer.right) rotatable = true;
        }
      }
      if (rotatable) rotations_[r].push_back(ri);
    }
  }
}

double CanonicalPartitionTable::marginal(std::size_t start, std::size_t len, Nonterminal v) const {
  double m = 0.0;
  for (Symbol x = 0; x < na_; ++x) {
    for (Symbol y = 0; y < na_; ++y) m += px_[start][x] * block(start, len, v, x, y);
  }
  return m;
}

std::string weak_ambiguity_warning(const CnfGrammar& g, std::size_t n,
                                   const ChartOptions& options) {
  std::size_t bound = std::min(n, options.ambiguity_guard_length);
  while (bound > 0) {
    try {
      const auto v = check_weak_ambiguity_bounded(g, bound, options.enumeration_limit);
      if (!v) return "";
      return "grammar is not weakly ambiguous (" + g.nonterminal_name(v->first) + " and " +
             g.nonterminal_name(v->second) + " both derive '" + g.terminals().to_string(v->word) +
             "'); canonical-tree corrections may be incomplete";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRefused) throw;
      --bound;
    }
  }
  return "";
}

namespace {

// Chain that emits exactly w.
ChainModel point_mass(const Alphabet& alphabet, const Word& w) {
  const std::size_t a = alphabet.size();
  std::vector<double> p0(a, 0.0);
  p0[w[0]] = 1.0;
  std::vector<Matrix> steps;
  for (std::size_t t = 0; t + 1 < w.size(); ++t) {
    Matrix m(a, 1.0 / static_cast<double>(a));
    for (Symbol y = 0; y < a; ++y) m(w[t], y) = y == w[t + 1] ? 1.0 : 0.0;
    steps.push_back(std::move(m));
  }
  return ChainModel(alphabet, std::move(p0), std::move(steps));
}

}  // namespace

std::string weak_exactness_warning(const CnfGrammar& g, std::size_t n, const ChartOptions& options) {
  const std::size_t a = g.terminals().size();
  std::size_t bound = std::min(n, options.ambiguity_guard_length);
  std::vector<double> counts;
  while (bound > 0) {
    try {
      counts.assign(bound + 1, 0.0);
      for_each_word_up_to(
          a, bound,
          [&](const Word& w) {
            if (is_member(g, w)) counts[w.size()] += 1.0;
            return false;
          },
          options.enumeration_limit);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRefused) throw;
      --bound;
    }
  }
  if (bound < 2) return "";

  ChartOptions inner;
  inner.ambiguity_guard_length = 0;
  const std::vector<double> p0(a, 1.0 / static_cast<double>(a));
  const ChainModel uniform(g.terminals(), p0,
                           std::vector<Matrix>(bound - 1, Matrix(a, 1.0 / static_cast<double>(a))));
  const auto table = build_weak_chart(uniform, g, inner);
  for (std::size_t len = 2; len <= bound; ++len) {
    const double want = counts[len] / std::pow(static_cast<double>(a), static_cast<double>(len));
    const double got = table.marginal(0, len, g.start());
    if (std::abs(got - want) <= 1e-9 * std::max(want, 1e-300)) continue;
    std::string example;
    for_each_word_up_to(a, len, [&](const Word& w) {
      if (w.size() != len || !is_member(g, w)) return false;
      const auto single = build_weak_chart(point_mass(g.terminals(), w), g, inner);
      if (std::abs(single.marginal(0, len, g.start()) - 1.0) <= 1e-9) return false;
      example = g.terminals().to_string(w);
      return true;
    });
    return "canonical-tree corrections miss overlapping parses without a bridging symbol (word '" +
           example + "' of length " + std::to_string(len) + "); the weak partition overcounts";
  }
  return "";
}

CanonicalPartitionTable build_weak_chart(const ChainModel& chain, const CnfGrammar& g,
                                         const ChartOptions& options) {
  detail::check_alphabet(chain, g);
  CanonicalPartitionTable table(chain, g);
  const std::size_t n = table.n_;
  const std::size_t a = table.na_;
  const auto& rules = g.binary_rules();
  auto block_ptr = [&](std::size_t s, std::size_t len, Nonterminal v) {
    return table.blocks_.data() + table.block_index(s, len, v);
  };

  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& r : g.terminal_rules()) block_ptr(s, 1, r.lhs)[r.terminal * a + r.terminal] = 1.0;
  }

  std::vector<std::size_t> corrections(n, 0);
  for (std::size_t len = 2; len <= n; ++len) {
    std::fill(corrections.begin(), corrections.end(), 0);
    std::vector<std::string> failures(n);
    detail::parallel_for(n - len + 1, options.threads, [&](std::size_t s) {
      std::vector<double> left(a * a);
      std::vector<double> term(a * a);
      for (std::size_t k = 1; k < len; ++k) {
        const Matrix& step = chain.step(s + k - 1);
        for (std::size_t r = 0; r < rules.size(); ++r) {
          const auto& rule = rules[r];
          const double* right = block_ptr(s + k, len - k, rule.right);
          double* cell = table.cells_.data() + table.cell_index(s, len, k, r);

          // All words split at k by S -> A B.
          detail::through_step(block_ptr(s, k, rule.left), step, a, left.data());
          detail::accumulate_product(left.data(), right, a, cell);

          // Minus those whose canonical tree splits earlier: the left block's
          // canonical decomposition (k', A -> C E) rotates to S -> C D, D -> E B.
          for (std::size_t kp = 1; kp < k; ++kp) {
            for (std::size_t ri : table.rotations_[r]) {
              const double* inner = table.cells_.data() + table.cell_index(s, k, kp, ri);
              if (detail::all_zero(inner, a)) continue;
              detail::through_step(inner, step, a, left.data());
              std::fill(term.begin(), term.end(), 0.0);
              detail::accumulate_product(left.data(), right, a, term.data());
              bool nonzero = false;
              for (std::size_t e = 0; e < a * a; ++e) {
                cell[e] -= term[e];
                nonzero = nonzero || term[e] != 0.0;
              }
              if (nonzero) ++corrections[s];
            }
          }

          for (std::size_t e = 0; e < a * a; ++e) {
            if (cell[e] < 0.0) {
              if (cell[e] < -kNegativeTolerance && failures[s].empty()) {
                failures[s] = "canonical cell mass " + std::to_string(cell[e]) +
                              " below tolerance at span (" + std::to_string(s + 1) + "," +
                              std::to_string(len) + ")";
              }
              cell[e] = 0.0;
            }
          }
          double* block = block_ptr(s, len, rule.lhs);
          for (std::size_t e = 0; e < a * a; ++e) block[e] += cell[e];
        }
      }
    });
    for (const auto& f : failures) {
      if (!f.empty()) throw Error(ErrorCode::kInternal, f);
    }
    for (std::size_t c : corrections) table.corrections_applied_ += c;
  }

  if (auto w = weak_ambiguity_warning(g, n, options); !w.empty()) {
    table.warnings_.push_back(std::move(w));
  }
  if (auto w = weak_exactness_warning(g, n, options); !w.empty()) {
    table.warnings_.push_back(std::move(w));
  }
  return table;
}

CanonicalPartitionTable build_weak_chart(const MarkovModel& model, const CnfGrammar& g,
                                         std::size_t n, const ChartOptions& options) {
  return build_weak_chart(model.unroll(n), g, options);
}

double partition_weak(const CanonicalPartitionTable& table, const CnfGrammar& g) {
  return table.marginal(0, table.length(), g.start());
}

namespace {

class WeakSampler {
 public:
  WeakSampler(const CanonicalPartitionTable& table, const CnfGrammar& g, Word& out, Rng& rng)
      : t_(table), g_(g), out_(out), rng_(rng), a_(table.alphabet_size()) {}

  // Any word of v's language on the span with the given boundary letters.
  void full(std::size_t s, std::size_t len, Nonterminal v, Symbol x, Symbol y) {
    if (len == 1) {
      out_[s] = x;
      return;
    }
    std::vector<std::pair<std::size_t, std::size_t>> options;
    std::vector<double> weights;
    for (std::size_t k = 1; k < len; ++k) {
      for (std::size_t r : g_.rules_for(v)) {
        const double w = t_.cell(s, len, k, r, x, y);
        if (w <= 0.0) continue;
        options.emplace_back(k, r);
        weights.push_back(w);
      }
    }
    const auto [k, r] = options[sample_index(weights, rng_)];
    in_cell(s, len, k, r, x, y);
  }

  // A word whose canonical root decomposition on the span is (k, rule r).
  // The cell is a positive mixture: left-block canonical cells that do not
  // rotate, each followed by any word of the right block.
  void in_cell(std::size_t s, std::size_t len, std::size_t k, std::size_t r, Symbol x, Symbol y) {
    const auto& rule = g_.binary_rules()[r];
    const Matrix& step = t_.chain().step(s + k - 1);
    const auto& rotations = t_.rotations(r);

    struct Choice {
      std::size_t kp;
      std::size_t rule;
      Symbol u;
      Symbol v;
    };
    std::vector<Choice> choices;
    std::vector<double> weights;
    auto offer = [&](std::size_t kp, std::size_t ri, Symbol u, double left) {
      for (Symbol m = 0; m < a_; ++m) {
        const double w = left * step(u, m) * t_.block(s + k, len - k, rule.right, m, y);
        if (w <= 0.0) continue;
        choices.push_back({kp, ri, u, m});
        weights.push_back(w);
      }
    };
    if (k == 1) {
      if (t_.block(s, 1, rule.left, x, x) > 0.0) offer(0, 0, x, t_.block(s, 1, rule.left, x, x));
    } else {
      for (std::size_t kp = 1; kp < k; ++kp) {
        for (std::size_t ri : g_.rules_for(rule.left)) {
          if (std::find(rotations.begin(), rotations.end(), ri) != rotations.end()) continue;
          for (Symbol u = 0; u < a_; ++u) {
            const double left = t_.cell(s, k, kp, ri, x, u);
            if (left > 0.0) offer(kp, ri, u, left);
          }
        }
      }
    }
    const Choice c = choices[sample_index(weights, rng_)];
    if (k == 1) {
      out_[s] = x;
    } else {
      in_cell(s, k, c.kp, c.rule, x, c.u);
    }
    full(s + k, len - k, rule.right, c.v, y);
  }

 private:
  const CanonicalPartitionTable& t_;
  const CnfGrammar& g_;
  Word& out_;
  Rng& rng_;
  std::size_t a_;
};

}  // namespace

Word sample_word_weak(const CanonicalPartitionTable& table, const CnfGrammar& g, Rng& rng) {
  const std::size_t n = table.length();
  const std::size_t a = table.alphabet_size();
  if (!(partition_weak(table, g) > 0.0)) {
    throw Error(ErrorCode::kNullEvent, "no word of length " + std::to_string(n) +
                                           " in the language has positive probability");
  }
  std::vector<double> weights(a * a);
  for (Symbol x = 0; x < a; ++x) {
    for (Symbol y = 0; y < a; ++y) {
      weights[x * a + y] = table.position_marginals()[0][x] * table.block(0, n, g.start(), x, y);
    }
  }
  const std::size_t pick = sample_index(weights, rng);
  Word out(n);
  WeakSampler(table, g, out, rng)
      .full(0, n, g.start(), static_cast<Symbol>(pick / a), static_cast<Symbol>(pick % a));
  return out;
}

Word sample_word_weak(const CanonicalPartitionTable& table, const MarkovModel& model,
                      const CnfGrammar& g, Rng& rng) {
  if (!(model.alphabet() == table.chain().alphabet())) {
    throw Error(ErrorCode::kAlphabetMismatch, "model does not match the table");
  }
  return sample_word_weak(table, g, rng);
}

}  // namespace cmseq
