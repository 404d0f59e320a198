#include "cmseq/grammar_dp.hpp"

#include <functional>

#include "span_algebra.hpp"

namespace cmseq {

BoundaryChart::BoundaryChart(ChainModel chain, std::size_t num_nonterminals)
    : chain_(std::move(chain)),
      n_(chain_.length()),
      nv_(num_nonterminals),
      na_(chain_.alphabet_size()),
      px_(chain_.position_marginals()),
      cond_(n_ * n_ * nv_ * na_ * na_, 0.0),
      marginal_(n_ * n_ * nv_, 0.0) {}

void BoundaryChart::finalize_marginals() {
  for (std::size_t len = 1; len <= n_; ++len) {
    for (std::size_t s = 0; s + len <= n_; ++s) {
      for (Nonterminal v = 0; v < nv_; ++v) {
        double m = 0.0;
        for (Symbol x = 0; x < na_; ++x) {
          for (Symbol y = 0; y < na_; ++y) m += joint(s, len, v, x, y);
        }
        marginal_[(s * n_ + (len - 1)) * nv_ + v] = m;
      }
    }
  }
}

std::string ambiguity_warning(const CnfGrammar& g, std::size_t n, const ChartOptions& options) {
  std::size_t bound = std::min(n, options.ambiguity_guard_length);
  while (bound > 0) {
    try {
      const auto witness = check_ambiguity_bounded(g, bound, options.enumeration_limit);
      if (!witness) return "";
      return "grammar is ambiguous (word '" + g.terminals().to_string(*witness) +
             "' has several parse trees); the chart sums over trees and overcounts";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRefused) throw;
      --bound;
    }
  }
  return "";
}

BoundaryChart build_chart(const ChainModel& chain, const CnfGrammar& g,
                          const ChartOptions& options) {
  detail::check_alphabet(chain, g);
  BoundaryChart chart(chain, g.num_nonterminals());
  const std::size_t n = chart.length();
  const std::size_t a = chart.alphabet_size();
  const std::size_t nv = g.num_nonterminals();

  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& r : g.terminal_rules()) chart.block(s, 1, r.lhs)[r.terminal * a + r.terminal] = 1.0;
  }

  for (std::size_t len = 2; len <= n; ++len) {
    detail::parallel_for(n - len + 1, options.threads, [&](std::size_t s) {
      std::vector<double> stitched(nv * a * a);
      std::vector<bool> ready(nv);
      for (std::size_t k = 1; k < len; ++k) {
        // Contract the left child's right boundary with the transition first,
        // once per left nonterminal, then the right child's left boundary.
        std::fill(ready.begin(), ready.end(), false);
        const Matrix& step = chain.step(s + k - 1);
        for (const auto& r : g.binary_rules()) {
          double* left = stitched.data() + r.left * a * a;
          if (!ready[r.left]) {
            detail::through_step(chart.block(s, k, r.left), step, a, left);
            ready[r.left] = true;
          }
          detail::accumulate_product(left, chart.block(s + k, len - k, r.right), a,
                                     chart.block(s, len, r.lhs));
        }
      }
    });
  }
  chart.finalize_marginals();
  if (auto w = ambiguity_warning(g, n, options); !w.empty()) chart.add_warning(std::move(w));
  return chart;
}

BoundaryChart build_chart(const MarkovModel& model, const CnfGrammar& g, std::size_t n,
                          const ChartOptions& options) {
  return build_chart(model.unroll(n), g, options);
}

double partition_unambiguous(const BoundaryChart& chart, const CnfGrammar& g) {
  if (chart.num_nonterminals() != g.num_nonterminals()) {
    throw Error(ErrorCode::kPrecondition, "chart was built for a different grammar");
  }
  return chart.marginal(0, chart.length(), g.start());
}

namespace {

struct Split {
  std::size_t k;
  const BinaryRule* rule;
  Symbol u;
  Symbol v;
};

void sample_span(const BoundaryChart& chart, const CnfGrammar& g, std::size_t s, std::size_t len,
                 Nonterminal v, Symbol x, Symbol y, Word& out, Rng& rng) {
  if (len == 1) {
    out[s] = x;
    return;
  }
  const std::size_t a = chart.alphabet_size();
  std::vector<Split> splits;
  std::vector<double> weights;
  for (std::size_t k = 1; k < len; ++k) {
    const Matrix& step = chart.chain().step(s + k - 1);
    for (std::size_t ri : g.rules_for(v)) {
      const auto& r = g.binary_rules()[ri];
      for (Symbol u = 0; u < a; ++u) {
        const double left = chart.conditional(s, k, r.left, x, u);
        if (left == 0.0) continue;
        for (Symbol m = 0; m < a; ++m) {
          const double w = left * step(u, m) * chart.conditional(s + k, len - k, r.right, m, y);
          if (w <= 0.0) continue;
          splits.push_back({k, &r, u, m});
          weights.push_back(w);
        }
      }
    }
  }
  const Split pick = splits[sample_index(weights, rng)];
  sample_span(chart, g, s, pick.k, pick.rule->left, x, pick.u, out, rng);
  sample_span(chart, g, s + pick.k, len - pick.k, pick.rule->right, pick.v, y, out, rng);
}

}  // namespace

Word sample_word_unambiguous(const BoundaryChart& chart, const CnfGrammar& g, Rng& rng) {
  const std::size_t n = chart.length();
  const std::size_t a = chart.alphabet_size();
  if (!(partition_unambiguous(chart, g) > 0.0)) {
    throw Error(ErrorCode::kNullEvent, "no word of length " + std::to_string(n) +
                                           " in the language has positive probability");
  }
  std::vector<double> weights(a * a);
  for (Symbol x = 0; x < a; ++x) {
    for (Symbol y = 0; y < a; ++y) weights[x * a + y] = chart.joint(0, n, g.start(), x, y);
  }
  const std::size_t pick = sample_index(weights, rng);
  Word out(n);
  sample_span(chart, g, 0, n, g.start(), static_cast<Symbol>(pick / a),
              static_cast<Symbol>(pick % a), out, rng);
  return out;
}

Word sample_word_unambiguous(const BoundaryChart& chart, const MarkovModel& model,
                             const CnfGrammar& g, Rng& rng) {
  if (!(model.alphabet() == chart.chain().alphabet())) {
    throw Error(ErrorCode::kAlphabetMismatch, "model does not match the chart");
  }
  return sample_word_unambiguous(chart, g, rng);
}

std::vector<std::vector<double>> conditional_marginals(const BoundaryChart& chart,
                                                       const CnfGrammar& g) {
  const std::size_t n = chart.length();
  const std::size_t a = chart.alphabet_size();
  const std::size_t nv = chart.num_nonterminals();
  const double z = partition_unambiguous(chart, g);
  if (!(z > 0.0)) {
    throw Error(ErrorCode::kNullEvent, "conditioning on a zero-probability language");
  }

  // Top-down pass mirroring the sampler: flow(s, len, V, x, y) is the
  // probability that the sampler visits that cell with those boundary letters.
  std::vector<double> flow(n * n * nv * a * a, 0.0);
  auto at = [&](std::size_t s, std::size_t len, Nonterminal v) {
    return flow.data() + ((s * n + (len - 1)) * nv + v) * a * a;
  };
  for (Symbol x = 0; x < a; ++x) {
    for (Symbol y = 0; y < a; ++y) at(0, n, g.start())[x * a + y] = chart.joint(0, n, g.start(), x, y) / z;
  }
  for (std::size_t len = n; len >= 2; --len) {
    for (std::size_t s = 0; s + len <= n; ++s) {
      for (Nonterminal v = 0; v < nv; ++v) {
        const double* f = at(s, len, v);
        if (detail::all_zero(f, a)) continue;
        for (Symbol x = 0; x < a; ++x) {
          for (Symbol y = 0; y < a; ++y) {
            const double mass = f[x * a + y];
            const double total = chart.conditional(s, len, v, x, y);
            if (mass == 0.0 || total == 0.0) continue;
            const double scale = mass / total;
            for (std::size_t k = 1; k < len; ++k) {
              const Matrix& step = chart.chain().step(s + k - 1);
              for (std::size_t ri : g.rules_for(v)) {
                const auto& r = g.binary_rules()[ri];
                for (Symbol u = 0; u < a; ++u) {
                  const double left = chart.conditional(s, k, r.left, x, u);
                  if (left == 0.0) continue;
                  for (Symbol m = 0; m < a; ++m) {
                    const double w =
                        left * step(u, m) * chart.conditional(s + k, len - k, r.right, m, y);
                    if (w == 0.0) continue;
                    at(s, k, r.left)[x * a + u] += scale * w;
                    at(s + k, len - k, r.right)[m * a + y] += scale * w;
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  std::vector<std::vector<double>> out(n, std::vector<double>(a, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    for (Nonterminal v = 0; v < nv; ++v) {
      for (Symbol x = 0; x < a; ++x) out[s][x] += at(s, 1, v)[x * a + x];
    }
  }
  return out;
}

std::vector<double> conditional_marginal(const BoundaryChart& chart, const MarkovModel& model,
                                         const CnfGrammar& g, std::size_t t) {
  if (!(model.alphabet() == chart.chain().alphabet())) {
    throw Error(ErrorCode::kAlphabetMismatch, "model does not match the chart");
  }
  if (t < 1 || t > chart.length()) throw Error(ErrorCode::kDomain, "position out of range");
  return conditional_marginals(chart, g)[t - 1];
}

}  // namespace cmseq
