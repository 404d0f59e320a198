#pragma once

#include <string>
#include <vector>

#include "cmseq/grammar.hpp"
#include "cmseq/markov.hpp"

namespace cmseq {

struct ChartOptions {
  // Words up to this length are screened for (weak) ambiguity before the chart
  // is trusted; 0 disables the screen. The bound shrinks automatically when
  // the enumeration would exceed enumeration_limit.
  std::size_t ambiguity_guard_length = 8;
  std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
  // Cells of equal span length are independent and may be filled in parallel.
  std::size_t threads = 1;
};

// Span chart for a Markov chain constrained to a CNF language.
//
// Entries are stored conditioned on the left boundary letter:
//   conditional(s, len, V, x, y) = P(V =>* X_s..X_{s+len-1}, X_{s+len-1} = y | X_s = x)
// which composes through one transition per split without dividing by chain
// marginals. joint() multiplies the cached position marginal P(X_s = x) back
// in. Spans use 0-based starts.
class BoundaryChart {
 public:
  BoundaryChart(ChainModel chain, std::size_t num_nonterminals);

  std::size_t length() const { return n_; }
  std::size_t num_nonterminals() const { return nv_; }
  std::size_t alphabet_size() const { return na_; }
  const ChainModel& chain() const { return chain_; }
  const std::vector<std::vector<double>>& position_marginals() const { return px_; }

  double conditional(std::size_t start, std::size_t len, Nonterminal v, Symbol x, Symbol y) const {
    return cond_[index(start, len, v) + x * na_ + y];
  }
  double joint(std::size_t start, std::size_t len, Nonterminal v, Symbol x, Symbol y) const {
    return px_[start][x] * conditional(start, len, v, x, y);
  }
  // P(V_start^len): probability that V derives the span.
  double marginal(std::size_t start, std::size_t len, Nonterminal v) const {
    return marginal_[(start * n_ + (len - 1)) * nv_ + v];
  }

  // The |A| x |A| conditional block for (start, len, v), row-major.
  double* block(std::size_t start, std::size_t len, Nonterminal v) {
    return cond_.data() + index(start, len, v);
  }
  const double* block(std::size_t start, std::size_t len, Nonterminal v) const {
    return cond_.data() + index(start, len, v);
  }

  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }
  void finalize_marginals();

 private:
  std::size_t index(std::size_t start, std::size_t len, Nonterminal v) const {
    return ((start * n_ + (len - 1)) * nv_ + v) * na_ * na_;
  }

  ChainModel chain_;
  std::size_t n_;
  std::size_t nv_;
  std::size_t na_;
  std::vector<std::vector<double>> px_;
  std::vector<double> cond_;
  std::vector<double> marginal_;
  std::vector<std::string> warnings_;
};

// Fills the chart bottom-up by span length. Exact for unambiguous grammars; on
// ambiguous ones it sums over parse trees and therefore overcounts words, so a
// bounded ambiguity screen runs first and leaves a warning when it fires.
BoundaryChart build_chart(const ChainModel& chain, const CnfGrammar& g,
                          const ChartOptions& options = {});
BoundaryChart build_chart(const MarkovModel& model, const CnfGrammar& g, std::size_t n,
                          const ChartOptions& options = {});

// P_M(L_G^n).
double partition_unambiguous(const BoundaryChart& chart, const CnfGrammar& g);

Word sample_word_unambiguous(const BoundaryChart& chart, const CnfGrammar& g, Rng& rng);
Word sample_word_unambiguous(const BoundaryChart& chart, const MarkovModel& model,
                             const CnfGrammar& g, Rng& rng);

// P(X_t = a | w in L_G^n) for 1-based t.
std::vector<double> conditional_marginal(const BoundaryChart& chart, const MarkovModel& model,
                                         const CnfGrammar& g, std::size_t t);
// Every position at once (0-based rows).
std::vector<std::vector<double>> conditional_marginals(const BoundaryChart& chart,
                                                       const CnfGrammar& g);

// Screens g for ambiguity up to min(n, guard length), shrinking the bound to
// respect the enumeration limit. Returns a human-readable warning or "".
std::string ambiguity_warning(const CnfGrammar& g, std::size_t n, const ChartOptions& options);

}  // namespace cmseq
