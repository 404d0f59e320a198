#pragma once

#include <compare>
#include <string>
#include <vector>

#include "cmseq/grammar.hpp"
#include "cmseq/grammar_dp.hpp"
#include "cmseq/markov.hpp"

namespace cmseq {

// Identifies the fixed order on nonterminals and terminals used by the tree
// order; serialized with results so runs can be reproduced.
inline constexpr const char* kSymbolOrderRule = "declaration-order/nonterminals-before-terminals";

// Total order on parse trees: fewer leaves first; otherwise compare
// (root label, left subtree, right subtree) lexicographically. Leaves compare
// by (label, terminal). Labels use declaration order.
std::strong_ordering tree_compare(const ParseTree& t1, const ParseTree& t2);
bool tree_less(const ParseTree& t1, const ParseTree& t2);

// Minimum parse tree of w under tree_less, by enumerating every parse.
ParseTree canonical_tree(const CnfGrammar& g, const Word& w);

// Partition of each span's language by the root decomposition (k, V -> A B)
// of its canonical tree, refined by boundary letters and stored conditioned on
// the left boundary like BoundaryChart.
//
// For weakly ambiguous grammars every span has at most one deriving symbol,
// so two parses of a span can only differ in where they split. A word whose
// parse splits at k also splits earlier at k' < k when the left block A
// decomposes as C E with S -> C D and D -> E B; the canonical cell for k is
// the split-k mass minus the mass of the left block's canonical cells that
// admit such a rotation.
class CanonicalPartitionTable {
 public:
  CanonicalPartitionTable(ChainModel chain, const CnfGrammar& g);

  std::size_t length() const { return n_; }
  std::size_t alphabet_size() const { return na_; }
  const ChainModel& chain() const { return chain_; }
  const std::vector<std::vector<double>>& position_marginals() const { return px_; }

  // Conditional mass of words on the span whose canonical tree has root rule
  // `rule` (index into binary_rules()) and left subtree of k leaves. len >= 2.
  double cell(std::size_t start, std::size_t len, std::size_t k, std::size_t rule, Symbol x,
              Symbol y) const {
    return cells_[cell_index(start, len, k, rule) + x * na_ + y];
  }
  double cell_joint(std::size_t start, std::size_t len, std::size_t k, std::size_t rule,
                    Symbol x, Symbol y) const {
    return px_[start][x] * cell(start, len, k, rule, x, y);
  }
  // Conditional mass of the whole language of v on the span (sum of its cells).
  double block(std::size_t start, std::size_t len, Nonterminal v, Symbol x, Symbol y) const {
    return blocks_[block_index(start, len, v) + x * na_ + y];
  }
  // P(V_start^len)
  double marginal(std::size_t start, std::size_t len, Nonterminal v) const;

  // Rules A -> C E whose canonical cells are subtracted from the split cells
  // of `rule` = S -> A B.
  const std::vector<std::size_t>& rotations(std::size_t rule) const { return rotations_[rule]; }

  std::size_t corrections_applied() const { return corrections_applied_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend CanonicalPartitionTable build_weak_chart(const ChainModel&, const CnfGrammar&,
                                                  const ChartOptions&);

  std::size_t cell_index(std::size_t start, std::size_t len, std::size_t k,
                         std::size_t rule) const {
    return ((((start * n_ + (len - 1)) * n_ + (k - 1)) * nr_) + rule) * na_ * na_;
  }
  std::size_t block_index(std::size_t start, std::size_t len, Nonterminal v) const {
    return ((start * n_ + (len - 1)) * nv_ + v) * na_ * na_;
  }

  ChainModel chain_;
  std::size_t n_;
  std::size_t nv_;
  std::size_t nr_;
  std::size_t na_;
  std::vector<std::vector<double>> px_;
  std::vector<double> cells_;
  std::vector<double> blocks_;
  std::vector<std::vector<std::size_t>> rotations_;
  std::size_t corrections_applied_ = 0;
  std::vector<std::string> warnings_;
};

// Exact when every pair of overlapping root splits is related through a
// bridging symbol (S -> C D, D -> E B, A -> C E), which covers S -> S S style
// associativity and every unambiguous grammar. Other weakly ambiguous
// grammars can have overlapping parses with no bridge; their mass is then
// overcounted, never undercounted. Two bounded screens run after the build
// and leave warnings: weak ambiguity itself, and exactness of the table
// against CYK word counts on a uniform chain.
CanonicalPartitionTable build_weak_chart(const ChainModel& chain, const CnfGrammar& g,
                                         const ChartOptions& options = {});
CanonicalPartitionTable build_weak_chart(const MarkovModel& model, const CnfGrammar& g,
                                         std::size_t n, const ChartOptions& options = {});

double partition_weak(const CanonicalPartitionTable& table, const CnfGrammar& g);

Word sample_word_weak(const CanonicalPartitionTable& table, const CnfGrammar& g, Rng& rng);
Word sample_word_weak(const CanonicalPartitionTable& table, const MarkovModel& model,
                      const CnfGrammar& g, Rng& rng);

std::string weak_ambiguity_warning(const CnfGrammar& g, std::size_t n,
                                   const ChartOptions& options);
// Compares the table built on a uniform chain with exhaustive CYK counts for
// lengths up to min(n, guard length). Returns a warning naming a miscounted
// word, or "".
std::string weak_exactness_warning(const CnfGrammar& g, std::size_t n,
                                   const ChartOptions& options);

}  // namespace cmseq
