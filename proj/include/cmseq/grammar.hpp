#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cmseq/markov.hpp"

namespace cmseq {

using Nonterminal = std::uint32_t;
// Derivation counts grow like Catalan numbers and overflow 64 bits near n = 37.
using BigCount = boost::multiprecision::cpp_int;

struct GrammarSymbol {
  bool terminal = false;
  std::uint32_t index = 0;

  friend bool operator==(const GrammarSymbol&, const GrammarSymbol&) = default;
  friend auto operator<=>(const GrammarSymbol&, const GrammarSymbol&) = default;
};

struct Rule {
  Nonterminal lhs = 0;
  std::vector<GrammarSymbol> rhs;

  friend bool operator==(const Rule&, const Rule&) = default;
  friend auto operator<=>(const Rule&, const Rule&) = default;
};

// General context-free grammar. Epsilon rules are not supported.
class Cfg {
 public:
  Cfg(std::vector<std::string> nonterminals, Alphabet terminals, std::vector<Rule> rules,
      Nonterminal start);

  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  const Alphabet& terminals() const { return terminals_; }
  const std::vector<Rule>& rules() const { return rules_; }
  Nonterminal start() const { return start_; }

 private:
  std::vector<std::string> nonterminals_;
  Alphabet terminals_;
  std::vector<Rule> rules_;
  Nonterminal start_;
};

struct BinaryRule {
  Nonterminal lhs = 0;
  Nonterminal left = 0;
  Nonterminal right = 0;

  friend bool operator==(const BinaryRule&, const BinaryRule&) = default;
  friend auto operator<=>(const BinaryRule&, const BinaryRule&) = default;
};

struct TerminalRule {
  Nonterminal lhs = 0;
  Symbol terminal = 0;

  friend bool operator==(const TerminalRule&, const TerminalRule&) = default;
  friend auto operator<=>(const TerminalRule&, const TerminalRule&) = default;
};

// Chomsky normal form grammar. The constructor removes duplicate rules and
// every unproductive or unreachable nonterminal, keeping declaration order
// for the survivors; an empty language is rejected.
class CnfGrammar {
 public:
  CnfGrammar(std::vector<std::string> nonterminals, Alphabet terminals,
             std::vector<BinaryRule> binary_rules, std::vector<TerminalRule> terminal_rules,
             Nonterminal start);

  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  std::size_t num_nonterminals() const { return nonterminals_.size(); }
  const Alphabet& terminals() const { return terminals_; }
  const std::vector<BinaryRule>& binary_rules() const { return binary_rules_; }
  const std::vector<TerminalRule>& terminal_rules() const { return terminal_rules_; }
  Nonterminal start() const { return start_; }

  Nonterminal nonterminal_index(const std::string& name) const;
  const std::string& nonterminal_name(Nonterminal v) const { return nonterminals_.at(v); }
  bool has_terminal_rule(Nonterminal v, Symbol a) const {
    return emits_[v * terminals_.size() + a] != 0;
  }
  // Indices into binary_rules() with the given left-hand side.
  const std::vector<std::size_t>& rules_for(Nonterminal v) const { return by_lhs_[v]; }

  // Same grammar over a larger alphabet (e.g. a model's). Every grammar
  // terminal must appear in target.
  CnfGrammar with_terminals(const Alphabet& target) const;

  friend bool operator==(const CnfGrammar& a, const CnfGrammar& b) {
    return a.nonterminals_ == b.nonterminals_ && a.terminals_ == b.terminals_ &&
           a.binary_rules_ == b.binary_rules_ && a.terminal_rules_ == b.terminal_rules_ &&
           a.start_ == b.start_;
  }

 private:
  std::vector<std::string> nonterminals_;
  Alphabet terminals_;
  std::vector<BinaryRule> binary_rules_;
  std::vector<TerminalRule> terminal_rules_;
  Nonterminal start_;
  std::vector<std::uint8_t> emits_;
  std::vector<std::vector<std::size_t>> by_lhs_;
};

// Binarizes, hoists terminals out of long right-hand sides and removes unit
// chains. Normalization can change the ambiguity structure of a grammar, so
// ambiguity checks should run on the result.
CnfGrammar to_cnf(const Cfg& g);

// CYK chart over a word; spans are addressed by 0-based start and length.
class ParseChart {
 public:
  ParseChart(std::size_t n, std::size_t num_nonterminals)
      : n_(n), v_(num_nonterminals), cells_(n * n * num_nonterminals, 0) {}

  std::size_t length() const { return n_; }
  bool cell(std::size_t start, std::size_t len, Nonterminal v) const {
    return cells_[index(start, len, v)] != 0;
  }
  void set(std::size_t start, std::size_t len, Nonterminal v) { cells_[index(start, len, v)] = 1; }

 private:
  std::size_t index(std::size_t start, std::size_t len, Nonterminal v) const {
    return (start * n_ + (len - 1)) * v_ + v;
  }
  std::size_t n_;
  std::size_t v_;
  std::vector<std::uint8_t> cells_;
};

ParseChart cyk_member(const CnfGrammar& g, const Word& w);
bool is_member(const CnfGrammar& g, const Word& w);

BigCount count_derivations(const CnfGrammar& g, const Word& w);

// Parse tree of a CNF grammar: a leaf is (label -> terminal), an internal node
// has exactly two children.
struct ParseTree {
  Nonterminal label = 0;
  Symbol terminal = 0;
  std::size_t leaves = 1;
  std::vector<ParseTree> children;

  bool is_leaf() const { return children.empty(); }
  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

// Every parse tree of the whole word rooted at `root`. Exponential; meant for
// oracles and short words.
std::vector<ParseTree> enumerate_parse_trees(const CnfGrammar& g, const Word& w,
                                             Nonterminal root);
Word tree_yield(const ParseTree& t);

// Shortest (then lexicographically first) word of length <= max_len with at
// least two derivations from the start symbol.
std::optional<Word> check_ambiguity_bounded(const CnfGrammar& g, std::size_t max_len,
                                            std::uint64_t limit = kDefaultEnumerationLimit);

struct WeakAmbiguityViolation {
  Nonterminal first = 0;
  Nonterminal second = 0;
  Word word;
};

// Looks for two distinct nonterminals deriving a common word of length <= max_len.
std::optional<WeakAmbiguityViolation> check_weak_ambiguity_bounded(
    const CnfGrammar& g, std::size_t max_len,
    std::uint64_t limit = kDefaultEnumerationLimit);

// Calls visit on every word of each length 1..max_len in length-then-lexicographic
// order until it returns true. Refuses when the total count exceeds limit.
void for_each_word_up_to(std::size_t alphabet_size, std::size_t max_len,
                         const std::function<bool(const Word&)>& visit,
                         std::uint64_t limit = kDefaultEnumerationLimit);

}  // namespace cmseq
