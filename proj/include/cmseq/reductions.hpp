#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cmseq/equality.hpp"
#include "cmseq/grammar.hpp"
#include "cmseq/markov.hpp"

namespace cmseq {

// ---- 2SAT -> falsifying NFA ----

struct Literal {
  std::size_t var = 0;  // 1-based
  bool positive = true;
};

struct TwoSatFormula {
  std::size_t num_vars = 0;
  std::vector<std::array<Literal, 2>> clauses;

  void validate() const;
  // assignment[i] is variable i+1, 1 = true.
  bool satisfied_by(const std::vector<std::uint8_t>& assignment) const;
};

using NfaState = std::uint32_t;

struct NfaTransition {
  NfaState from = 0;
  std::uint8_t label = 0;
  NfaState to = 0;
};

struct Nfa {
  std::size_t num_states = 0;
  NfaState initial = 0;
  std::vector<NfaState> accepting;
  std::vector<NfaTransition> transitions;

  void validate() const;
  bool accepts(const std::vector<std::uint8_t>& input) const;
  std::string to_dot() const;
};

inline constexpr std::uint64_t kDefaultSubsetLimit = 1u << 20;

// One chain of n states per clause hanging off a shared initial state. The
// transition into position i of clause k's chain reads the value that
// falsifies the clause's literal on variable i (0 for a positive literal),
// either value when the clause does not mention i, and does not exist when
// the clause mentions i with both polarities. A string reaches the end of a
// chain iff it falsifies that clause.
Nfa build_falsifying_nfa(const TwoSatFormula& phi);

// Number of distinct accepted strings of length n, by forward subset
// construction restricted to reachable subsets.
BigCount count_accepted(const Nfa& nfa, std::size_t n, std::uint64_t max_subsets = kDefaultSubsetLimit);

BigCount count_sat(const TwoSatFormula& phi, std::uint64_t max_subsets = kDefaultSubsetLimit);
BigCount brute_force_count_sat(const TwoSatFormula& phi);

// ---- binary CSP -> unwrapped chain with equalities ----

struct CspEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  // factor[x][y] in {0, 1}, x the value of u.
  std::vector<std::vector<std::uint8_t>> factor;
  bool dummy = false;
};

struct BinaryCsp {
  Alphabet domain;
  std::size_t num_vars = 0;
  std::vector<CspEdge> edges;

  void validate() const;
  std::vector<std::size_t> degrees() const;
  bool connected() const;
  bool satisfied_by(const Word& assignment) const;
};

// Pairs odd-degree vertices with all-ones dummy edges until at most two
// remain. The two lowest-index odd vertices stay odd; the rest are paired in
// index order.
BinaryCsp eulerize(const BinaryCsp& csp);

struct EulerianTrail {
  std::vector<std::size_t> vertices;
  std::vector<std::size_t> edges;  // edges[t] joins vertices[t] and vertices[t+1]
};

// Hierholzer's algorithm starting at the lowest-index odd vertex (else vertex
// 0), taking incident edges in declaration order.
EulerianTrail eulerian_trail(const BinaryCsp& csp);
std::vector<std::size_t> eulerian_path(const BinaryCsp& csp);

struct UnwrapResult {
  ChainModel model;
  EqualitySet equalities;
  // row_weights[t][x] = r(x), the row sum of the factor traversed at step t.
  std::vector<std::vector<double>> row_weights;
  double p0_scale = 1.0;  // |A|
  std::vector<std::size_t> vertex_map;
  std::vector<std::size_t> edge_map;  // edge of the eulerized CSP used at each step
  BinaryCsp eulerized;
  // dead[t] lists source values whose factor row is all zero at step t.
  std::vector<std::vector<Symbol>> dead;

  // P(word) * |A| * prod_t r_t(word[t]); the word's contribution to the count.
  double weight(const Word& word) const;
  // Reads each CSP variable from its first occurrence.
  Word assignment(const Word& word) const;
};

UnwrapResult unwrap_csp(const BinaryCsp& csp);

struct ReductionReport {
  BigCount csp_solutions = 0;
  double weighted_chain_count = 0.0;
  BigCount chain_count = 0;  // weighted count rounded to the nearest integer
  bool integral = false;
  bool bijection = false;
  bool passed = false;
  std::string detail;
};

BigCount brute_force_count_csp(const BinaryCsp& csp, std::uint64_t limit = kDefaultEnumerationLimit);
ReductionReport verify_reduction(const BinaryCsp& csp, std::uint64_t limit = kDefaultEnumerationLimit);

}  // namespace cmseq
