#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cmseq/markov.hpp"

namespace cmseq {

// X_i = sigma(X_j) with 1-based positions i < j. An empty sigma means identity.
struct EqualityConstraint {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<Symbol> sigma;

  Symbol image(Symbol s) const { return sigma.empty() ? s : sigma[s]; }
  bool satisfied_by(const Word& w) const { return w[i - 1] == image(w[j - 1]); }
};

class EqualitySet {
 public:
  EqualitySet(std::size_t n, std::vector<EqualityConstraint> constraints);

  std::size_t n() const { return n_; }
  const std::vector<EqualityConstraint>& constraints() const { return constraints_; }
  bool satisfied_by(const Word& w) const;
  // Checks sigma sizes against an alphabet.
  void validate(std::size_t alphabet_size) const;

 private:
  std::size_t n_;
  std::vector<EqualityConstraint> constraints_;
};

enum class TopologyClass { kNonCrossing, kRepeatedSection, kPalindromic, kGeneral };

std::string_view to_string(TopologyClass c);

bool is_noncrossing(const EqualitySet& eqs);
bool is_repeated_section(const EqualitySet& eqs);
bool is_palindromic(const EqualitySet& eqs);

// First matching class in the order NonCrossing, RepeatedSection, Palindromic.
TopologyClass classify(const EqualitySet& eqs);

// Each partition_* accepts any input satisfying its own class definition, so
// inputs in two classes can be cross-checked. partition_repeated also accepts
// non-crossing sets. Chains are accepted so unwrapped CSPs can be reused.
double partition_noncrossing(const ChainModel& chain, const EqualitySet& eqs);
double partition_repeated(const ChainModel& chain, const EqualitySet& eqs);
double partition_palindromic(const ChainModel& chain, const EqualitySet& eqs);

double partition_noncrossing(const MarkovModel& model, const EqualitySet& eqs);
double partition_repeated(const MarkovModel& model, const EqualitySet& eqs);
double partition_palindromic(const MarkovModel& model, const EqualitySet& eqs);

// Dispatches on classify(); throws kUnsupportedTopology for General.
double partition_equality(const ChainModel& chain, const EqualitySet& eqs);

Word sample_equality_constrained(const ChainModel& chain, const EqualitySet& eqs, Rng& rng);
Word sample_equality_constrained(const MarkovModel& model, const EqualitySet& eqs, Rng& rng);

}  // namespace cmseq
