#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmseq/errors.hpp"

namespace cmseq {

using Symbol = std::uint32_t;
// A sequence of alphabet indices. Positions are 0-based in code; operations
// that take user-facing positions (constraints, marginals) use 1-based ones.
using Word = std::vector<Symbol>;
using Predicate = std::function<bool(const Word&)>;
using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits, so sequences are
// identical across standard libraries for a given seed.
double uniform01(Rng& rng);

// Draws an index with probability proportional to weights[i]. Weights must be
// nonnegative with a positive sum.
std::size_t sample_index(std::span<const double> weights, Rng& rng);

class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> symbols);

  std::size_t size() const { return symbols_.size(); }
  const std::string& name(Symbol s) const { return symbols_.at(s); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Symbol index_of(const std::string& name) const;

  Word parse_word(const std::vector<std::string>& names) const;
  std::vector<std::string> render(const Word& w) const;
  // Concatenated symbol names; convenient for single-character alphabets.
  std::string to_string(const Word& w) const;
  // Splits a string into single-character symbols.
  Word word_from_chars(std::string_view chars) const;

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, Symbol> index_;
};

// Dense row-major square matrix of probabilities.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim, double fill = 0.0)
      : dim_(dim), data_(dim * dim, fill) {}

  static Matrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * dim_, dim_};
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

class ChainModel;

// Homogeneous first-order Markov model. Transitions are stored row = current
// symbol, column = next symbol: t(x, y) = P(X_{k+1} = y | X_k = x).
class MarkovModel {
 public:
  MarkovModel(Alphabet alphabet, std::vector<double> p0, Matrix t);

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<double>& p0() const { return p0_; }
  const Matrix& t() const { return t_; }

  // The position-indexed view of this model for sequences of length n.
  ChainModel unroll(std::size_t n) const;

 private:
  Alphabet alphabet_;
  std::vector<double> p0_;
  Matrix t_;
};

// Markov chain of fixed length with one transition matrix per step. The
// homogeneous model is the special case where every step is the same matrix;
// the CSP unwrap produces genuinely inhomogeneous chains.
class ChainModel {
 public:
  ChainModel(Alphabet alphabet, std::vector<double> p0, std::vector<Matrix> steps);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t length() const { return steps_.size() + 1; }
  std::size_t alphabet_size() const { return alphabet_.size(); }
  const std::vector<double>& p0() const { return p0_; }
  // Transition from 0-based position t to t + 1.
  const Matrix& step(std::size_t t) const { return steps_.at(t); }
  const std::vector<Matrix>& steps() const { return steps_; }

  // P(X_t = x) for every 0-based position.
  std::vector<std::vector<double>> position_marginals() const;

  // Product of the step matrices from position a to position b (a <= b).
  Matrix segment(std::size_t a, std::size_t b) const;

 private:
  Alphabet alphabet_;
  std::vector<double> p0_;
  std::vector<Matrix> steps_;
};

void validate_word(const Alphabet& alphabet, const Word& w);

double sequence_probability(const MarkovModel& model, const Word& w);
double sequence_probability(const ChainModel& chain, const Word& w);

// Calls visit(word, probability) for every word of the chain's length.
// Refuses when |A|^n exceeds the limit.
void enumerate_words(const ChainModel& chain,
                     const std::function<void(const Word&, double)>& visit,
                     std::uint64_t limit = kDefaultEnumerationLimit);

double oracle_partition(const MarkovModel& model, std::size_t n, const Predicate& pred,
                        std::uint64_t limit = kDefaultEnumerationLimit);
double oracle_partition(const ChainModel& chain, const Predicate& pred,
                        std::uint64_t limit = kDefaultEnumerationLimit);

// entry[t][a] = P(X_t = a | pred), t 0-based.
std::vector<std::vector<double>> oracle_marginals(
    const MarkovModel& model, std::size_t n, const Predicate& pred,
    std::uint64_t limit = kDefaultEnumerationLimit);

// Exact conditional distribution P(w | pred) over the words with positive mass.
std::vector<std::pair<Word, double>> oracle_conditional(
    const ChainModel& chain, const Predicate& pred,
    std::uint64_t limit = kDefaultEnumerationLimit);

Word sample_unconstrained(const ChainModel& chain, Rng& rng);

std::optional<Word> rejection_sample(const MarkovModel& model, std::size_t n,
                                     const Predicate& pred, std::size_t max_tries,
                                     Rng& rng);

}  // namespace cmseq
