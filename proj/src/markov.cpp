#include "cmseq/markov.hpp"

#include <cmath>

namespace cmseq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kRefused: return "refused";
    case ErrorCode::kNullEvent: return "null_event";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kUnsupportedTopology: return "unsupported_topology";
    case ErrorCode::kEmptyLanguage: return "empty_language";
    case ErrorCode::kAlphabetMismatch: return "alphabet_mismatch";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kNoParse: return "no_parse";
    case ErrorCode::kDisconnected: return "disconnected";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

namespace {

constexpr double kStochasticTolerance = 1e-9;

void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kDomain, what + " has an entry outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw Error(ErrorCode::kDomain, what + " does not sum to 1");
  }
}

std::uint64_t checked_power(std::uint64_t base, std::size_t exp, std::uint64_t limit) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && total > limit / base) {
      throw Error(ErrorCode::kRefused,
                  "enumeration of " + std::to_string(base) + "^" + std::to_string(exp) +
                      " words exceeds the limit of " + std::to_string(limit));
    }
    total *= base;
  }
  if (total > limit) {
    throw Error(ErrorCode::kRefused, "enumeration exceeds the limit of " +
                                         std::to_string(limit));
  }
  return total;
}

}  // namespace

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kNullEvent, "cannot sample from zero total weight");
  }
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  // Round-off pushed target past the accumulated sum.
  return last_positive;
}

Alphabet::Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  if (symbols_.empty()) throw Error(ErrorCode::kDomain, "alphabet must be non-empty");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], static_cast<Symbol>(i)).second) {
      throw Error(ErrorCode::kDomain, "duplicate alphabet symbol '" + symbols_[i] + "'");
    }
  }
}

Symbol Alphabet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(ErrorCode::kDomain, "symbol '" + name + "' is not in the alphabet");
  }
  return it->second;
}

Word Alphabet::parse_word(const std::vector<std::string>& names) const {
  Word w;
  w.reserve(names.size());
  for (const auto& n : names) w.push_back(index_of(n));
  return w;
}

std::vector<std::string> Alphabet::render(const Word& w) const {
  std::vector<std::string> out;
  out.reserve(w.size());
  for (Symbol s : w) out.push_back(name(s));
  return out;
}

std::string Alphabet::to_string(const Word& w) const {
  std::string out;
  for (Symbol s : w) out += name(s);
  return out;
}

Word Alphabet::word_from_chars(std::string_view chars) const {
  Word w;
  for (char c : chars) w.push_back(index_of(std::string(1, c)));
  return w;
}

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  const std::size_t d = a.dim();
  Matrix out(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

MarkovModel::MarkovModel(Alphabet alphabet, std::vector<double> p0, Matrix t)
    : alphabet_(std::move(alphabet)), p0_(std::move(p0)), t_(std::move(t)) {
  const std::size_t a = alphabet_.size();
  if (p0_.size() != a || t_.dim() != a) {
    throw Error(ErrorCode::kDomain, "model dimensions do not match the alphabet");
  }
  check_distribution(p0_, "p0");
  for (std::size_t x = 0; x < a; ++x) {
    check_distribution(t_.row(x), "transition row " + alphabet_.name(x));
  }
}

ChainModel MarkovModel::unroll(std::size_t n) const {
  if (n == 0) throw Error(ErrorCode::kDomain, "sequence length must be at least 1");
  return ChainModel(alphabet_, p0_, std::vector<Matrix>(n - 1, t_));
}

ChainModel::ChainModel(Alphabet alphabet, std::vector<double> p0, std::vector<Matrix> steps)
    : alphabet_(std::move(alphabet)), p0_(std::move(p0)), steps_(std::move(steps)) {
  const std::size_t a = alphabet_.size();
  if (p0_.size() != a) throw Error(ErrorCode::kDomain, "p0 size does not match alphabet");
  check_distribution(p0_, "p0");
  for (std::size_t t = 0; t < steps_.size(); ++t) {
    if (steps_[t].dim() != a) {
      throw Error(ErrorCode::kDomain, "step matrix size does not match alphabet");
    }
    for (std::size_t x = 0; x < a; ++x) {
      check_distribution(steps_[t].row(x), "step " + std::to_string(t) + " row");
    }
  }
}

std::vector<std::vector<double>> ChainModel::position_marginals() const {
  const std::size_t a = alphabet_size();
  std::vector<std::vector<double>> out(length(), std::vector<double>(a, 0.0));
  out[0] = p0_;
  for (std::size_t t = 0; t + 1 < length(); ++t) {
    for (std::size_t x = 0; x < a; ++x) {
      const double px = out[t][x];
      if (px == 0.0) continue;
      for (std::size_t y = 0; y < a; ++y) out[t + 1][y] += px * steps_[t](x, y);
    }
  }
  return out;
}

Matrix ChainModel::segment(std::size_t a, std::size_t b) const {
  Matrix m = Matrix::identity(alphabet_size());
  for (std::size_t t = a; t < b; ++t) m = m * steps_[t];
  return m;
}

void validate_word(const Alphabet& alphabet, const Word& w) {
  if (w.empty()) throw Error(ErrorCode::kDomain, "word must be non-empty");
  for (Symbol s : w) {
    if (s >= alphabet.size()) {
      throw Error(ErrorCode::kDomain, "symbol index " + std::to_string(s) + " out of range");
    }
  }
}

double sequence_probability(const MarkovModel& model, const Word& w) {
  validate_word(model.alphabet(), w);
  double p = model.p0()[w[0]];
  for (std::size_t k = 1; k < w.size() && p != 0.0; ++k) p *= model.t()(w[k - 1], w[k]);
  return p;
}

double sequence_probability(const ChainModel& chain, const Word& w) {
  validate_word(chain.alphabet(), w);
  if (w.size() != chain.length()) {
    throw Error(ErrorCode::kDomain, "word length does not match the chain length");
  }
  double p = chain.p0()[w[0]];
  for (std::size_t k = 1; k < w.size() && p != 0.0; ++k) p *= chain.step(k - 1)(w[k - 1], w[k]);
  return p;
}

void enumerate_words(const ChainModel& chain,
                     const std::function<void(const Word&, double)>& visit,
                     std::uint64_t limit) {
  const std::size_t n = chain.length();
  const std::size_t a = chain.alphabet_size();
  checked_power(a, n, limit);
  // Odometer over A^n with prefix products so each word costs O(1) amortized.
  Word w(n, 0);
  std::vector<double> prefix(n);
  auto refresh = [&](std::size_t from) {
    for (std::size_t k = from; k < n; ++k) {
      prefix[k] = k == 0 ? chain.p0()[w[0]] : prefix[k - 1] * chain.step(k - 1)(w[k - 1], w[k]);
    }
  };
  refresh(0);
  while (true) {
    visit(w, prefix[n - 1]);
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++w[pos] < a) break;
      w[pos] = 0;
      if (pos == 0) return;
    }
    refresh(pos);
  }
}

double oracle_partition(const ChainModel& chain, const Predicate& pred, std::uint64_t limit) {
  double z = 0.0;
  enumerate_words(chain, [&](const Word& w, double p) {
    if (p != 0.0 && pred(w)) z += p;
  }, limit);
  return z;
}

double oracle_partition(const MarkovModel& model, std::size_t n, const Predicate& pred,
                        std::uint64_t limit) {
  return oracle_partition(model.unroll(n), pred, limit);
}

std::vector<std::vector<double>> oracle_marginals(const MarkovModel& model, std::size_t n,
                                                  const Predicate& pred,
                                                  std::uint64_t limit) {
  const std::size_t a = model.alphabet().size();
  std::vector<std::vector<double>> table(n, std::vector<double>(a, 0.0));
  double z = 0.0;
  enumerate_words(model.unroll(n), [&](const Word& w, double p) {
    if (p == 0.0 || !pred(w)) return;
    z += p;
    for (std::size_t t = 0; t < n; ++t) table[t][w[t]] += p;
  }, limit);
  if (!(z > 0.0)) {
    throw Error(ErrorCode::kNullEvent, "predicate has zero probability under the model");
  }
  for (auto& row : table) {
    for (double& v : row) v /= z;
  }
  return table;
}

std::vector<std::pair<Word, double>> oracle_conditional(const ChainModel& chain,
                                                        const Predicate& pred,
                                                        std::uint64_t limit) {
  std::vector<std::pair<Word, double>> out;
  double z = 0.0;
  enumerate_words(chain, [&](const Word& w, double p) {
    if (p == 0.0 || !pred(w)) return;
    out.emplace_back(w, p);
    z += p;
  }, limit);
  if (!(z > 0.0)) {
    throw Error(ErrorCode::kNullEvent, "predicate has zero probability under the model");
  }
  for (auto& [w, p] : out) p /= z;
  return out;
}

Word sample_unconstrained(const ChainModel& chain, Rng& rng) {
  Word w(chain.length());
  w[0] = static_cast<Symbol>(sample_index(chain.p0(), rng));
  for (std::size_t k = 1; k < w.size(); ++k) {
    w[k] = static_cast<Symbol>(sample_index(chain.step(k - 1).row(w[k - 1]), rng));
  }
  return w;
}

std::optional<Word> rejection_sample(const MarkovModel& model, std::size_t n,
                                     const Predicate& pred, std::size_t max_tries,
                                     Rng& rng) {
  if (max_tries == 0) throw Error(ErrorCode::kDomain, "max_tries must be at least 1");
  const ChainModel chain = model.unroll(n);
  for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
    Word w = sample_unconstrained(chain, rng);
    if (pred(w)) return w;
  }
  return std::nullopt;
}

}  // namespace cmseq
