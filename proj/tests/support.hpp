#pragma once

// Fixtures and hand-rolled generators shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cmseq/equality.hpp"
#include "cmseq/grammar.hpp"
#include "cmseq/io.hpp"
#include "cmseq/markov.hpp"
#include "cmseq/reductions.hpp"

namespace testing {

using namespace cmseq;

inline Matrix matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows.size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

inline MarkovModel uniform_model(std::vector<std::string> symbols) {
  const std::size_t a = symbols.size();
  const double p = 1.0 / static_cast<double>(a);
  return MarkovModel(Alphabet(std::move(symbols)), std::vector<double>(a, p), Matrix(a, p));
}

// M_u over {a, b}.
inline MarkovModel m_u() { return uniform_model({"a", "b"}); }

// M_d: starts at a and alternates deterministically.
inline MarkovModel m_d() {
  return MarkovModel(Alphabet({"a", "b"}), {1.0, 0.0}, matrix({{0.0, 1.0}, {1.0, 0.0}}));
}

inline std::vector<double> random_distribution(std::size_t a, Rng& rng, double zero_chance = 0.0) {
  std::vector<double> p(a);
  double total = 0.0;
  for (auto& v : p) {
    v = uniform01(rng) < zero_chance ? 0.0 : 0.05 + uniform01(rng);
    total += v;
  }
  if (total == 0.0) {
    p[0] = total = 1.0;
  }
  for (auto& v : p) v /= total;
  return p;
}

inline Alphabet letters(std::size_t a) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < a; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  return Alphabet(names);
}

// Dense random model, optionally with some structural zeros.
inline MarkovModel random_model(std::size_t a, Rng& rng, double zero_chance = 0.0) {
  Matrix t(a);
  for (std::size_t x = 0; x < a; ++x) {
    const auto row = random_distribution(a, rng, zero_chance);
    for (std::size_t y = 0; y < a; ++y) t(x, y) = row[y];
  }
  return MarkovModel(letters(a), random_distribution(a, rng, zero_chance), t);
}

inline ChainModel random_chain(std::size_t a, std::size_t n, Rng& rng) {
  std::vector<Matrix> steps;
  for (std::size_t s = 0; s + 1 < n; ++s) steps.push_back(random_model(a, rng, 0.2).t());
  return ChainModel(letters(a), random_distribution(a, rng), steps);
}

inline std::size_t pick(std::size_t lo, std::size_t hi, Rng& rng) {
  return lo + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

inline std::vector<Symbol> random_permutation(std::size_t a, Rng& rng) {
  std::vector<Symbol> sigma(a);
  for (std::size_t i = 0; i < a; ++i) sigma[i] = static_cast<Symbol>(i);
  for (std::size_t i = a; i > 1; --i) std::swap(sigma[i - 1], sigma[pick(0, i - 1, rng)]);
  return sigma;
}

inline EqualityConstraint random_constraint(std::size_t i, std::size_t j, std::size_t a, Rng& rng) {
  EqualityConstraint c{i, j, {}};
  if (uniform01(rng) < 0.5) c.sigma = random_permutation(a, rng);
  return c;
}

// Disjoint intervals [i_k, j_k] in increasing order.
inline EqualitySet random_noncrossing(std::size_t n, std::size_t a, Rng& rng) {
  std::vector<EqualityConstraint> cs;
  std::size_t next = 1;
  while (next < n) {
    const std::size_t i = pick(next, n - 1, rng);
    const std::size_t j = pick(i + 1, std::min(n, i + 3), rng);
    cs.push_back(random_constraint(i, j, a, rng));
    next = j + 1;
    if (uniform01(rng) < 0.3) break;
  }
  return EqualitySet(n, cs);
}

// X_{i_k} tied to X_{j_k}: a block of positions copied (up to sigma) into a
// later block in the same order.
inline EqualitySet random_repeated(std::size_t n, std::size_t a, Rng& rng) {
  const std::size_t k = pick(1, n / 2, rng);
  std::vector<std::size_t> pos;
  for (std::size_t p = 1; p <= n; ++p) pos.push_back(p);
  for (std::size_t p = n; p > 1; --p) std::swap(pos[p - 1], pos[pick(0, p - 1, rng)]);
  pos.resize(2 * k);
  std::sort(pos.begin(), pos.end());
  std::vector<EqualityConstraint> cs;
  for (std::size_t m = 0; m < k; ++m) cs.push_back(random_constraint(pos[m], pos[k + m], a, rng));
  return EqualitySet(n, cs);
}

// Nested pairs i_1 < i_2 < ... < i_K < j_K < ... < j_1.
inline EqualitySet random_palindromic(std::size_t n, std::size_t a, Rng& rng) {
  const std::size_t k = pick(1, n / 2, rng);
  std::vector<std::size_t> pos;
  for (std::size_t p = 1; p <= n; ++p) pos.push_back(p);
  for (std::size_t p = n; p > 1; --p) std::swap(pos[p - 1], pos[pick(0, p - 1, rng)]);
  pos.resize(2 * k);
  std::sort(pos.begin(), pos.end());
  std::vector<EqualityConstraint> cs;
  for (std::size_t m = 0; m < k; ++m) cs.push_back(random_constraint(pos[m], pos[2 * k - 1 - m], a, rng));
  return EqualitySet(n, cs);
}

inline bool close_rel(double got, double want, double rel, double abs_floor = 1e-15) {
  return std::abs(got - want) <= rel * std::max(std::abs(want), abs_floor) + abs_floor;
}

// Total variation between empirical frequencies and an exact distribution.
inline double tv_distance(const std::map<Word, std::size_t>& counts, std::size_t total,
                          const std::vector<std::pair<Word, double>>& exact) {
  double tv = 0.0;
  std::map<Word, double> want(exact.begin(), exact.end());
  for (const auto& [w, p] : want) {
    const auto it = counts.find(w);
    const double f = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
    tv += std::abs(f - p);
  }
  for (const auto& [w, c] : counts) {
    if (!want.count(w)) tv += static_cast<double>(c) / static_cast<double>(total);
  }
  return tv / 2.0;
}

inline CnfGrammar parse_grammar(const std::string& text) { return to_cnf(io::grammar_from_text(text)); }

inline const char* kDyck =
    "D -> P D | A B | A Q\n"
    "P -> A B | A Q\n"
    "Q -> D B\n"
    "A -> '('\n"
    "B -> ')'\n";

inline MarkovModel dyck_model() { return uniform_model({"(", ")"}); }

inline CnfGrammar dyck_grammar() { return parse_grammar(kDyck).with_terminals(dyck_model().alphabet()); }

// Random CNF grammar over `a` terminals with up to `nv` nonterminals; retries
// until the language is nonempty.
inline CnfGrammar random_grammar(std::size_t nv, std::size_t a, Rng& rng) {
  for (;;) {
    std::vector<std::string> names;
    for (std::size_t v = 0; v < nv; ++v) names.push_back(std::string(1, static_cast<char>('S' + v)));
    std::vector<BinaryRule> binary;
    std::vector<TerminalRule> terminal;
    for (Nonterminal v = 0; v < nv; ++v) {
      for (Nonterminal l = 0; l < nv; ++l) {
        for (Nonterminal r = 0; r < nv; ++r) {
          if (uniform01(rng) < 0.15) binary.push_back({v, l, r});
        }
      }
      for (Symbol x = 0; x < a; ++x) {
        if (uniform01(rng) < 0.35) terminal.push_back({v, x});
      }
    }
    try {
      return CnfGrammar(names, letters(a), binary, terminal, 0).with_terminals(letters(a));
    } catch (const Error&) {
    }
  }
}

inline TwoSatFormula random_formula(std::size_t n, std::size_t k, Rng& rng) {
  TwoSatFormula phi;
  phi.num_vars = n;
  for (std::size_t c = 0; c < k; ++c) {
    std::array<Literal, 2> clause;
    for (auto& lit : clause) lit = {pick(1, n, rng), uniform01(rng) < 0.5};
    phi.clauses.push_back(clause);
  }
  return phi;
}

// Connected CSP: a random spanning tree plus extra random edges.
inline BinaryCsp random_csp(std::size_t vars, std::size_t max_edges, std::size_t a, Rng& rng) {
  BinaryCsp csp;
  csp.domain = letters(a);
  csp.num_vars = vars;
  auto random_factor = [&] {
    std::vector<std::vector<std::uint8_t>> f(a, std::vector<std::uint8_t>(a));
    for (auto& row : f) {
      for (auto& v : row) v = uniform01(rng) < 0.6 ? 1 : 0;
    }
    return f;
  };
  for (std::size_t v = 1; v < vars; ++v) csp.edges.push_back({pick(0, v - 1, rng), v, random_factor(), false});
  while (csp.edges.size() < max_edges && uniform01(rng) < 0.7) {
    const std::size_t u = pick(0, vars - 1, rng);
    const std::size_t v = pick(0, vars - 1, rng);
    if (u != v) csp.edges.push_back({u, v, random_factor(), false});
  }
  return csp;
}

}  // namespace testing
