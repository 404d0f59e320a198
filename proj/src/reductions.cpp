#include "cmseq/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace cmseq {

namespace {

std::uint64_t guarded_power(std::uint64_t base, std::size_t exp, std::uint64_t limit,
                            const std::string& what) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && total > limit / base) {
      throw Error(ErrorCode::kRefused, what + " would enumerate more than " +
                                           std::to_string(limit) + " assignments");
    }
    total *= base;
  }
  return total;
}

}  // namespace

void TwoSatFormula::validate() const {
  if (num_vars == 0) throw Error(ErrorCode::kDomain, "formula needs at least one variable");
  for (std::size_t k = 0; k < clauses.size(); ++k) {
    for (const auto& lit : clauses[k]) {
      if (lit.var < 1 || lit.var > num_vars) {
        throw Error(ErrorCode::kDomain, "clause " + std::to_string(k + 1) + " uses variable " +
                                            std::to_string(lit.var) + " outside 1.." +
                                            std::to_string(num_vars));
      }
    }
  }
}

bool TwoSatFormula::satisfied_by(const std::vector<std::uint8_t>& assignment) const {
  return std::all_of(clauses.begin(), clauses.end(), [&](const auto& clause) {
    return std::any_of(clause.begin(), clause.end(), [&](const Literal& l) {
      return (assignment[l.var - 1] != 0) == l.positive;
    });
  });
}

void Nfa::validate() const {
  if (initial >= num_states) throw Error(ErrorCode::kDomain, "initial state out of range");
  for (NfaState s : accepting) {
    if (s >= num_states) throw Error(ErrorCode::kDomain, "accepting state out of range");
  }
  for (const auto& t : transitions) {
    if (t.from >= num_states || t.to >= num_states || t.label > 1) {
      throw Error(ErrorCode::kDomain, "transition references a missing state or label");
    }
  }
}

bool Nfa::accepts(const std::vector<std::uint8_t>& input) const {
  std::vector<bool> current(num_states, false);
  current[initial] = true;
  for (std::uint8_t c : input) {
    std::vector<bool> next(num_states, false);
    for (const auto& t : transitions) {
      if (current[t.from] && t.label == c) next[t.to] = true;
    }
    current = std::move(next);
  }
  return std::any_of(accepting.begin(), accepting.end(), [&](NfaState s) { return current[s]; });
}

std::string Nfa::to_dot() const {
  std::ostringstream out;
  out << "digraph nfa {\n  rankdir=LR;\n  start [shape=point];\n";
  for (std::size_t s = 0; s < num_states; ++s) {
    const bool acc = std::find(accepting.begin(), accepting.end(), s) != accepting.end();
    out << "  q" << s << " [shape=" << (acc ? "doublecircle" : "circle") << "];\n";
  }
  out << "  start -> q" << initial << ";\n";
  for (const auto& t : transitions) {
    out << "  q" << t.from << " -> q" << t.to << " [label=\"" << int(t.label) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

Nfa build_falsifying_nfa(const TwoSatFormula& phi) {
  phi.validate();
  const std::size_t n = phi.num_vars;
  Nfa nfa;
  nfa.num_states = 1 + n * phi.clauses.size();
  nfa.initial = 0;
  for (std::size_t k = 0; k < phi.clauses.size(); ++k) {
    auto state = [&](std::size_t i) { return static_cast<NfaState>(1 + k * n + (i - 1)); };
    for (std::size_t i = 1; i <= n; ++i) {
      bool need_zero = false;
      bool need_one = false;
      for (const auto& lit : phi.clauses[k]) {
        if (lit.var != i) continue;
        (lit.positive ? need_zero : need_one) = true;
      }
      const NfaState from = i == 1 ? nfa.initial : state(i - 1);
      for (std::uint8_t label : {0, 1}) {
        const bool allowed = need_zero || need_one ? (label == 0 ? need_zero && !need_one
                                                                 : need_one && !need_zero)
                                                   : true;
        if (allowed) nfa.transitions.push_back({from, label, state(i)});
      }
    }
    nfa.accepting.push_back(state(n));
  }
  return nfa;
}

BigCount count_accepted(const Nfa& nfa, std::size_t n, std::uint64_t max_subsets) {
  nfa.validate();
  std::vector<std::array<std::vector<NfaState>, 2>> out(nfa.num_states);
  for (const auto& t : nfa.transitions) out[t.from][t.label].push_back(t.to);
  std::vector<bool> accepting(nfa.num_states, false);
  for (NfaState s : nfa.accepting) accepting[s] = true;

  // Subsets of NFA states reached so far, each with the number of distinct
  // strings leading to it. Distinct subsets partition the strings, so adding
  // counts never double-counts a string.
  using Subset = std::vector<NfaState>;
  std::map<Subset, BigCount> layer{{Subset{nfa.initial}, 1}};
  std::set<Subset> seen{Subset{nfa.initial}};
  for (std::size_t step = 0; step < n; ++step) {
    std::map<Subset, BigCount> next;
    for (const auto& [subset, count] : layer) {
      for (int label = 0; label < 2; ++label) {
        Subset succ;
        for (NfaState s : subset) {
          const auto& targets = out[s][label];
          succ.insert(succ.end(), targets.begin(), targets.end());
        }
        if (succ.empty()) continue;
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        if (seen.insert(succ).second && seen.size() > max_subsets) {
          throw Error(ErrorCode::kRefused, "subset construction exceeded " +
                                               std::to_string(max_subsets) + " subsets");
        }
        next[std::move(succ)] += count;
      }
    }
    layer = std::move(next);
  }
  BigCount total = 0;
  for (const auto& [subset, count] : layer) {
    if (std::any_of(subset.begin(), subset.end(), [&](NfaState s) { return accepting[s]; })) {
      total += count;
    }
  }
  return total;
}

BigCount count_sat(const TwoSatFormula& phi, std::uint64_t max_subsets) {
  const BigCount all = BigCount(1) << phi.num_vars;
  return all - count_accepted(build_falsifying_nfa(phi), phi.num_vars, max_subsets);
}

BigCount brute_force_count_sat(const TwoSatFormula& phi) {
  phi.validate();
  const std::uint64_t total = guarded_power(2, phi.num_vars, kDefaultEnumerationLimit, "brute force");
  BigCount count = 0;
  std::vector<std::uint8_t> assignment(phi.num_vars);
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    for (std::size_t i = 0; i < phi.num_vars; ++i) assignment[i] = (bits >> i) & 1u;
    if (phi.satisfied_by(assignment)) ++count;
  }
  return count;
}

void BinaryCsp::validate() const {
  const std::size_t a = domain.size();
  if (a == 0) throw Error(ErrorCode::kDomain, "CSP domain is empty");
  if (num_vars == 0) throw Error(ErrorCode::kDomain, "CSP has no variables");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& edge = edges[e];
    const std::string where = "edge " + std::to_string(e);
    if (edge.u >= num_vars || edge.v >= num_vars) throw Error(ErrorCode::kDomain, where + " references a missing variable");
    if (edge.u == edge.v) throw Error(ErrorCode::kDomain, where + " is a self-loop");
    if (edge.factor.size() != a) throw Error(ErrorCode::kDomain, where + " factor has the wrong shape");
    for (const auto& row : edge.factor) {
      if (row.size() != a) throw Error(ErrorCode::kDomain, where + " factor has the wrong shape");
      for (auto f : row) {
        if (f > 1) throw Error(ErrorCode::kDomain, where + " factor entries must be 0 or 1");
      }
    }
  }
}

std::vector<std::size_t> BinaryCsp::degrees() const {
  std::vector<std::size_t> deg(num_vars, 0);
  for (const auto& e : edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

bool BinaryCsp::connected() const {
  if (num_vars == 0) return false;
  std::vector<std::size_t> parent(num_vars);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = num_vars;
  for (const auto& e : edges) {
    const auto a = find(e.u);
    const auto b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

bool BinaryCsp::satisfied_by(const Word& assignment) const {
  return std::all_of(edges.begin(), edges.end(), [&](const CspEdge& e) {
    return e.factor[assignment[e.u]][assignment[e.v]] != 0;
  });
}

namespace {

void require_connected(const BinaryCsp& csp) {
  csp.validate();
  if (!csp.connected()) {
    throw Error(ErrorCode::kDisconnected, "factor graph is disconnected; reduce each component separately");
  }
}

std::vector<std::size_t> odd_vertices(const BinaryCsp& csp) {
  std::vector<std::size_t> odd;
  const auto deg = csp.degrees();
  for (std::size_t v = 0; v < deg.size(); ++v) {
    if (deg[v] % 2 == 1) odd.push_back(v);
  }
  return odd;
}

}  // namespace

BinaryCsp eulerize(const BinaryCsp& csp) {
  require_connected(csp);
  BinaryCsp out = csp;
  const auto odd = odd_vertices(csp);
  const std::size_t a = csp.domain.size();
  for (std::size_t i = 2; i + 1 < odd.size(); i += 2) {
    CspEdge dummy;
    dummy.u = odd[i];
    dummy.v = odd[i + 1];
    dummy.factor.assign(a, std::vector<std::uint8_t>(a, 1));
    dummy.dummy = true;
    out.edges.push_back(std::move(dummy));
  }
  return out;
}

EulerianTrail eulerian_trail(const BinaryCsp& csp) {
  require_connected(csp);
  const auto odd = odd_vertices(csp);
  if (odd.size() > 2) {
    throw Error(ErrorCode::kPrecondition, std::to_string(odd.size()) +
                                              " odd-degree vertices; eulerize the CSP first");
  }
  std::vector<std::vector<std::size_t>> incident(csp.num_vars);
  for (std::size_t e = 0; e < csp.edges.size(); ++e) {
    incident[csp.edges[e].u].push_back(e);
    incident[csp.edges[e].v].push_back(e);
  }
  std::vector<bool> used(csp.edges.size(), false);
  std::vector<std::size_t> next(csp.num_vars, 0);

  // Stack entries are (vertex, edge used to enter it).
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::pair<std::size_t, std::size_t>> stack{{odd.empty() ? 0 : odd[0], kNone}};
  std::vector<std::pair<std::size_t, std::size_t>> popped;
  while (!stack.empty()) {
    const std::size_t v = stack.back().first;
    auto& cursor = next[v];
    while (cursor < incident[v].size() && used[incident[v][cursor]]) ++cursor;
    if (cursor == incident[v].size()) {
      popped.push_back(stack.back());
      stack.pop_back();
      continue;
    }
    const std::size_t e = incident[v][cursor];
    used[e] = true;
    stack.emplace_back(csp.edges[e].u == v ? csp.edges[e].v : csp.edges[e].u, e);
  }
  std::reverse(popped.begin(), popped.end());
  EulerianTrail trail;
  for (const auto& [v, e] : popped) {
    trail.vertices.push_back(v);
    if (e != kNone) trail.edges.push_back(e);
  }
  return trail;
}

std::vector<std::size_t> eulerian_path(const BinaryCsp& csp) { return eulerian_trail(csp).vertices; }

double UnwrapResult::weight(const Word& word) const {
  double w = sequence_probability(model, word) * p0_scale;
  for (std::size_t t = 0; t < row_weights.size(); ++t) w *= row_weights[t][word[t]];
  return w;
}

Word UnwrapResult::assignment(const Word& word) const {
  Word out(eulerized.num_vars, 0);
  std::vector<bool> set(eulerized.num_vars, false);
  for (std::size_t p = 0; p < vertex_map.size(); ++p) {
    if (!set[vertex_map[p]]) {
      out[vertex_map[p]] = word[p];
      set[vertex_map[p]] = true;
    }
  }
  return out;
}

UnwrapResult unwrap_csp(const BinaryCsp& csp) {
  BinaryCsp g = eulerize(csp);
  const EulerianTrail trail = eulerian_trail(g);
  const std::size_t a = g.domain.size();
  const std::size_t m = trail.edges.size();

  std::vector<Matrix> steps;
  std::vector<std::vector<double>> row_weights;
  std::vector<std::vector<Symbol>> dead(m);
  for (std::size_t t = 0; t < m; ++t) {
    const CspEdge& e = g.edges[trail.edges[t]];
    const bool forward = e.u == trail.vertices[t];
    Matrix step(a);
    std::vector<double> r(a, 0.0);
    for (Symbol x = 0; x < a; ++x) {
      for (Symbol y = 0; y < a; ++y) r[x] += forward ? e.factor[x][y] : e.factor[y][x];
      for (Symbol y = 0; y < a; ++y) {
        const double f = forward ? e.factor[x][y] : e.factor[y][x];
        step(x, y) = r[x] > 0.0 ? f / r[x] : 1.0 / static_cast<double>(a);
      }
      if (r[x] == 0.0) dead[t].push_back(x);
    }
    steps.push_back(std::move(step));
    row_weights.push_back(std::move(r));
  }

  std::vector<EqualityConstraint> constraints;
  std::vector<std::size_t> last(g.num_vars, 0);
  for (std::size_t p = 0; p < trail.vertices.size(); ++p) {
    const std::size_t v = trail.vertices[p];
    if (last[v] != 0) constraints.push_back({last[v], p + 1, {}});
    last[v] = p + 1;
  }

  const std::vector<double> p0(a, 1.0 / static_cast<double>(a));
  const std::size_t length = trail.vertices.size();
  return UnwrapResult{ChainModel(g.domain, p0, std::move(steps)),
                      EqualitySet(length, std::move(constraints)),
                      std::move(row_weights),
                      static_cast<double>(a),
                      trail.vertices,
                      trail.edges,
                      std::move(g),
                      std::move(dead)};
}

BigCount brute_force_count_csp(const BinaryCsp& csp, std::uint64_t limit) {
  csp.validate();
  const std::uint64_t total = guarded_power(csp.domain.size(), csp.num_vars, limit, "CSP brute force");
  const std::size_t a = csp.domain.size();
  BigCount count = 0;
  Word assignment(csp.num_vars, 0);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    for (std::size_t i = 0; i < csp.num_vars; ++i) {
      assignment[i] = static_cast<Symbol>(rest % a);
      rest /= a;
    }
    if (csp.satisfied_by(assignment)) ++count;
  }
  return count;
}

ReductionReport verify_reduction(const BinaryCsp& csp, std::uint64_t limit) {
  const UnwrapResult u = unwrap_csp(csp);
  ReductionReport report;
  report.csp_solutions = brute_force_count_csp(csp, limit);

  std::map<Word, std::size_t> images;
  bool all_valid = true;
  enumerate_words(
      u.model,
      [&](const Word& w, double) {
        if (!u.equalities.satisfied_by(w)) return;
        const double weight = u.weight(w);
        if (weight <= 0.0) return;
        report.weighted_chain_count += weight;
        const Word assignment = u.assignment(w);
        if (!csp.satisfied_by(assignment)) all_valid = false;
        ++images[assignment];
      },
      limit);

  const double rounded = std::round(report.weighted_chain_count);
  report.chain_count = BigCount(static_cast<std::uint64_t>(rounded));
  report.integral = std::abs(report.weighted_chain_count - rounded) <= 1e-6 * std::max(1.0, rounded);
  report.bijection = all_valid && BigCount(images.size()) == report.csp_solutions &&
                     std::all_of(images.begin(), images.end(), [](const auto& kv) { return kv.second == 1; });
  report.passed = report.integral && report.bijection && report.chain_count == report.csp_solutions;

  std::ostringstream detail;
  detail << "csp solutions " << report.csp_solutions << ", weighted chain count "
         << report.weighted_chain_count << (report.bijection ? ", support bijection holds"
                                                             : ", support bijection fails");
  report.detail = detail.str();
  return report;
}

}  // namespace cmseq
