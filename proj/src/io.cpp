#include "cmseq/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace cmseq::io {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::kParse, what); }

template <typename T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) parse_error(where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    parse_error(where + ": field \"" + key + "\" has the wrong type");
  }
}

Matrix matrix_from(const std::vector<std::vector<double>>& rows, const std::string& where) {
  Matrix m(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) parse_error(where + ": matrix is not square");
    for (std::size_t c = 0; c < rows.size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.dim(); ++r) {
    Json row = Json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json parse_json(std::string_view text, const std::string& source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    parse_error(source + ": " + e.what());
  }
}

MarkovModel model_from_json(const Json& j) {
  const auto alphabet = field<std::vector<std::string>>(j, "alphabet", "model");
  const auto p0 = field<std::vector<double>>(j, "p0", "model");
  const auto t = field<std::vector<std::vector<double>>>(j, "t", "model");
  return MarkovModel(Alphabet(alphabet), p0, matrix_from(t, "model.t"));
}

Json to_json(const MarkovModel& m) {
  return Json{{"alphabet", m.alphabet().symbols()}, {"p0", m.p0()}, {"t", matrix_json(m.t())}};
}

Json to_json(const ChainModel& c) {
  Json steps = Json::array();
  for (const auto& s : c.steps()) steps.push_back(matrix_json(s));
  return Json{{"alphabet", c.alphabet().symbols()}, {"p0", c.p0()}, {"steps", std::move(steps)}};
}

Json word_to_json(const Alphabet& alphabet, const Word& w) { return Json(alphabet.render(w)); }

Word word_from_json(const Alphabet& alphabet, const Json& j) {
  if (!j.is_array()) parse_error("word must be an array of symbol names");
  try {
    return alphabet.parse_word(j.get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception&) {
    parse_error("word must be an array of symbol names");
  }
}

EqualitySet equalities_from_json(const Json& j, const Alphabet* alphabet) {
  const auto n = field<std::size_t>(j, "n", "equalities");
  if (!j.contains("constraints") || !j["constraints"].is_array()) {
    parse_error("equalities: missing \"constraints\" array");
  }
  std::vector<EqualityConstraint> constraints;
  for (std::size_t k = 0; k < j["constraints"].size(); ++k) {
    const Json& c = j["constraints"][k];
    const std::string where = "equalities.constraints[" + std::to_string(k) + "]";
    EqualityConstraint e;
    e.i = field<std::size_t>(c, "i", where);
    e.j = field<std::size_t>(c, "j", where);
    if (c.contains("sigma") && !c["sigma"].is_null()) {
      const auto names = field<std::vector<std::string>>(c, "sigma", where);
      if (alphabet != nullptr) {
        if (names.size() != alphabet->size()) {
          throw Error(ErrorCode::kDomain, where + ": sigma must list one image per symbol");
        }
        for (const auto& name : names) e.sigma.push_back(alphabet->index_of(name));
      }
    }
    constraints.push_back(std::move(e));
  }
  EqualitySet set(n, std::move(constraints));
  if (alphabet != nullptr) set.validate(alphabet->size());
  return set;
}

Json to_json(const EqualitySet& s, const Alphabet& alphabet) {
  Json constraints = Json::array();
  for (const auto& c : s.constraints()) {
    Json item{{"i", c.i}, {"j", c.j}};
    if (!c.sigma.empty()) {
      Json sigma = Json::array();
      for (Symbol x : c.sigma) sigma.push_back(alphabet.name(x));
      item["sigma"] = std::move(sigma);
    }
    constraints.push_back(std::move(item));
  }
  return Json{{"n", s.n()}, {"constraints", std::move(constraints)}};
}

namespace {

// Collects symbols in order of first appearance.
class GrammarBuilder {
 public:
  Nonterminal nonterminal(const std::string& name) {
    auto [it, inserted] = nt_index_.try_emplace(name, static_cast<Nonterminal>(nts_.size()));
    if (inserted) nts_.push_back(name);
    return it->second;
  }
  GrammarSymbol symbol(const std::string& token) {
    if (token.size() >= 2 && (token.front() == '\'' || token.front() == '"') &&
        token.back() == token.front()) {
      const std::string name = token.substr(1, token.size() - 2);
      if (name.empty()) parse_error("empty terminal ''");
      auto [it, inserted] = t_index_.try_emplace(name, static_cast<std::uint32_t>(ts_.size()));
      if (inserted) ts_.push_back(name);
      return {true, it->second};
    }
    return {false, nonterminal(token)};
  }
  void add(Nonterminal lhs, std::vector<GrammarSymbol> rhs, const std::string& where) {
    if (rhs.empty()) parse_error(where + ": empty alternative (epsilon rules are not supported)");
    rules_.push_back({lhs, std::move(rhs)});
  }
  Cfg build(Nonterminal start) const {
    if (rules_.empty()) parse_error("grammar has no rules");
    if (ts_.empty()) throw Error(ErrorCode::kEmptyLanguage, "grammar has no terminals");
    return Cfg(nts_, Alphabet(ts_), rules_, start);
  }

 private:
  std::vector<std::string> nts_;
  std::map<std::string, Nonterminal> nt_index_;
  std::vector<std::string> ts_;
  std::map<std::string, std::uint32_t> t_index_;
  std::vector<Rule> rules_;
};

std::vector<std::string> tokenize(std::string_view line, const std::string& where) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '\'' || c == '"') {
      const std::size_t close = line.find(c, i + 1);
      if (close == std::string_view::npos) parse_error(where + ": unterminated quote");
      tokens.emplace_back(line.substr(i, close - i + 1));
      i = close + 1;
    } else if (c == '|') {
      tokens.emplace_back("|");
      ++i;
    } else if (line.substr(i, 2) == "->") {
      tokens.emplace_back("->");
      i += 2;
    } else {
      std::size_t end = i;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])) &&
             line[end] != '|' && line[end] != '#' && line.substr(end, 2) != "->") {
        ++end;
      }
      tokens.emplace_back(line.substr(i, end - i));
      i = end;
    }
  }
  return tokens;
}

}  // namespace

Cfg grammar_from_text(std::string_view text) {
  GrammarBuilder b;
  std::optional<Nonterminal> start;
  std::optional<Nonterminal> current;
  bool open_alternative = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string where = "grammar line " + std::to_string(line_no);
    auto tokens = tokenize(line, where);
    if (tokens.empty()) continue;
    std::size_t pos = 0;
    if (tokens[0] == "|" || open_alternative) {
      // Continuation of the previous rule's alternatives.
      if (!current) parse_error(where + ": alternative without a rule");
      pos = tokens[0] == "|" ? 1 : 0;
    } else {
      if (tokens.size() < 2 || tokens[1] != "->") parse_error(where + ": expected 'LHS -> ...'");
      if (tokens[0].front() == '\'' || tokens[0].front() == '"') {
        parse_error(where + ": left-hand side must be a nonterminal");
      }
      current = b.nonterminal(tokens[0]);
      if (!start) start = current;
      pos = 2;
    }
    // A trailing '|' continues the alternatives on the next line.
    open_alternative = tokens.back() == "|" && tokens.size() > pos;
    const std::size_t stop = open_alternative ? tokens.size() - 1 : tokens.size();
    std::vector<GrammarSymbol> rhs;
    for (std::size_t k = pos; k <= stop; ++k) {
      if (k == stop || tokens[k] == "|") {
        b.add(*current, std::move(rhs), where);
        rhs.clear();
      } else if (tokens[k] == "->") {
        parse_error(where + ": unexpected '->'");
      } else {
        rhs.push_back(b.symbol(tokens[k]));
      }
    }
  }
  if (!start) parse_error("grammar has no rules");
  if (open_alternative) parse_error("grammar ends inside an alternative list");
  return b.build(*start);
}

Cfg grammar_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array()) {
    parse_error("grammar: missing \"rules\" array");
  }
  GrammarBuilder b;
  std::optional<Nonterminal> start;
  if (j.contains("start")) start = b.nonterminal(field<std::string>(j, "start", "grammar"));
  for (std::size_t k = 0; k < j["rules"].size(); ++k) {
    const std::string where = "grammar.rules[" + std::to_string(k) + "]";
    const Json& r = j["rules"][k];
    const Nonterminal lhs = b.nonterminal(field<std::string>(r, "lhs", where));
    if (!start) start = lhs;
    std::vector<GrammarSymbol> rhs;
    for (const auto& token : field<std::vector<std::string>>(r, "rhs", where)) {
      rhs.push_back(b.symbol(token));
    }
    b.add(lhs, std::move(rhs), where);
  }
  if (!start) parse_error("grammar has no rules");
  return b.build(*start);
}

Cfg grammar_from_string(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    return grammar_from_json(parse_json(text, "grammar"));
  }
  return grammar_from_text(text);
}

std::string to_text(const CnfGrammar& g) {
  std::ostringstream out;
  auto emit = [&](Nonterminal v) {
    std::vector<std::string> alts;
    for (std::size_t ri : g.rules_for(v)) {
      const auto& r = g.binary_rules()[ri];
      alts.push_back(g.nonterminal_name(r.left) + " " + g.nonterminal_name(r.right));
    }
    for (const auto& r : g.terminal_rules()) {
      if (r.lhs == v) alts.push_back("'" + g.terminals().name(r.terminal) + "'");
    }
    if (alts.empty()) return;
    out << g.nonterminal_name(v) << " ->";
    for (std::size_t k = 0; k < alts.size(); ++k) out << (k == 0 ? " " : " | ") << alts[k];
    out << "\n";
  };
  emit(g.start());
  for (Nonterminal v = 0; v < g.num_nonterminals(); ++v) {
    if (v != g.start()) emit(v);
  }
  return out.str();
}

Json to_json(const CnfGrammar& g) {
  Json rules = Json::array();
  for (const auto& r : g.binary_rules()) {
    rules.push_back({{"lhs", g.nonterminal_name(r.lhs)},
                     {"rhs", {g.nonterminal_name(r.left), g.nonterminal_name(r.right)}}});
  }
  for (const auto& r : g.terminal_rules()) {
    rules.push_back({{"lhs", g.nonterminal_name(r.lhs)},
                     {"rhs", {"'" + g.terminals().name(r.terminal) + "'"}}});
  }
  return Json{{"start", g.nonterminal_name(g.start())}, {"rules", std::move(rules)}};
}

Json tree_to_json(const CnfGrammar& g, const ParseTree& t) {
  if (t.is_leaf()) {
    return Json{{"label", g.nonterminal_name(t.label)}, {"terminal", g.terminals().name(t.terminal)}};
  }
  return Json{{"label", g.nonterminal_name(t.label)},
              {"children", {tree_to_json(g, t.children[0]), tree_to_json(g, t.children[1])}}};
}

std::string big_to_string(const BigCount& c) { return c.str(); }

Json big_to_json(const BigCount& c) {
  if (c >= 0 && c <= std::numeric_limits<std::uint64_t>::max()) return Json(c.convert_to<std::uint64_t>());
  return Json(c.str());
}

TwoSatFormula formula_from_dimacs(std::string_view text) {
  TwoSatFormula phi;
  bool header = false;
  std::size_t declared_clauses = 0;
  std::vector<Literal> pending;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string where = "DIMACS line " + std::to_string(line_no);
    std::istringstream tokens(line);
    std::string first;
    if (!(tokens >> first) || first == "c" || first[0] == 'c' || first == "%") continue;
    if (first == "p") {
      std::string format;
      if (header || !(tokens >> format >> phi.num_vars >> declared_clauses) || format != "cnf") {
        parse_error(where + ": expected a single 'p cnf <vars> <clauses>' header");
      }
      header = true;
      continue;
    }
    if (!header) parse_error(where + ": clause before the 'p cnf' header");
    tokens.clear();
    tokens.seekg(0);
    long long lit = 0;
    while (tokens >> lit) {
      if (lit == 0) {
        if (pending.size() != 2) {
          parse_error(where + ": clause has " + std::to_string(pending.size()) +
                      " literals; exactly 2 are required");
        }
        phi.clauses.push_back({pending[0], pending[1]});
        pending.clear();
        continue;
      }
      const auto var = static_cast<std::size_t>(lit < 0 ? -lit : lit);
      if (var > phi.num_vars) parse_error(where + ": variable " + std::to_string(var) + " out of range");
      pending.push_back({var, lit > 0});
    }
    if (!tokens.eof()) parse_error(where + ": expected integer literals");
  }
  if (!header) parse_error("DIMACS: missing 'p cnf' header");
  if (!pending.empty()) parse_error("DIMACS: last clause is not terminated by 0");
  if (phi.clauses.size() != declared_clauses) {
    parse_error("DIMACS: header declares " + std::to_string(declared_clauses) + " clauses, found " +
                std::to_string(phi.clauses.size()));
  }
  phi.validate();
  return phi;
}

Json to_json(const Nfa& nfa) {
  Json transitions = Json::array();
  for (const auto& t : nfa.transitions) transitions.push_back({t.from, t.label, t.to});
  return Json{{"states", nfa.num_states},
              {"initial", nfa.initial},
              {"accepting", nfa.accepting},
              {"transitions", std::move(transitions)}};
}

BinaryCsp csp_from_json(const Json& j) {
  BinaryCsp csp;
  csp.domain = Alphabet(field<std::vector<std::string>>(j, "domain", "csp"));
  if (!j.contains("edges") || !j["edges"].is_array()) parse_error("csp: missing \"edges\" array");
  std::size_t max_var = 0;
  for (std::size_t k = 0; k < j["edges"].size(); ++k) {
    const std::string where = "csp.edges[" + std::to_string(k) + "]";
    const Json& e = j["edges"][k];
    CspEdge edge;
    edge.u = field<std::size_t>(e, "u", where);
    edge.v = field<std::size_t>(e, "v", where);
    edge.factor = field<std::vector<std::vector<std::uint8_t>>>(e, "factor", where);
    max_var = std::max({max_var, edge.u + 1, edge.v + 1});
    csp.edges.push_back(std::move(edge));
  }
  csp.num_vars = j.contains("num_vars") ? field<std::size_t>(j, "num_vars", "csp") : max_var;
  csp.validate();
  return csp;
}

Json to_json(const BinaryCsp& csp) {
  Json edges = Json::array();
  for (const auto& e : csp.edges) {
    Json edge{{"u", e.u}, {"v", e.v}, {"factor", e.factor}};
    if (e.dummy) edge["dummy"] = true;
    edges.push_back(std::move(edge));
  }
  return Json{{"domain", csp.domain.symbols()}, {"num_vars", csp.num_vars}, {"edges", std::move(edges)}};
}

Json to_json(const UnwrapResult& u) {
  Json dead = Json::array();
  for (const auto& d : u.dead) dead.push_back(d);
  return Json{{"length", u.model.length()},
              {"model", to_json(u.model)},
              {"equalities", to_json(u.equalities, u.model.alphabet())},
              {"row_weights", u.row_weights},
              {"p0_scale", u.p0_scale},
              {"vertex_map", u.vertex_map},
              {"edge_map", u.edge_map},
              {"dead_rows", std::move(dead)},
              {"eulerized", to_json(u.eulerized)}};
}

Json to_json(const ReductionReport& r) {
  return Json{{"csp_solutions", big_to_json(r.csp_solutions)},
              {"weighted_chain_count", r.weighted_chain_count},
              {"chain_count", big_to_json(r.chain_count)},
              {"integral", r.integral},
              {"bijection", r.bijection},
              {"passed", r.passed},
              {"detail", r.detail}};
}
}  // namespace cmseq::io
