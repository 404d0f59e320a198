#include "cmseq/grammar.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace cmseq {

Cfg::Cfg(std::vector<std::string> nonterminals, Alphabet terminals, std::vector<Rule> rules,
         Nonterminal start)
    : nonterminals_(std::move(nonterminals)),
      terminals_(std::move(terminals)),
      rules_(std::move(rules)),
      start_(start) {
  if (start_ >= nonterminals_.size()) throw Error(ErrorCode::kDomain, "start symbol out of range");
  for (const auto& name : nonterminals_) {
    if (terminals_.contains(name)) {
      throw Error(ErrorCode::kDomain, "'" + name + "' is both a terminal and a nonterminal");
    }
  }
  for (const auto& r : rules_) {
    if (r.lhs >= nonterminals_.size()) throw Error(ErrorCode::kDomain, "rule lhs out of range");
    if (r.rhs.empty()) {
      throw Error(ErrorCode::kDomain, "epsilon rules are not supported (lhs '" +
                                          nonterminals_[r.lhs] + "')");
    }
    for (const auto& s : r.rhs) {
      const std::size_t bound = s.terminal ? terminals_.size() : nonterminals_.size();
      if (s.index >= bound) throw Error(ErrorCode::kDomain, "rule symbol out of range");
    }
  }
}

CnfGrammar::CnfGrammar(std::vector<std::string> nonterminals, Alphabet terminals,
                       std::vector<BinaryRule> binary_rules,
                       std::vector<TerminalRule> terminal_rules, Nonterminal start)
    : terminals_(std::move(terminals)) {
  const std::size_t nv = nonterminals.size();
  if (start >= nv) throw Error(ErrorCode::kDomain, "start symbol out of range");
  for (const auto& r : binary_rules) {
    if (r.lhs >= nv || r.left >= nv || r.right >= nv) {
      throw Error(ErrorCode::kDomain, "binary rule references an unknown nonterminal");
    }
  }
  for (const auto& r : terminal_rules) {
    if (r.lhs >= nv || r.terminal >= terminals_.size()) {
      throw Error(ErrorCode::kDomain, "terminal rule references an unknown symbol");
    }
  }

  std::vector<bool> productive(nv, false);
  for (const auto& r : terminal_rules) productive[r.lhs] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : binary_rules) {
      if (!productive[r.lhs] && productive[r.left] && productive[r.right]) {
        productive[r.lhs] = changed = true;
      }
    }
  }
  if (!productive[start]) {
    throw Error(ErrorCode::kEmptyLanguage, "grammar generates no terminal string");
  }
  std::vector<bool> reachable(nv, false);
  reachable[start] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : binary_rules) {
      if (!reachable[r.lhs] || !productive[r.left] || !productive[r.right]) continue;
      for (Nonterminal c : {r.left, r.right}) {
        if (!reachable[c]) reachable[c] = changed = true;
      }
    }
  }

  std::vector<Nonterminal> remap(nv, 0);
  for (std::size_t v = 0; v < nv; ++v) {
    if (productive[v] && reachable[v]) {
      remap[v] = static_cast<Nonterminal>(nonterminals_.size());
      nonterminals_.push_back(std::move(nonterminals[v]));
    }
  }
  auto keep = [&](Nonterminal v) { return productive[v] && reachable[v]; };
  std::set<BinaryRule> seen_binary;
  for (const auto& r : binary_rules) {
    if (!keep(r.lhs) || !keep(r.left) || !keep(r.right)) continue;
    BinaryRule m{remap[r.lhs], remap[r.left], remap[r.right]};
    if (seen_binary.insert(m).second) binary_rules_.push_back(m);
  }
  std::set<TerminalRule> seen_terminal;
  for (const auto& r : terminal_rules) {
    if (!keep(r.lhs)) continue;
    TerminalRule m{remap[r.lhs], r.terminal};
    if (seen_terminal.insert(m).second) terminal_rules_.push_back(m);
  }
  start_ = remap[start];

  emits_.assign(nonterminals_.size() * terminals_.size(), 0);
  for (const auto& r : terminal_rules_) emits_[r.lhs * terminals_.size() + r.terminal] = 1;
  by_lhs_.assign(nonterminals_.size(), {});
  for (std::size_t i = 0; i < binary_rules_.size(); ++i) by_lhs_[binary_rules_[i].lhs].push_back(i);
}

Nonterminal CnfGrammar::nonterminal_index(const std::string& name) const {
  auto it = std::find(nonterminals_.begin(), nonterminals_.end(), name);
  if (it == nonterminals_.end()) {
    throw Error(ErrorCode::kDomain, "unknown nonterminal '" + name + "'");
  }
  return static_cast<Nonterminal>(it - nonterminals_.begin());
}

CnfGrammar CnfGrammar::with_terminals(const Alphabet& target) const {
  std::vector<TerminalRule> rules;
  for (const auto& r : terminal_rules_) {
    const std::string& name = terminals_.name(r.terminal);
    if (!target.contains(name)) {
      throw Error(ErrorCode::kAlphabetMismatch,
                  "grammar terminal '" + name + "' is not in the model alphabet");
    }
    rules.push_back({r.lhs, target.index_of(name)});
  }
  return CnfGrammar(nonterminals_, target, binary_rules_, rules, start_);
}

namespace {

std::string fresh_name(const std::string& base, std::set<std::string>& taken) {
  std::string name = base;
  for (int suffix = 1; taken.count(name) != 0; ++suffix) name = base + "_" + std::to_string(suffix);
  taken.insert(name);
  return name;
}

}  // namespace

CnfGrammar to_cnf(const Cfg& g) {
  std::vector<std::string> names = g.nonterminals();
  std::set<std::string> taken(names.begin(), names.end());
  for (const auto& t : g.terminals().symbols()) taken.insert(t);
  auto add_nonterminal = [&](const std::string& base) {
    names.push_back(fresh_name(base, taken));
    return static_cast<Nonterminal>(names.size() - 1);
  };

  // Terminals inside right-hand sides of length >= 2 get a proxy nonterminal.
  std::map<Symbol, Nonterminal> proxy;
  std::vector<Rule> rules;
  for (Rule r : g.rules()) {
    if (r.rhs.size() >= 2) {
      for (auto& s : r.rhs) {
        if (!s.terminal) continue;
        auto it = proxy.find(s.index);
        if (it == proxy.end()) {
          it = proxy.emplace(s.index, add_nonterminal("T_" + g.terminals().name(s.index))).first;
        }
        s = {false, it->second};
      }
    }
    rules.push_back(std::move(r));
  }
  for (auto [terminal, v] : proxy) rules.push_back({v, {{true, terminal}}});

  // Binarize: V -> X1 X2 ... Xk becomes a right-branching chain.
  std::vector<Rule> short_rules;
  for (const auto& r : rules) {
    if (r.rhs.size() <= 2) {
      short_rules.push_back(r);
      continue;
    }
    Nonterminal lhs = r.lhs;
    for (std::size_t k = 0; k + 2 < r.rhs.size(); ++k) {
      const Nonterminal rest = add_nonterminal(names[r.lhs] + "_" + std::to_string(k + 1));
      short_rules.push_back({lhs, {r.rhs[k], {false, rest}}});
      lhs = rest;
    }
    short_rules.push_back({lhs, {r.rhs[r.rhs.size() - 2], r.rhs.back()}});
  }

  // Unit closure: unit[v] holds every w with v =>* w through unit rules.
  const std::size_t nv = names.size();
  std::vector<std::vector<bool>> unit(nv, std::vector<bool>(nv, false));
  for (std::size_t v = 0; v < nv; ++v) unit[v][v] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : short_rules) {
      if (r.rhs.size() != 1 || r.rhs[0].terminal) continue;
      for (std::size_t v = 0; v < nv; ++v) {
        if (unit[v][r.lhs] && !unit[v][r.rhs[0].index]) unit[v][r.rhs[0].index] = changed = true;
      }
    }
  }

  std::vector<BinaryRule> binary;
  std::vector<TerminalRule> terminal;
  // Rule order follows the input so already-normal grammars come back unchanged.
  for (const auto& r : short_rules) {
    for (std::size_t v = 0; v < nv; ++v) {
      if (!unit[v][r.lhs]) continue;
      const auto lhs = static_cast<Nonterminal>(v);
      if (r.rhs.size() == 1 && r.rhs[0].terminal) {
        terminal.push_back({lhs, r.rhs[0].index});
      } else if (r.rhs.size() == 2) {
        binary.push_back({lhs, r.rhs[0].index, r.rhs[1].index});
      }
    }
  }
  return CnfGrammar(std::move(names), g.terminals(), std::move(binary), std::move(terminal),
                    g.start());
}

namespace {

void check_word(const CnfGrammar& g, const Word& w) {
  if (w.empty()) throw Error(ErrorCode::kDomain, "empty words are not supported");
  for (Symbol s : w) {
    if (s >= g.terminals().size()) {
      throw Error(ErrorCode::kDomain, "word contains a symbol foreign to the grammar");
    }
  }
}

// CYK over a counting semiring. Count must support +, * and construction from int.
template <typename Count, typename Combine>
std::vector<Count> count_chart(const CnfGrammar& g, const Word& w, Combine saturate) {
  const std::size_t n = w.size();
  const std::size_t nv = g.num_nonterminals();
  std::vector<Count> chart(n * n * nv, Count(0));
  auto at = [&](std::size_t start, std::size_t len, Nonterminal v) -> Count& {
    return chart[(start * n + (len - 1)) * nv + v];
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& r : g.terminal_rules()) {
      if (r.terminal == w[i]) at(i, 1, r.lhs) = Count(1);
    }
  }
  for (std::size_t len = 2; len <= n; ++len) {
    for (std::size_t i = 0; i + len <= n; ++i) {
      for (std::size_t k = 1; k < len; ++k) {
        for (const auto& r : g.binary_rules()) {
          const Count& left = at(i, k, r.left);
          if (left == 0) continue;
          const Count& right = at(i + k, len - k, r.right);
          if (right == 0) continue;
          at(i, len, r.lhs) = saturate(at(i, len, r.lhs) + left * right);
        }
      }
    }
  }
  return chart;
}

}  // namespace

ParseChart cyk_member(const CnfGrammar& g, const Word& w) {
  check_word(g, w);
  const std::size_t n = w.size();
  ParseChart chart(n, g.num_nonterminals());
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& r : g.terminal_rules()) {
      if (r.terminal == w[i]) chart.set(i, 1, r.lhs);
    }
  }
  for (std::size_t len = 2; len <= n; ++len) {
    for (std::size_t i = 0; i + len <= n; ++i) {
      for (std::size_t k = 1; k < len; ++k) {
        for (const auto& r : g.binary_rules()) {
          if (chart.cell(i, k, r.left) && chart.cell(i + k, len - k, r.right)) {
            chart.set(i, len, r.lhs);
          }
        }
      }
    }
  }
  return chart;
}

bool is_member(const CnfGrammar& g, const Word& w) {
  return cyk_member(g, w).cell(0, w.size(), g.start());
}

BigCount count_derivations(const CnfGrammar& g, const Word& w) {
  check_word(g, w);
  const auto chart = count_chart<BigCount>(g, w, [](BigCount c) { return c; });
  const std::size_t n = w.size();
  return chart[(0 * n + (n - 1)) * g.num_nonterminals() + g.start()];
}

std::vector<ParseTree> enumerate_parse_trees(const CnfGrammar& g, const Word& w,
                                             Nonterminal root) {
  check_word(g, w);
  std::map<std::tuple<std::size_t, std::size_t, Nonterminal>, std::vector<ParseTree>> memo;
  std::function<const std::vector<ParseTree>&(std::size_t, std::size_t, Nonterminal)> trees =
      [&](std::size_t start, std::size_t len, Nonterminal v) -> const std::vector<ParseTree>& {
    const auto key = std::make_tuple(start, len, v);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<ParseTree> out;
    if (len == 1) {
      if (g.has_terminal_rule(v, w[start])) out.push_back({v, w[start], 1, {}});
    } else {
      for (std::size_t k = 1; k < len; ++k) {
        for (std::size_t ri : g.rules_for(v)) {
          const auto& r = g.binary_rules()[ri];
          const auto& lefts = trees(start, k, r.left);
          if (lefts.empty()) continue;
          const auto& rights = trees(start + k, len - k, r.right);
          for (const auto& l : lefts) {
            for (const auto& rt : rights) out.push_back({v, 0, len, {l, rt}});
          }
        }
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  };
  return trees(0, w.size(), root);
}

Word tree_yield(const ParseTree& t) {
  if (t.is_leaf()) return {t.terminal};
  Word out = tree_yield(t.children[0]);
  const Word right = tree_yield(t.children[1]);
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

void for_each_word_up_to(std::size_t alphabet_size, std::size_t max_len,
                         const std::function<bool(const Word&)>& visit, std::uint64_t limit) {
  std::uint64_t total = 0;
  std::uint64_t layer = 1;
  for (std::size_t len = 1; len <= max_len; ++len) {
    if (alphabet_size != 0 && layer > limit / alphabet_size) {
      throw Error(ErrorCode::kRefused, "bounded check over words up to length " +
                                           std::to_string(max_len) + " exceeds the limit");
    }
    layer *= alphabet_size;
    total += layer;
    if (total > limit) {
      throw Error(ErrorCode::kRefused, "bounded check over words up to length " +
                                           std::to_string(max_len) + " exceeds the limit");
    }
  }
  for (std::size_t len = 1; len <= max_len; ++len) {
    Word w(len, 0);
    while (true) {
      if (visit(w)) return;
      std::size_t pos = len;
      bool done = true;
      while (pos > 0) {
        --pos;
        if (++w[pos] < alphabet_size) {
          done = false;
          break;
        }
        w[pos] = 0;
      }
      if (done) break;
    }
  }
}

std::optional<Word> check_ambiguity_bounded(const CnfGrammar& g, std::size_t max_len,
                                            std::uint64_t limit) {
  std::optional<Word> witness;
  for_each_word_up_to(g.terminals().size(), max_len, [&](const Word& w) {
    // Counts saturate at 2; only "more than one" matters here.
    const auto chart = count_chart<unsigned>(g, w, [](unsigned c) { return std::min(c, 2u); });
    const std::size_t n = w.size();
    if (chart[(n - 1) * g.num_nonterminals() + g.start()] >= 2) {
      witness = w;
      return true;
    }
    return false;
  }, limit);
  return witness;
}

std::optional<WeakAmbiguityViolation> check_weak_ambiguity_bounded(const CnfGrammar& g,
                                                                   std::size_t max_len,
                                                                   std::uint64_t limit) {
  std::optional<WeakAmbiguityViolation> found;
  for_each_word_up_to(g.terminals().size(), max_len, [&](const Word& w) {
    const ParseChart chart = cyk_member(g, w);
    std::optional<Nonterminal> first;
    for (Nonterminal v = 0; v < g.num_nonterminals(); ++v) {
      if (!chart.cell(0, w.size(), v)) continue;
      if (!first) {
        first = v;
      } else {
        found = WeakAmbiguityViolation{*first, v, w};
        return true;
      }
    }
    return false;
  }, limit);
  return found;
}

}  // namespace cmseq
