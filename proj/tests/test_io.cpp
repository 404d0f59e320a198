#include <doctest.h>

#include "support.hpp"

using namespace testing;
using cmseq::io::Json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::string data(const std::string& name) { return io::read_file(std::string(CMSEQ_TEST_DATA) + "/" + name); }

}  // namespace

TEST_CASE("model JSON round trip") {
  Rng rng(1);
  const auto base = random_model(3, rng, 0.2);
  const auto j = io::to_json(base);
  const auto back = io::model_from_json(io::parse_json(j.dump()));
  CHECK(back.alphabet() == base.alphabet());
  CHECK(back.p0() == base.p0());
  CHECK(back.t() == base.t());
  const auto mu = io::model_from_json(io::parse_json(data("uniform_ab.json")));
  CHECK(mu.alphabet().to_string(Word{0, 1}) == "ab");
}

TEST_CASE("bad models are parse or domain errors") {
  CHECK(code_of([] { io::parse_json("{\"alphabet\": [", "m"); }) == ErrorCode::kParse);
  CHECK(code_of([] { io::model_from_json(io::parse_json("{\"alphabet\": [\"a\"]}")); }) == ErrorCode::kParse);
  CHECK_THROWS_AS(io::model_from_json(io::parse_json(R"({"alphabet":["a","b"],"p0":[1,0],"t":[[1,0]]})")), Error);
  CHECK_THROWS_AS(io::model_from_json(io::parse_json(R"({"alphabet":["a"],"p0":[2],"t":[[1]]})")), Error);
}

TEST_CASE("words") {
  const auto a = letters(2);
  CHECK(io::word_to_json(a, Word{0, 1, 1}) == Json::parse(R"(["a","b","b"])"));
  CHECK(io::word_from_json(a, Json::parse(R"(["b","a"])")) == Word{1, 0});
  CHECK_THROWS_AS(io::word_from_json(a, Json::parse(R"(["c"])")), Error);
}

TEST_CASE("equality sets") {
  const auto a = letters(2);
  const auto s = io::equalities_from_json(io::parse_json(data("pal.json")), &a);
  CHECK(s.n() == 6);
  CHECK(classify(s) == TopologyClass::kPalindromic);
  const auto j = io::to_json(s, a);
  const auto back = io::equalities_from_json(j, &a);
  CHECK(back.constraints().size() == 3);
  CHECK(back.constraints()[2].i == 3);
  const auto sig = io::equalities_from_json(
      io::parse_json(R"({"n": 3, "constraints": [{"i": 1, "j": 3, "sigma": ["b", "a"]}]})"), &a);
  CHECK(sig.satisfied_by(Word{0, 0, 1}));
  CHECK_FALSE(sig.satisfied_by(Word{0, 0, 0}));
  CHECK_THROWS_AS(io::equalities_from_json(io::parse_json(R"({"n": 3, "constraints": [{"i": 1}]})"), &a), Error);
}

TEST_CASE("grammar text format") {
  const auto cfg = io::grammar_from_text(
      "# comment\n"
      "S -> A B | 'c'   # trailing\n"
      "   | S S\n"
      "A -> 'a'\n"
      "B -> 'b' |\n"
      "     'c'\n");
  CHECK(cfg.nonterminals() == std::vector<std::string>{"S", "A", "B"});
  CHECK(cfg.terminals().to_string(Word{0, 1, 2}) == "cab");
  CHECK(cfg.rules().size() == 6);
  const auto g = to_cnf(cfg);
  CHECK(is_member(g, g.terminals().word_from_chars("abc")));
  CHECK(code_of([] { io::grammar_from_text("S -> 'a\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { io::grammar_from_text("S 'a'\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { io::grammar_from_text(""); }) != ErrorCode::kInternal);
}

TEST_CASE("grammar formats round trip") {
  const auto d = to_cnf(io::grammar_from_text(data("dyck.cfg")));
  CHECK(to_cnf(io::grammar_from_text(io::to_text(d))) == d);
  CHECK(to_cnf(io::grammar_from_json(io::to_json(d))) == d);
  CHECK(to_cnf(io::grammar_from_string(io::to_json(d).dump())) == d);
  const auto j = io::parse_json(R"({"start": "T", "rules": [{"lhs": "S", "rhs": ["'a'"]}, {"lhs": "T", "rhs": ["S", "S"]}]})");
  const auto g = to_cnf(io::grammar_from_json(j));
  CHECK(g.nonterminal_name(g.start()) == "T");
  CHECK(is_member(g, Word{0, 0}));
}

TEST_CASE("DIMACS formulas") {
  const auto phi = io::formula_from_dimacs(data("phi.cnf"));
  CHECK(phi.num_vars == 2);
  REQUIRE(phi.clauses.size() == 2);
  CHECK(phi.clauses[1][0].var == 1);
  CHECK_FALSE(phi.clauses[1][0].positive);
  CHECK(count_sat(phi) == 2);
  CHECK(code_of([] { io::formula_from_dimacs("p cnf 2 1\n1 2 -1 0\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { io::formula_from_dimacs("p cnf 2 2\n1 2 0\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { io::formula_from_dimacs("1 2 0\n"); }) == ErrorCode::kParse);
  CHECK(code_of([] { io::formula_from_dimacs("p cnf 2 1\n1 3 0\n"); }) != ErrorCode::kInternal);
}

TEST_CASE("CSP JSON") {
  const auto csp = io::csp_from_json(io::parse_json(data("triangle3.json")));
  CHECK(csp.num_vars == 3);
  CHECK(csp.domain.size() == 3);
  const auto back = io::csp_from_json(io::to_json(csp));
  CHECK(back.edges.size() == 3);
  CHECK(back.edges[1].factor == csp.edges[1].factor);
  CHECK_THROWS_AS(io::csp_from_json(io::parse_json(R"({"domain":["0","1"],"edges":[{"u":0,"v":0,"factor":[[1,1],[1,1]]}]})")), Error);
  CHECK_THROWS_AS(io::csp_from_json(io::parse_json(R"({"domain":["0","1"],"edges":[{"u":0,"v":1,"factor":[[2,1],[1,1]]}]})")), Error);
  const auto report = io::to_json(verify_reduction(csp));
  CHECK(report["passed"] == true);
  CHECK(report["csp_solutions"] == 6);
}

TEST_CASE("big counts") {
  CHECK(io::big_to_json(BigCount(42)) == Json(42));
  BigCount big = 1;
  for (int k = 0; k < 70; ++k) big *= 2;
  CHECK(io::big_to_string(big) == "1180591620717411303424");
  CHECK(io::big_to_json(big) == Json("1180591620717411303424"));
}

TEST_CASE("NFA JSON") {
  const auto j = io::to_json(build_falsifying_nfa(TwoSatFormula{2, {{Literal{1, true}, Literal{2, true}}}}));
  CHECK(j["states"] == 3);
  CHECK(j["accepting"].size() == 1);
}
