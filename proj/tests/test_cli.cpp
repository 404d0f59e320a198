#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "support.hpp"

using namespace testing;
using cmseq::io::Json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string("cd ") + CMSEQ_TEST_DATA + " && " + CMSEQ_CLI + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t got; (got = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

Json json_of(const Run& r) { return Json::parse(r.out); }

}  // namespace

TEST_CASE("documented command examples") {
  const auto p = run("-q partition --grammar dyck.cfg --model uniform2.json --n 4 --mode unambiguous");
  CHECK(p.status == 0);
  CHECK(json_of(p)["partition"] == 0.125);
  const auto c = run("-q classify --equalities pal.json");
  CHECK(c.status == 0);
  CHECK(json_of(c)["topology"] == "Palindromic");
  const auto r = run("-q reduce-2sat --formula phi.cnf");
  CHECK(r.status == 0);
  const auto j = json_of(r);
  CHECK(j["states"] == 5);
  CHECK(j["accepted_n"] == 2);
  CHECK(j["sat_count"] == 2);
}

TEST_CASE("partition modes agree with the library") {
  const auto eq = json_of(run("-q partition --equalities pal.json --model uniform_ab.json"));
  CHECK(eq["partition"].get<double>() == doctest::Approx(0.125));
  CHECK(eq["topology"] == "Palindromic");
  const auto weak = json_of(run("-q partition --grammar ssa.cfg --model uniform_ab.json --n 6 --mode weak"));
  CHECK(std::abs(weak["partition"].get<double>() - 1.0 / 64.0) <= 1e-12);
  CHECK(weak["corrections_applied"].get<int>() > 0);
  const auto m = json_of(run("-q marginal --grammar dyck.cfg --model uniform2.json --n 4 --t 1"));
  CHECK(m["marginal"]["("] == 1.0);
  CHECK(m["marginal"][")"] == 0.0);
}

TEST_CASE("sampling is deterministic per seed") {
  const std::string args = "-q sample --grammar dyck.cfg --model uniform2.json --n 6 --count 50 --seed 7";
  const auto a = run(args);
  const auto b = run(args);
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  const auto j = json_of(a);
  CHECK(j["seed"] == 7);
  CHECK(j["samples"].size() == 50);
  const auto g = parse_grammar(kDyck);
  for (const auto& w : j["samples"]) CHECK(is_member(g, io::word_from_json(g.terminals(), w)));
  CHECK(run("-q sample --grammar dyck.cfg --model uniform2.json --n 6 --count 50 --seed 8").out != a.out);
  const auto eq = run("-q sample --equalities pal.json --model uniform_ab.json --count 5");
  CHECK(eq.status == 0);
  CHECK(json_of(eq)["seed"] == 0);
}

TEST_CASE("reduction and checker subcommands") {
  const auto csp = json_of(run("-q reduce-csp --csp triangle3.json"));
  CHECK(csp["verification"]["passed"] == true);
  CHECK(csp["verification"]["csp_solutions"] == 6);
  const auto chk = json_of(run("-q check-grammar --grammar dyck.cfg --bound 6"));
  CHECK(chk["ambiguous"] == false);
  CHECK(chk["weakly_ambiguous"] == false);
  CHECK(chk["weak_violation"]["word"] == Json::parse(R"j(["(", ")"])j"));
  const auto oracle = json_of(run("-q oracle --formula phi.cnf"));
  CHECK(oracle["sat_count"] == 2);
  const auto o2 = json_of(run("-q oracle --grammar dyck.cfg --model uniform2.json --n 4"));
  CHECK(o2["partition"] == 0.125);
  CHECK(o2["marginals"][3][")"] == 1.0);
}

TEST_CASE("exit codes") {
  CHECK(run("--version").status == 0);
  CHECK(run("--version").out.find("cmseq") != std::string::npos);
  CHECK(run("").status == 2);
  CHECK(run("partition --model uniform2.json").status == 2);
  CHECK(run("bogus").status == 2);
  CHECK(run("partition --grammar dyck.cfg --model uniform2.json --n 4 --mode nope").status == 2);
  const auto err = run("-q partition --grammar dyck.cfg --model uniform_ab.json --n 4");
  CHECK(err.status == 1);
  CHECK(json_of(err).contains("error"));
  CHECK(json_of(err).contains("detail"));
  const auto null = run("-q sample --grammar dyck.cfg --model uniform2.json --n 3 --count 1");
  CHECK(null.status == 1);
  CHECK(json_of(null)["error"].is_string());
}

TEST_CASE("output file option") {
  const std::string path = "/tmp/cmseq_cli_test_out.json";
  std::remove(path.c_str());
  const auto r = run("-q -o " + path + " classify --equalities pal.json");
  CHECK(r.status == 0);
  std::ifstream in(path);
  REQUIRE(in.good());
  CHECK(Json::parse(in)["topology"] == "Palindromic");
  std::remove(path.c_str());
}
