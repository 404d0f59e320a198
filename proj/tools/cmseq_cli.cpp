// Command-line front end. Machine-readable JSON goes to stdout (or --output),
// logs to stderr.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "cmseq/equality.hpp"
#include "cmseq/grammar.hpp"
#include "cmseq/grammar_dp.hpp"
#include "cmseq/io.hpp"
#include "cmseq/markov.hpp"
#include "cmseq/reductions.hpp"
#include "cmseq/weak_dp.hpp"

namespace {

using cmseq::io::Json;

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  bool quiet = false;
  std::size_t threads = 1;
  std::string output;
  std::string model_path;
  std::string grammar_path;
  std::string equalities_path;
  std::string formula_path;
  std::string csp_path;
  std::size_t n = 0;
  std::string mode = "unambiguous";
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t t = 0;
  std::size_t bound = 8;
  std::size_t guard_length = 8;
  std::uint64_t enumeration_limit = cmseq::kDefaultEnumerationLimit;
  std::uint64_t subset_limit = cmseq::kDefaultSubsetLimit;
  bool emit_nfa = false;
  std::string dot_path;
};

void log(const Config& c, const std::string& msg) {
  if (!c.quiet) std::cerr << "cmseq: " << msg << "\n";
}

cmseq::MarkovModel load_model(const Config& c) {
  if (c.model_path.empty()) throw UsageError("--model is required");
  return cmseq::io::model_from_json(
      cmseq::io::parse_json(cmseq::io::read_file(c.model_path), c.model_path));
}

// Normalized to CNF and re-indexed over the model's alphabet so the chart
// and the chain agree on symbol numbering.
cmseq::CnfGrammar load_grammar(const Config& c, const cmseq::Alphabet& alphabet) {
  const auto cfg = cmseq::io::grammar_from_string(cmseq::io::read_file(c.grammar_path));
  return cmseq::to_cnf(cfg).with_terminals(alphabet);
}

cmseq::EqualitySet load_equalities(const Config& c, const cmseq::Alphabet* alphabet) {
  return cmseq::io::equalities_from_json(
      cmseq::io::parse_json(cmseq::io::read_file(c.equalities_path), c.equalities_path), alphabet);
}

cmseq::ChartOptions chart_options(const Config& c) {
  cmseq::ChartOptions o;
  o.ambiguity_guard_length = c.guard_length;
  o.enumeration_limit = c.enumeration_limit;
  o.threads = c.threads;
  return o;
}

enum class Target { kGrammar, kEqualities };

Target target(const Config& c) {
  const bool g = !c.grammar_path.empty();
  const bool e = !c.equalities_path.empty();
  if (g == e) throw UsageError("give exactly one of --grammar or --equalities");
  if (g) {
    if (c.n == 0) throw UsageError("--n is required with --grammar");
    if (c.mode != "unambiguous" && c.mode != "weak") throw UsageError("--mode must be unambiguous or weak");
  }
  return g ? Target::kGrammar : Target::kEqualities;
}

Json warnings_json(const std::vector<std::string>& warnings, const Config& c) {
  for (const auto& w : warnings) log(c, "warning: " + w);
  return Json(warnings);
}

Json marginal_row(const cmseq::Alphabet& alphabet, const std::vector<double>& row) {
  Json out = Json::object();
  for (cmseq::Symbol a = 0; a < alphabet.size(); ++a) out[alphabet.name(a)] = row[a];
  return out;
}

Json cmd_partition(const Config& c) {
  const auto model = load_model(c);
  if (target(c) == Target::kEqualities) {
    const auto eqs = load_equalities(c, &model.alphabet());
    const auto topology = cmseq::classify(eqs);
    const double z = cmseq::partition_equality(model.unroll(eqs.n()), eqs);
    return Json{{"partition", z}, {"topology", cmseq::to_string(topology)}};
  }
  const auto g = load_grammar(c, model.alphabet());
  if (c.mode == "weak") {
    const auto table = cmseq::build_weak_chart(model, g, c.n, chart_options(c));
    return Json{{"partition", cmseq::partition_weak(table, g)},
                {"corrections_applied", table.corrections_applied()},
                {"warnings", warnings_json(table.warnings(), c)}};
  }
  const auto chart = cmseq::build_chart(model, g, c.n, chart_options(c));
  return Json{{"partition", cmseq::partition_unambiguous(chart, g)},
              {"warnings", warnings_json(chart.warnings(), c)}};
}

Json cmd_sample(const Config& c) {
  const auto model = load_model(c);
  cmseq::Rng rng(c.seed);
  Json samples = Json::array();
  Json out{{"seed", c.seed}};
  if (target(c) == Target::kEqualities) {
    const auto eqs = load_equalities(c, &model.alphabet());
    const auto chain = model.unroll(eqs.n());
    for (std::size_t k = 0; k < c.count; ++k) {
      samples.push_back(cmseq::io::word_to_json(model.alphabet(),
                                                cmseq::sample_equality_constrained(chain, eqs, rng)));
    }
  } else {
    const auto g = load_grammar(c, model.alphabet());
    if (c.mode == "weak") {
      const auto table = cmseq::build_weak_chart(model, g, c.n, chart_options(c));
      for (std::size_t k = 0; k < c.count; ++k) {
        samples.push_back(cmseq::io::word_to_json(model.alphabet(), cmseq::sample_word_weak(table, g, rng)));
      }
      out["warnings"] = warnings_json(table.warnings(), c);
    } else {
      const auto chart = cmseq::build_chart(model, g, c.n, chart_options(c));
      for (std::size_t k = 0; k < c.count; ++k) {
        samples.push_back(
            cmseq::io::word_to_json(model.alphabet(), cmseq::sample_word_unambiguous(chart, g, rng)));
      }
      out["warnings"] = warnings_json(chart.warnings(), c);
    }
  }
  out["samples"] = std::move(samples);
  return out;
}

Json cmd_marginal(const Config& c) {
  if (target(c) != Target::kGrammar || c.mode != "unambiguous") {
    throw UsageError("marginal needs --grammar with --mode unambiguous");
  }
  if (c.t == 0) throw UsageError("--t is required (1-based position)");
  const auto model = load_model(c);
  const auto g = load_grammar(c, model.alphabet());
  const auto chart = cmseq::build_chart(model, g, c.n, chart_options(c));
  return Json{{"t", c.t},
              {"marginal", marginal_row(model.alphabet(), cmseq::conditional_marginal(chart, model, g, c.t))},
              {"warnings", warnings_json(chart.warnings(), c)}};
}

Json cmd_classify(const Config& c) {
  if (c.equalities_path.empty()) throw UsageError("--equalities is required");
  std::optional<cmseq::MarkovModel> model;
  if (!c.model_path.empty()) model = load_model(c);
  const auto eqs = load_equalities(c, model ? &model->alphabet() : nullptr);
  return Json{{"topology", cmseq::to_string(cmseq::classify(eqs))}};
}

Json cmd_check_grammar(const Config& c) {
  if (c.grammar_path.empty()) throw UsageError("--grammar is required");
  const auto g = cmseq::to_cnf(cmseq::io::grammar_from_string(cmseq::io::read_file(c.grammar_path)));
  const auto witness = cmseq::check_ambiguity_bounded(g, c.bound, c.enumeration_limit);
  const auto violation = cmseq::check_weak_ambiguity_bounded(g, c.bound, c.enumeration_limit);
  Json out{{"bound", c.bound}, {"cnf", cmseq::io::to_json(g)}};
  out["ambiguous"] = witness.has_value();
  out["ambiguity_witness"] = witness ? Json(g.terminals().render(*witness)) : Json(nullptr);
  out["weakly_ambiguous"] = !violation.has_value();
  if (violation) {
    out["weak_violation"] = Json{{"first", g.nonterminal_name(violation->first)},
                                 {"second", g.nonterminal_name(violation->second)},
                                 {"word", g.terminals().render(violation->word)}};
  } else {
    out["weak_violation"] = nullptr;
  }
  return out;
}

Json cmd_reduce_2sat(const Config& c) {
  if (c.formula_path.empty()) throw UsageError("--formula is required");
  const auto phi = cmseq::io::formula_from_dimacs(cmseq::io::read_file(c.formula_path));
  const auto nfa = cmseq::build_falsifying_nfa(phi);
  const auto accepted = cmseq::count_accepted(nfa, phi.num_vars, c.subset_limit);
  const cmseq::BigCount all = cmseq::BigCount(1) << phi.num_vars;
  Json out{{"states", nfa.num_states},
           {"accepted_n", cmseq::io::big_to_json(accepted)},
           {"sat_count", cmseq::io::big_to_json(all - accepted)}};
  if (c.emit_nfa) out["nfa"] = cmseq::io::to_json(nfa);
  if (!c.dot_path.empty()) {
    std::ofstream dot(c.dot_path);
    if (!dot) throw cmseq::Error(cmseq::ErrorCode::kDomain, "cannot write " + c.dot_path);
    dot << nfa.to_dot();
  }
  return out;
}

cmseq::BinaryCsp load_csp(const Config& c) {
  return cmseq::io::csp_from_json(cmseq::io::parse_json(cmseq::io::read_file(c.csp_path), c.csp_path));
}

Json cmd_reduce_csp(const Config& c) {
  if (c.csp_path.empty()) throw UsageError("--csp is required");
  const auto csp = load_csp(c);
  const auto unwrap = cmseq::unwrap_csp(csp);
  const auto report = cmseq::verify_reduction(csp, c.enumeration_limit);
  return Json{{"unwrap", cmseq::io::to_json(unwrap)}, {"verification", cmseq::io::to_json(report)}};
}

Json cmd_oracle(const Config& c) {
  if (!c.formula_path.empty()) {
    const auto phi = cmseq::io::formula_from_dimacs(cmseq::io::read_file(c.formula_path));
    return Json{{"sat_count", cmseq::io::big_to_json(cmseq::brute_force_count_sat(phi))}};
  }
  if (!c.csp_path.empty()) {
    return Json{{"solutions", cmseq::io::big_to_json(cmseq::brute_force_count_csp(load_csp(c), c.enumeration_limit))}};
  }
  const auto model = load_model(c);
  cmseq::Predicate pred;
  std::size_t n = c.n;
  if (target(c) == Target::kEqualities) {
    auto eqs = std::make_shared<cmseq::EqualitySet>(load_equalities(c, &model.alphabet()));
    n = eqs->n();
    pred = [eqs](const cmseq::Word& w) { return eqs->satisfied_by(w); };
  } else {
    auto g = std::make_shared<cmseq::CnfGrammar>(load_grammar(c, model.alphabet()));
    pred = [g](const cmseq::Word& w) { return cmseq::is_member(*g, w); };
  }
  const double z = cmseq::oracle_partition(model, n, pred, c.enumeration_limit);
  Json marginals = nullptr;
  if (z > 0.0) {
    marginals = Json::array();
    for (const auto& row : cmseq::oracle_marginals(model, n, pred, c.enumeration_limit)) {
      marginals.push_back(marginal_row(model.alphabet(), row));
    }
  }
  return Json{{"partition", z}, {"marginals", std::move(marginals)}};
}

void emit(const Config& c, const Json& result) {
  const std::string text = result.dump() + "\n";
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output, std::ios::binary);
  if (!out) throw cmseq::Error(cmseq::ErrorCode::kDomain, "cannot write " + c.output);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Exact inference and sampling for constrained Markov sequences"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("cmseq ") + kVersion + " (symbol order: " +
                                        cmseq::kSymbolOrderRule + ")");
  app.add_flag("--quiet,-q", c.quiet, "Suppress logs on stderr");
  app.add_option("--threads", c.threads, "Worker threads for chart construction")->check(CLI::PositiveNumber);
  app.add_option("--output,-o", c.output, "Write the JSON result to this file");
  app.add_option("--enumeration-limit", c.enumeration_limit, "Largest brute-force enumeration allowed");

  auto add_model = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--model", c.model_path, "Markov model JSON")->check(CLI::ExistingFile);
    if (required) o->required();
  };
  auto add_target = [&](CLI::App* s) {
    s->add_option("--grammar", c.grammar_path, "Grammar (text or JSON)")->check(CLI::ExistingFile);
    s->add_option("--equalities", c.equalities_path, "Equality constraints JSON")->check(CLI::ExistingFile);
    s->add_option("--n", c.n, "Sequence length (grammar mode)");
    s->add_option("--mode", c.mode, "Grammar mode: unambiguous or weak")
        ->check(CLI::IsMember({"unambiguous", "weak"}));
    s->add_option("--guard-length", c.guard_length, "Ambiguity screen bound; 0 disables it");
  };

  std::vector<std::pair<CLI::App*, Json (*)(const Config&)>> commands;
  auto* partition = app.add_subcommand("partition", "Probability of the constraint");
  add_model(partition, true);
  add_target(partition);
  commands.emplace_back(partition, cmd_partition);

  auto* sample = app.add_subcommand("sample", "Exact samples from the conditioned model");
  add_model(sample, true);
  add_target(sample);
  sample->add_option("--count", c.count, "Number of samples");
  sample->add_option("--seed", c.seed, "RNG seed");
  commands.emplace_back(sample, cmd_sample);

  auto* marginal = app.add_subcommand("marginal", "Conditional distribution of one position");
  add_model(marginal, true);
  add_target(marginal);
  marginal->add_option("--t", c.t, "1-based position");
  commands.emplace_back(marginal, cmd_marginal);

  auto* classify = app.add_subcommand("classify", "Topology of an equality set");
  add_model(classify, false);
  classify->add_option("--equalities", c.equalities_path, "Equality constraints JSON")
      ->check(CLI::ExistingFile)
      ->required();
  commands.emplace_back(classify, cmd_classify);

  auto* check = app.add_subcommand("check-grammar", "Bounded ambiguity and weak-ambiguity checks");
  check->add_option("--grammar", c.grammar_path, "Grammar (text or JSON)")->check(CLI::ExistingFile)->required();
  check->add_option("--bound", c.bound, "Longest word examined");
  commands.emplace_back(check, cmd_check_grammar);

  auto* two_sat = app.add_subcommand("reduce-2sat", "2SAT to falsifying NFA with exact counts");
  two_sat->add_option("--formula", c.formula_path, "DIMACS CNF with two literals per clause")
      ->check(CLI::ExistingFile)
      ->required();
  two_sat->add_option("--subset-limit", c.subset_limit, "Largest subset construction allowed");
  two_sat->add_flag("--emit-nfa", c.emit_nfa, "Include the automaton in the output");
  two_sat->add_option("--dot", c.dot_path, "Write the automaton as Graphviz dot");
  commands.emplace_back(two_sat, cmd_reduce_2sat);

  auto* csp = app.add_subcommand("reduce-csp", "Unwrap a binary CSP into a chain with equalities");
  csp->add_option("--csp", c.csp_path, "CSP JSON")->check(CLI::ExistingFile)->required();
  commands.emplace_back(csp, cmd_reduce_csp);

  auto* oracle = app.add_subcommand("oracle", "Brute-force reference values");
  add_model(oracle, false);
  add_target(oracle);
  oracle->add_option("--formula", c.formula_path, "DIMACS CNF")->check(CLI::ExistingFile);
  oracle->add_option("--csp", c.csp_path, "CSP JSON")->check(CLI::ExistingFile);
  commands.emplace_back(oracle, cmd_oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, run] : commands) {
      if (!sub->parsed()) continue;
      const auto start = std::chrono::steady_clock::now();
      const Json result = run(c);
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
      log(c, sub->get_name() + " finished in " + std::to_string(ms.count()) + " ms");
      emit(c, result);
    }
  } catch (const UsageError& e) {
    std::cerr << "cmseq: " << e.what() << "\n";
    return 2;
  } catch (const cmseq::Error& e) {
    std::cout << Json{{"error", cmseq::to_string(e.code())}, {"detail", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << Json{{"error", cmseq::to_string(cmseq::ErrorCode::kInternal)}, {"detail", e.what()}}.dump()
              << "\n";
    return 1;
  }
  return 0;
}
