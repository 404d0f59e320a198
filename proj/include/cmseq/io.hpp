#pragma once

// Text and JSON formats for models, constraints, grammars and reduction
// inputs. Parse failures throw Error(kParse) with a location hint.

#include <string>
#include <string_view>

#include <json.hpp>

#include "cmseq/equality.hpp"
#include "cmseq/grammar.hpp"
#include "cmseq/markov.hpp"
#include "cmseq/reductions.hpp"

namespace cmseq::io {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path);
Json parse_json(std::string_view text, const std::string& source = "input");

// {"alphabet": [...], "p0": [...], "t": [[...], ...]}, rows = current symbol.
MarkovModel model_from_json(const Json& j);
Json to_json(const MarkovModel& m);
Json to_json(const ChainModel& c);

Json word_to_json(const Alphabet& alphabet, const Word& w);
Word word_from_json(const Alphabet& alphabet, const Json& j);

// {"n": 4, "constraints": [{"i": 1, "j": 4, "sigma": ["b", "a"]}]}. sigma is
// the image of each alphabet symbol in order and needs the alphabet to be
// resolved; without one (alphabet == nullptr) it is only checked for shape.
EqualitySet equalities_from_json(const Json& j, const Alphabet* alphabet);
Json to_json(const EqualitySet& s, const Alphabet& alphabet);

// One rule per line, `S -> A B | 'a'`. Quoted symbols are terminals, bare
// ones nonterminals; `#` starts a comment; the first left-hand side is the
// start symbol. Symbols are numbered in order of first appearance.
Cfg grammar_from_text(std::string_view text);
// {"start": "S", "rules": [{"lhs": "S", "rhs": ["A", "'a'"]}]}; start
// defaults to the first rule's lhs.
Cfg grammar_from_json(const Json& j);
// Picks the format from the content: JSON if it starts with '{'.
Cfg grammar_from_string(std::string_view text);
std::string to_text(const CnfGrammar& g);
Json to_json(const CnfGrammar& g);

// DIMACS CNF restricted to exactly two literals per clause.
TwoSatFormula formula_from_dimacs(std::string_view text);
Json to_json(const Nfa& nfa);

// {"domain": [...], "num_vars": optional, "edges": [{"u": 0, "v": 1, "factor": [[...]]}]}
BinaryCsp csp_from_json(const Json& j);
Json to_json(const BinaryCsp& csp);
Json to_json(const UnwrapResult& u);
Json to_json(const ReductionReport& r);

Json tree_to_json(const CnfGrammar& g, const ParseTree& t);

std::string big_to_string(const BigCount& c);
// A JSON number when the count fits 64 bits, else its decimal string.
Json big_to_json(const BigCount& c);

}  // namespace cmseq::io
