#ifndef KCP_PARSER_HPP
#define KCP_PARSER_HPP

#include <string>
#include <vector>

#include "kcp/ast.hpp"

namespace kcp {

struct SourceText {
  std::string name;  // file name, for diagnostics
  std::string text;
};

// Parses the concatenation of background (.bk) and plan (.plan) sources into
// one Program. Statements outside any section are background Datalog; the
// section keywords `fluents:`, `actions:`, `initially:`, `always:`, `goal:`
// and the `noConcurrency.` flag come from plan sources. Throws ParseError on
// malformed input, duplicate declarations with different arity, or use of an
// undeclared fluent/action in head position.
Program parse_program(const std::vector<SourceText>& sources);

Program parse_program(const std::string& background, const std::string& plan);

}  // namespace kcp

#endif
