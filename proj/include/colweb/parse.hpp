#pragma once

// Recursive-descent parser for .colw sources. Errors carry line/column and
// the set of tokens that would have been accepted. Predicate arities must be
// consistent within one parse.

#include <string_view>

#include "colweb/ast.hpp"

namespace colweb {

Program parse_program(std::string_view text);
Formula parse_query(std::string_view text);
AgentPath parse_path(std::string_view text);
Term parse_term(std::string_view text);

}  // namespace colweb
