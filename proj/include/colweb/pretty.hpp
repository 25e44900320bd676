#pragma once

// Canonical text form. pretty() output re-parses to a structurally equal
// tree: Succ prints as postfix ', Plus as +, nested groups are parenthesized.

#include <string>

#include "colweb/ast.hpp"

namespace colweb {

std::string pretty(const Term& t);
std::string pretty(const Atom& a);
std::string pretty(const AgentPath& p);
std::string pretty(const Formula& f);
std::string pretty(const Declaration& d);
std::string pretty(const ClassDecl& c);
std::string pretty(const Program& p);

}  // namespace colweb
