#pragma once

#include <string>

#include "qtl/syntax.hpp"

namespace qtl {

/// Renders a program in concrete syntax such that parsing the output gives back
/// a structurally equal AST.
std::string format_program(const Program& p);
std::string format_expr(const Expr& e);
std::string format_type(const TypeAnnotation& t);

}  // namespace qtl
