#pragma once

#include <iosfwd>
#include <string>

#include "bifurcat/model.hpp"

namespace bifurcat {

// Loads a user-defined model from a declarative text file.
//
// Format (one directive per line, '#' starts a comment):
//   model  <id>
//   state  <name> <name> ...
//   infected <name> ...
//   param  <name> ...
//   rhs <state> = <expression>
//   dfe <state> = <expression>        (optional; params-only expression)
//
// Expressions support +, -, *, /, ^ (right-associative power), unary minus,
// parentheses, pow(x, y), numeric literals, the constant pi, and any declared
// state or parameter name. Every state needs exactly one rhs line; dfe lines,
// when present, must cover every state and may reference parameters only.
ModelSystem parse_model_file(const std::string& path);
ModelSystem parse_model_text(const std::string& text, const std::string& origin = "<string>");

// Standalone arithmetic-expression evaluation used by the model loader;
// exposed for testing. `vars` maps identifiers to values.
double eval_expression(const std::string& expr,
                       const std::map<std::string, double>& vars);

}  // namespace bifurcat
