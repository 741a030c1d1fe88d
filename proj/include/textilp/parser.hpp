#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "textilp/logic.hpp"

namespace textilp {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
          line(line_) {}
};

// Ground atoms, one per '.'-terminated statement; pos(...)/neg(...)
// wrappers mark examples; '%' starts a comment. A bias, when given,
// is used to check arities.
FactBase parse_facts(std::string_view text, const BiasSpec* bias = nullptr);

// head_pred/2, body_pred/2, type/2, direction/2, max_vars/1, max_body/1,
// max_clauses/1 directives. Missing global constraints take the defaults
// (6, 6, 4). Head directions default to all-in; body directions are
// required.
BiasSpec parse_bias(std::string_view text);

// Newline-separated clauses (or bare facts) in the render() syntax.
Program parse_program(std::string_view text);

Clause parse_clause(std::string_view text);
Atom parse_atom(std::string_view text);

} // namespace textilp
