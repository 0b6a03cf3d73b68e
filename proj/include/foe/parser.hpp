#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "foe/ast.hpp"

namespace foe {

/// First-failure parse diagnostic. Positions are 1-based.
struct ParseError : std::runtime_error {
    ParseError(std::string msg, int line, int column, std::vector<std::string> expected,
               std::string found);

    int line;
    int column;
    std::vector<std::string> expected;
    std::string found;
};

/// Parses a full `rule { cond => target; ...; default target }` block.
/// Condition variables are standardized apart; static validation is the
/// caller's decision.
AnalyticRule parse_rule(const std::string& text);

/// Parses a bare condition formula (same lexical rules as parse_rule).
FoeFormulaPtr parse_formula(const std::string& text);

/// Reads and parses a `.foe` rule file.
AnalyticRule parse_rule_file(const std::string& path);

}  // namespace foe
