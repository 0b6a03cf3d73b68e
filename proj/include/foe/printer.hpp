#pragma once

#include <string>

#include "foe/ast.hpp"

namespace foe {

// Deterministic pretty-printer. parse(print(x)) reproduces x structurally;
// parentheses are emitted only where re-parsing would otherwise regroup.

std::string to_text(const IndexExpr& e);
std::string to_text(const NumExpr& e);
std::string to_text(const NonNumExpr& e);
std::string to_text(const EventExpr& e);
std::string to_text(const AggCond& c);
std::string to_text(const FoeFormula& f);
std::string to_text(const TargetExpr& t);
std::string to_text(const AnalyticRule& rule);

/// Quotes and escapes a string literal the way the rule syntax expects.
std::string quote_string(const std::string& s);

}  // namespace foe
