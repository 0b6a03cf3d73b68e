#pragma once

#include <string>
#include <vector>

#include "foe/ast.hpp"

namespace foe {

/// Static findings on an analytic rule. An empty report means valid.
struct ValidationReport {
    enum class Kind {
        OpenCondition,              // condition has free index variables
        IncoherentTargets,          // numeric and non-numeric targets mixed
        NestedAggregate,            // aggregate inside an aggregate
        ForeignVariableInAggregate, // aggregate body uses a variable that is not its own
        QuantifiedAggregationVariable,
        FreeVariableInTarget,
    };

    struct Finding {
        Kind kind;
        std::string location;  // e.g. "case 2 condition"
        std::string detail;
    };

    std::vector<Finding> findings;

    bool ok() const { return findings.empty(); }
    std::string to_string() const;
};

const char* to_string(ValidationReport::Kind kind);

/// Checks closedness of conditions, target coherence, aggregate restrictions
/// and target variable rules. Findings are reported, never thrown.
ValidationReport validate(const AnalyticRule& rule);

/// Renames quantified variables so that no two quantifiers bind the same
/// name and no name is both free and bound (aggregation variable names are
/// avoided as well). Fresh names are deterministic: base + "__" + counter.
/// Idempotent; satisfaction is preserved.
FoeFormulaPtr standardize_apart(const FoeFormulaPtr& formula);

}  // namespace foe
