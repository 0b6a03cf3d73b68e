#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "foe/ast.hpp"
#include "foe/event_log.hpp"

namespace foe {

/// A variable used during evaluation without a binding. Validation rules
/// this out for closed conditions, so hitting it is a programming error.
struct UnboundVariable : std::logic_error {
    using std::logic_error::logic_error;
};

/// satisfies() was handed a formula with free variables.
struct NotClosed : std::logic_error {
    using std::logic_error::logic_error;
};

/// Index variable bindings, all values >= 1.
using Valuation = std::map<std::string, std::int64_t>;

/// Everything an expression is interpreted against: the trace, the
/// considered prefix length k (1 <= k <= |trace|), and the valuation.
struct EvalContext {
    const Trace& trace;
    std::size_t k;
    Valuation valuation;

    EvalContext(const Trace& t, std::size_t prefix_len) : trace(t), k(prefix_len) {
        if (prefix_len < 1 || prefix_len > t.events.size())
            throw std::invalid_argument("prefix length " + std::to_string(prefix_len) +
                                        " out of range for trace of length " +
                                        std::to_string(t.events.size()));
    }
};

/// Non-numeric evaluation result: undefined, text, or boolean.
using NonNumValue = std::variant<std::monostate, std::string, bool>;

/// curr -> k, last -> |trace|, constants and arithmetic as usual. The result
/// may be <= 0 or beyond the trace; attribute accessors turn that into
/// Undefined.
std::int64_t eval_index(const IndexExpr& e, const EvalContext& ctx);

/// Numeric interpretation; nullopt is the undefined value. Attribute reads
/// accept numbers and timestamps (as milliseconds); anything else is
/// undefined, and arithmetic over undefined stays undefined.
std::optional<double> eval_num(const NumExpr& e, EvalContext& ctx);

/// Non-numeric interpretation: text and booleans pass, everything else is
/// undefined.
NonNumValue eval_nonnum(const NonNumExpr& e, EvalContext& ctx);

/// Comparisons: any side undefined makes the comparison false (also for !=).
bool eval_event_expr(const EventExpr& e, EvalContext& ctx);

/// The set Idx of valid aggregation indices of a sum/avg/min/max aggregate:
/// positions within the range whose condition holds and whose source is
/// defined, in ascending order.
std::vector<std::int64_t> valid_agg_indices(const NumExpr& agg, EvalContext& ctx);

/// Evaluates an aggregate node (sum/avg/min/max/count/countval). Present as
/// a narrow wrapper over eval_num for tests and tooling.
std::optional<double> eval_aggregate(const NumExpr& agg, EvalContext& ctx);

/// Satisfaction of a closed formula for (trace, k). Quantifiers range over
/// the whole trace, 1..|trace|, with short-circuit iteration.
/// Throws NotClosed when free variables remain.
bool satisfies(const FoeFormula& formula, const Trace& trace, std::size_t k);

/// Applies an analytic rule: the first satisfied condition's target value,
/// or the default target's value. Numeric rules yield Number/Undefined,
/// non-numeric rules Text/Boolean/Undefined.
AttributeValue apply_rule(const AnalyticRule& rule, const Trace& trace, std::size_t k);

struct WellDefinednessViolation {
    std::string trace_id;
    std::size_t k;
    std::size_t case_a;  // 1-based indices of the clashing cases
    std::size_t case_b;
    AttributeValue value_a;
    AttributeValue value_b;
};

struct WellDefinednessReport {
    std::vector<WellDefinednessViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks that any two simultaneously satisfied conditions agree on the
/// evaluated target for every trace and every k in 1..|trace|.
/// n_threads == 0 means use the OpenMP default.
WellDefinednessReport check_well_defined(const AnalyticRule& rule, const EventLog& log,
                                         int n_threads = 0);

/// Serial reference for check_well_defined, kept for differential tests.
WellDefinednessReport check_well_defined_serial(const AnalyticRule& rule, const EventLog& log);

}  // namespace foe
