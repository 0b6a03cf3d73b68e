#include "foe/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <set>

namespace foe {
namespace {

// Scoped binding nu[x -> d] with restore on exit.
struct Binding {
    Valuation& valuation;
    std::string name;
    std::optional<std::int64_t> previous;

    Binding(Valuation& v, const std::string& var, std::int64_t value) : valuation(v), name(var) {
        auto it = v.find(var);
        if (it != v.end()) {
            previous = it->second;
            it->second = value;
        } else {
            v.emplace(var, value);
        }
    }
    ~Binding() {
        if (previous)
            valuation[name] = *previous;
        else
            valuation.erase(name);
    }
};

std::string distinct_key(const AttributeValue& v) {
    // Kind tag keeps text "5" and number 5 distinct.
    if (v.is_text()) return "t" + v.as_text();
    if (v.is_number()) return "n" + format_double(v.as_number());
    if (v.is_boolean()) return v.as_boolean() ? "b1" : "b0";
    return "m" + std::to_string(v.as_timestamp());
}

std::string stringify(const NonNumValue& v) {
    if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    return "";
}

bool formula_holds(const FoeFormula& f, EvalContext& ctx);

bool aggcond_holds(const AggCond& c, EvalContext& ctx) {
    switch (c.kind) {
        case AggCond::Kind::Atom: return eval_event_expr(*c.atom, ctx);
        case AggCond::Kind::Not: return !aggcond_holds(*c.lhs, ctx);
        case AggCond::Kind::And: return aggcond_holds(*c.lhs, ctx) && aggcond_holds(*c.rhs, ctx);
        case AggCond::Kind::Or: return aggcond_holds(*c.lhs, ctx) || aggcond_holds(*c.rhs, ctx);
    }
    return false;
}

struct Range {
    std::int64_t st;
    std::int64_t ed;
};

Range eval_range(const IndexExprPtr& st, const IndexExprPtr& ed, const EvalContext& ctx) {
    return {eval_index(*st, ctx), eval_index(*ed, ctx)};
}

}  // namespace

std::int64_t eval_index(const IndexExpr& e, const EvalContext& ctx) {
    switch (e.kind) {
        case IndexExpr::Kind::Var: {
            auto it = ctx.valuation.find(e.name);
            if (it == ctx.valuation.end())
                throw UnboundVariable("unbound index variable '" + e.name + "'");
            return it->second;
        }
        case IndexExpr::Kind::Const: return e.value;
        case IndexExpr::Kind::Curr: return static_cast<std::int64_t>(ctx.k);
        case IndexExpr::Kind::Last: return static_cast<std::int64_t>(ctx.trace.events.size());
        case IndexExpr::Kind::Add: return eval_index(*e.lhs, ctx) + eval_index(*e.rhs, ctx);
        case IndexExpr::Kind::Sub: return eval_index(*e.lhs, ctx) - eval_index(*e.rhs, ctx);
    }
    throw std::logic_error("bad index expression");
}

std::vector<std::int64_t> valid_agg_indices(const NumExpr& agg, EvalContext& ctx) {
    Range r = eval_range(agg.range_start, agg.range_end, ctx);
    std::vector<std::int64_t> out;
    for (std::int64_t d = std::max<std::int64_t>(r.st, 1); d <= r.ed; ++d) {
        Binding bind(ctx.valuation, agg.agg_var, d);
        if (agg.cond && !aggcond_holds(*agg.cond, ctx)) continue;
        if (agg.source && !eval_num(*agg.source, ctx).has_value()) continue;
        out.push_back(d);
    }
    return out;
}

std::optional<double> eval_num(const NumExpr& e, EvalContext& ctx) {
    switch (e.kind) {
        case NumExpr::Kind::NumberLit: return e.number;
        case NumExpr::Kind::Index:
            return static_cast<double>(eval_index(*e.index, ctx));
        case NumExpr::Kind::NumAttr: {
            AttributeValue v = attribute(ctx.trace, eval_index(*e.index, ctx), e.attr);
            if (v.is_number()) return v.as_number();
            if (v.is_timestamp()) return static_cast<double>(v.as_timestamp());
            return std::nullopt;
        }
        case NumExpr::Kind::Add:
        case NumExpr::Kind::Sub: {
            std::optional<double> l = eval_num(*e.lhs, ctx);
            std::optional<double> r = eval_num(*e.rhs, ctx);
            if (!l || !r) return std::nullopt;
            return e.kind == NumExpr::Kind::Add ? *l + *r : *l - *r;
        }
        case NumExpr::Kind::Min2:
        case NumExpr::Kind::Max2: {
            std::optional<double> l = eval_num(*e.lhs, ctx);
            std::optional<double> r = eval_num(*e.rhs, ctx);
            if (!l || !r) return std::nullopt;
            return e.kind == NumExpr::Kind::Min2 ? std::min(*l, *r) : std::max(*l, *r);
        }
        case NumExpr::Kind::Agg: {
            std::vector<std::int64_t> idx = valid_agg_indices(e, ctx);
            if (idx.empty()) return std::nullopt;
            double sum = 0;
            double best = 0;
            bool first = true;
            for (std::int64_t d : idx) {
                Binding bind(ctx.valuation, e.agg_var, d);
                double v = *eval_num(*e.source, ctx);  // defined by Idx construction
                sum += v;
                if (first) {
                    best = v;
                    first = false;
                } else if (e.agg_op == AggOp::Min) {
                    best = std::min(best, v);
                } else if (e.agg_op == AggOp::Max) {
                    best = std::max(best, v);
                }
            }
            switch (e.agg_op) {
                case AggOp::Sum: return sum;
                case AggOp::Avg: return sum / static_cast<double>(idx.size());
                case AggOp::Min:
                case AggOp::Max: return best;
            }
            return std::nullopt;
        }
        case NumExpr::Kind::Count: {
            Range r = eval_range(e.range_start, e.range_end, ctx);
            std::int64_t n = 0;
            for (std::int64_t d = std::max<std::int64_t>(r.st, 1); d <= r.ed; ++d) {
                Binding bind(ctx.valuation, e.agg_var, d);
                if (aggcond_holds(*e.cond, ctx)) ++n;
            }
            return static_cast<double>(n);
        }
        case NumExpr::Kind::CountVal: {
            Range r = eval_range(e.range_start, e.range_end, ctx);
            std::set<std::string> distinct;
            for (std::int64_t d = std::max<std::int64_t>(r.st, 1); d <= r.ed; ++d) {
                AttributeValue v = attribute(ctx.trace, d, e.attr);
                // Missing values are not a value and do not count.
                if (!v.is_undefined()) distinct.insert(distinct_key(v));
            }
            return static_cast<double>(distinct.size());
        }
    }
    throw std::logic_error("bad numeric expression");
}

NonNumValue eval_nonnum(const NonNumExpr& e, EvalContext& ctx) {
    switch (e.kind) {
        case NonNumExpr::Kind::BoolLit: return e.bool_value;
        case NonNumExpr::Kind::StringLit: return e.text;
        case NonNumExpr::Kind::NonNumAttr: {
            AttributeValue v = attribute(ctx.trace, eval_index(*e.index, ctx), e.attr);
            if (v.is_text()) return v.as_text();
            if (v.is_boolean()) return v.as_boolean();
            return std::monostate{};
        }
        case NonNumExpr::Kind::Concat: {
            // Base case "" when st > ed; skipped positions contribute "".
            // Unlike the other aggregates, the recursion starts at st itself
            // (a sub-range position only drops out through an undefined
            // source or a false condition).
            Range r = eval_range(e.range_start, e.range_end, ctx);
            std::string out;
            for (std::int64_t d = r.st; d <= r.ed; ++d) {
                Binding bind(ctx.valuation, e.agg_var, d);
                if (e.cond && !aggcond_holds(*e.cond, ctx)) continue;
                NonNumValue v = eval_nonnum(*e.source, ctx);
                if (std::holds_alternative<std::monostate>(v)) continue;
                out += stringify(v);
            }
            return out;
        }
    }
    throw std::logic_error("bad non-numeric expression");
}

bool eval_event_expr(const EventExpr& e, EvalContext& ctx) {
    switch (e.kind) {
        case EventExpr::Kind::BoolLit: return e.bool_value;
        case EventExpr::Kind::NumCompare: {
            std::optional<double> l = eval_num(*e.num_lhs, ctx);
            std::optional<double> r = eval_num(*e.num_rhs, ctx);
            if (!l || !r) return false;
            switch (e.op) {
                case CompareOp::Eq: return *l == *r;
                case CompareOp::Ne: return *l != *r;
                case CompareOp::Lt: return *l < *r;
                case CompareOp::Gt: return *l > *r;
                case CompareOp::Le: return *l <= *r;
                case CompareOp::Ge: return *l >= *r;
            }
            return false;
        }
        case EventExpr::Kind::NonNumCompare: {
            NonNumValue l = eval_nonnum(*e.nonnum_lhs, ctx);
            NonNumValue r = eval_nonnum(*e.nonnum_rhs, ctx);
            if (std::holds_alternative<std::monostate>(l) ||
                std::holds_alternative<std::monostate>(r))
                return false;
            bool equal = l == r;
            return e.op == CompareOp::Eq ? equal : !equal;
        }
    }
    return false;
}

std::optional<double> eval_aggregate(const NumExpr& agg, EvalContext& ctx) {
    return eval_num(agg, ctx);
}

namespace {

bool formula_holds(const FoeFormula& f, EvalContext& ctx) {
    switch (f.kind) {
        case FoeFormula::Kind::Atom: return eval_event_expr(*f.atom, ctx);
        case FoeFormula::Kind::Not: return !formula_holds(*f.lhs, ctx);
        case FoeFormula::Kind::And:
            return formula_holds(*f.lhs, ctx) && formula_holds(*f.rhs, ctx);
        case FoeFormula::Kind::Or:
            return formula_holds(*f.lhs, ctx) || formula_holds(*f.rhs, ctx);
        case FoeFormula::Kind::Implies:
            return !formula_holds(*f.lhs, ctx) || formula_holds(*f.rhs, ctx);
        case FoeFormula::Kind::Forall:
        case FoeFormula::Kind::Exists: {
            // Iteration over 1..|trace| with early exit; extensionally equal
            // to expanding the quantifier into a conjunction/disjunction.
            bool is_exists = f.kind == FoeFormula::Kind::Exists;
            std::int64_t n = static_cast<std::int64_t>(ctx.trace.events.size());
            for (std::int64_t c = 1; c <= n; ++c) {
                Binding bind(ctx.valuation, f.var, c);
                bool holds = formula_holds(*f.lhs, ctx);
                if (is_exists && holds) return true;
                if (!is_exists && !holds) return false;
            }
            return !is_exists;
        }
    }
    return false;
}

AttributeValue eval_target(const TargetExpr& target, EvalContext& ctx) {
    if (target.is_numeric()) {
        std::optional<double> v = eval_num(*target.num, ctx);
        return v ? AttributeValue::number(*v) : AttributeValue::undefined();
    }
    NonNumValue v = eval_nonnum(*target.nonnum, ctx);
    if (std::holds_alternative<std::string>(v))
        return AttributeValue::text(std::get<std::string>(v));
    if (std::holds_alternative<bool>(v)) return AttributeValue::boolean(std::get<bool>(v));
    return AttributeValue::undefined();
}

void check_trace_well_defined(const AnalyticRule& rule, const Trace& trace,
                              std::vector<WellDefinednessViolation>& out) {
    for (std::size_t k = 1; k <= trace.events.size(); ++k) {
        EvalContext ctx(trace, k);
        std::vector<std::size_t> satisfied;
        for (std::size_t i = 0; i < rule.cases.size(); ++i)
            if (formula_holds(*rule.cases[i].condition, ctx)) satisfied.push_back(i);
        if (satisfied.size() < 2) continue;
        std::vector<AttributeValue> values;
        values.reserve(satisfied.size());
        for (std::size_t i : satisfied) values.push_back(eval_target(rule.cases[i].target, ctx));
        for (std::size_t a = 0; a < satisfied.size(); ++a)
            for (std::size_t b = a + 1; b < satisfied.size(); ++b)
                if (!(values[a] == values[b]))
                    out.push_back({trace.id, k, satisfied[a] + 1, satisfied[b] + 1, values[a],
                                   values[b]});
    }
}

}  // namespace

bool satisfies(const FoeFormula& formula, const Trace& trace, std::size_t k) {
    std::set<std::string> free = free_variables(formula);
    if (!free.empty()) {
        std::string names;
        for (const auto& n : free) names += (names.empty() ? "" : ", ") + n;
        throw NotClosed("formula has free variables: " + names);
    }
    EvalContext ctx(trace, k);
    return formula_holds(formula, ctx);
}

AttributeValue apply_rule(const AnalyticRule& rule, const Trace& trace, std::size_t k) {
    EvalContext ctx(trace, k);
    for (const RuleCase& c : rule.cases)
        if (formula_holds(*c.condition, ctx)) return eval_target(c.target, ctx);
    return eval_target(rule.default_target, ctx);
}

WellDefinednessReport check_well_defined_serial(const AnalyticRule& rule, const EventLog& log) {
    WellDefinednessReport report;
    for (const Trace& trace : log.traces())
        check_trace_well_defined(rule, trace, report.violations);
    return report;
}

WellDefinednessReport check_well_defined(const AnalyticRule& rule, const EventLog& log,
                                         int n_threads) {
    const auto& traces = log.traces();
    std::vector<std::vector<WellDefinednessViolation>> per_trace(traces.size());

    int threads = n_threads > 0 ? n_threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (std::size_t i = 0; i < traces.size(); ++i)
        check_trace_well_defined(rule, traces[i], per_trace[i]);

    WellDefinednessReport report;
    for (auto& chunk : per_trace)
        report.violations.insert(report.violations.end(), chunk.begin(), chunk.end());
    return report;
}

}  // namespace foe
