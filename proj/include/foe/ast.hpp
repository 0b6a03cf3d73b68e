#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace foe {

// Expression trees are immutable after construction and shared by pointer,
// so parsed rules can be handed to any number of evaluation workers.

struct IndexExpr;
struct NumExpr;
struct NonNumExpr;
struct EventExpr;
struct AggCond;
struct FoeFormula;

using IndexExprPtr = std::shared_ptr<const IndexExpr>;
using NumExprPtr = std::shared_ptr<const NumExpr>;
using NonNumExprPtr = std::shared_ptr<const NonNumExpr>;
using EventExprPtr = std::shared_ptr<const EventExpr>;
using AggCondPtr = std::shared_ptr<const AggCond>;
using FoeFormulaPtr = std::shared_ptr<const FoeFormula>;

/// Index expressions: variables, positive integer constants, the special
/// indices curr/last, and +/- arithmetic over them.
struct IndexExpr {
    enum class Kind { Var, Const, Curr, Last, Add, Sub };

    Kind kind;
    std::string name;       // Var
    std::int64_t value = 0; // Const, always >= 1
    IndexExprPtr lhs, rhs;  // Add, Sub

    static IndexExprPtr var(std::string n);
    static IndexExprPtr constant(std::int64_t v);
    static IndexExprPtr curr();
    static IndexExprPtr last();
    static IndexExprPtr add(IndexExprPtr a, IndexExprPtr b);
    static IndexExprPtr sub(IndexExprPtr a, IndexExprPtr b);
};

enum class AggOp { Sum, Avg, Min, Max };
enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge };

struct NumExpr {
    enum class Kind {
        NumberLit,  // number
        Index,      // index expression used as a number
        NumAttr,    // e[idx].name read as a number
        Add,
        Sub,
        Min2,
        Max2,
        Agg,      // sum/avg/min/max over a range with a condition
        Count,    // number of in-range indices satisfying the condition
        CountVal, // number of distinct defined values of an attribute in range
    };

    Kind kind;
    double number = 0;                    // NumberLit
    IndexExprPtr index;                   // Index, NumAttr
    std::string attr;                     // NumAttr, CountVal
    NumExprPtr lhs, rhs;                  // Add, Sub, Min2, Max2
    AggOp agg_op = AggOp::Sum;            // Agg
    NumExprPtr source;                    // Agg
    std::string agg_var;                  // Agg, Count
    IndexExprPtr range_start, range_end;  // Agg, Count, CountVal (variable-free)
    AggCondPtr cond;                      // Agg, Count

    static NumExprPtr number_lit(double v);
    static NumExprPtr from_index(IndexExprPtr idx);
    static NumExprPtr attr_access(IndexExprPtr idx, std::string attr);
    static NumExprPtr add(NumExprPtr a, NumExprPtr b);
    static NumExprPtr sub(NumExprPtr a, NumExprPtr b);
    static NumExprPtr min2(NumExprPtr a, NumExprPtr b);
    static NumExprPtr max2(NumExprPtr a, NumExprPtr b);
    static NumExprPtr aggregate(AggOp op, NumExprPtr source, std::string var,
                                IndexExprPtr st, IndexExprPtr ed, AggCondPtr cond);
    static NumExprPtr count(AggCondPtr cond, std::string var, IndexExprPtr st, IndexExprPtr ed);
    static NumExprPtr count_val(std::string attr, IndexExprPtr st, IndexExprPtr ed);
};

struct NonNumExpr {
    enum class Kind { BoolLit, StringLit, NonNumAttr, Concat };

    Kind kind;
    bool bool_value = false;              // BoolLit
    std::string text;                     // StringLit
    IndexExprPtr index;                   // NonNumAttr
    std::string attr;                     // NonNumAttr
    NonNumExprPtr source;                 // Concat
    std::string agg_var;                  // Concat
    IndexExprPtr range_start, range_end;  // Concat
    AggCondPtr cond;                      // Concat

    static NonNumExprPtr bool_lit(bool v);
    static NonNumExprPtr string_lit(std::string s);
    static NonNumExprPtr attr_access(IndexExprPtr idx, std::string attr);
    static NonNumExprPtr concat(NonNumExprPtr source, std::string var, IndexExprPtr st,
                                IndexExprPtr ed, AggCondPtr cond);
};

struct EventExpr {
    enum class Kind { BoolLit, NumCompare, NonNumCompare };

    Kind kind;
    bool bool_value = false;
    CompareOp op = CompareOp::Eq;
    NumExprPtr num_lhs, num_rhs;          // NumCompare
    NonNumExprPtr nonnum_lhs, nonnum_rhs; // NonNumCompare (op is Eq or Ne)

    static EventExprPtr bool_lit(bool v);
    static EventExprPtr num_compare(CompareOp op, NumExprPtr a, NumExprPtr b);
    static EventExprPtr nonnum_compare(CompareOp op, NonNumExprPtr a, NonNumExprPtr b);
};

/// Quantifier-free boolean combinations of event expressions; the filter of
/// an aggregate. May reference only the aggregate's own variable.
struct AggCond {
    enum class Kind { Atom, Not, And, Or };

    Kind kind;
    EventExprPtr atom;
    AggCondPtr lhs, rhs;  // Not uses lhs only

    static AggCondPtr make_atom(EventExprPtr e);
    static AggCondPtr make_not(AggCondPtr a);
    static AggCondPtr make_and(AggCondPtr a, AggCondPtr b);
    static AggCondPtr make_or(AggCondPtr a, AggCondPtr b);

    /// The unconditional filter: a bare `true` atom.
    static AggCondPtr always();
};

struct FoeFormula {
    enum class Kind { Atom, Not, And, Or, Implies, Forall, Exists };

    Kind kind;
    EventExprPtr atom;
    FoeFormulaPtr lhs, rhs;  // Not and quantifiers use lhs as the body
    std::string var;         // Forall, Exists

    static FoeFormulaPtr make_atom(EventExprPtr e);
    static FoeFormulaPtr make_not(FoeFormulaPtr f);
    static FoeFormulaPtr make_and(FoeFormulaPtr a, FoeFormulaPtr b);
    static FoeFormulaPtr make_or(FoeFormulaPtr a, FoeFormulaPtr b);
    static FoeFormulaPtr implies(FoeFormulaPtr a, FoeFormulaPtr b);
    static FoeFormulaPtr forall(std::string var, FoeFormulaPtr body);
    static FoeFormulaPtr exists(std::string var, FoeFormulaPtr body);
};

enum class RuleKind { Numeric, NonNumeric };

/// A target is either a numeric or a non-numeric expression; exactly one of
/// the two pointers is set.
struct TargetExpr {
    NumExprPtr num;
    NonNumExprPtr nonnum;

    bool is_numeric() const { return num != nullptr; }
    RuleKind kind() const { return num ? RuleKind::Numeric : RuleKind::NonNumeric; }

    static TargetExpr numeric(NumExprPtr e) { return TargetExpr{std::move(e), nullptr}; }
    static TargetExpr non_numeric(NonNumExprPtr e) { return TargetExpr{nullptr, std::move(e)}; }
};

struct RuleCase {
    FoeFormulaPtr condition;
    TargetExpr target;
};

/// An ordered list of condition => target cases plus a default target.
/// Cases fire in declaration order; the first satisfied condition wins.
struct AnalyticRule {
    std::vector<RuleCase> cases;
    TargetExpr default_target;

    RuleKind kind() const { return default_target.kind(); }
};

// Structural equality (deep compare; pointer identity is not required).
bool equals(const IndexExpr& a, const IndexExpr& b);
bool equals(const NumExpr& a, const NumExpr& b);
bool equals(const NonNumExpr& a, const NonNumExpr& b);
bool equals(const EventExpr& a, const EventExpr& b);
bool equals(const AggCond& a, const AggCond& b);
bool equals(const FoeFormula& a, const FoeFormula& b);
bool equals(const TargetExpr& a, const TargetExpr& b);
bool equals(const AnalyticRule& a, const AnalyticRule& b);

/// Free index variables of a formula. Quantified variables and aggregation
/// variables (within their own aggregate) are bound; anything else is free.
std::set<std::string> free_variables(const FoeFormula& f);
std::set<std::string> free_variables(const NumExpr& e);
std::set<std::string> free_variables(const NonNumExpr& e);

/// Substitutes the free occurrences of `var` by the constant `value`,
/// leaving occurrences shadowed by a quantifier or aggregate untouched.
FoeFormulaPtr substitute(const FoeFormulaPtr& f, const std::string& var, std::int64_t value);

/// Renames the free occurrences of `from` to `to` (capture is the caller's
/// concern; standardize_apart picks fresh names).
FoeFormulaPtr rename_free(const FoeFormulaPtr& f, const std::string& from, const std::string& to);

/// Every variable name mentioned anywhere in the formula: free, quantified,
/// or used as an aggregation variable.
std::set<std::string> all_variable_names(const FoeFormula& f);

}  // namespace foe
