#include "foe/printer.hpp"

#include <cmath>

#include "foe/value.hpp"

namespace foe {
namespace {

std::string print_number(double d) {
    // Whole numbers print without exponent or decimal point so that typical
    // thresholds (10800000) stay readable and re-parse exactly.
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.007199254740992e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", d);
        return buf;
    }
    return format_double(d);
}

std::string print_index(const IndexExpr& e) {
    switch (e.kind) {
        case IndexExpr::Kind::Var: return e.name;
        case IndexExpr::Kind::Const: return std::to_string(e.value);
        case IndexExpr::Kind::Curr: return "curr";
        case IndexExpr::Kind::Last: return "last";
        case IndexExpr::Kind::Add:
        case IndexExpr::Kind::Sub: {
            std::string rhs = print_index(*e.rhs);
            if (e.rhs->kind == IndexExpr::Kind::Add || e.rhs->kind == IndexExpr::Kind::Sub)
                rhs = "(" + rhs + ")";
            return print_index(*e.lhs) + (e.kind == IndexExpr::Kind::Add ? "+" : "-") + rhs;
        }
    }
    return {};
}

std::string print_range(const IndexExprPtr& st, const IndexExprPtr& ed) {
    return print_index(*st) + ":" + print_index(*ed);
}

const char* op_text(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "==";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Gt: return ">";
        case CompareOp::Le: return "<=";
        case CompareOp::Ge: return ">=";
    }
    return "";
}

bool is_always_true(const AggCondPtr& c) {
    return c && c->kind == AggCond::Kind::Atom && c->atom->kind == EventExpr::Kind::BoolLit &&
           c->atom->bool_value;
}

std::string print_num(const NumExpr& e);
std::string print_nonnum(const NonNumExpr& e);
std::string print_aggcond(const AggCond& c, int min_prec);

std::string print_cond_suffix(const AggCondPtr& cond) {
    if (is_always_true(cond)) return "";
    return " ; if " + print_aggcond(*cond, 0);
}

std::string print_num(const NumExpr& e) {
    switch (e.kind) {
        case NumExpr::Kind::NumberLit: return print_number(e.number);
        case NumExpr::Kind::Index: return print_index(*e.index);
        case NumExpr::Kind::NumAttr: return "e[" + print_index(*e.index) + "]." + e.attr;
        case NumExpr::Kind::Add:
        case NumExpr::Kind::Sub: {
            std::string rhs = print_num(*e.rhs);
            // a right operand with its own +/- regroups under left
            // associativity, including one folded inside an index expression
            bool rhs_is_sum =
                e.rhs->kind == NumExpr::Kind::Add || e.rhs->kind == NumExpr::Kind::Sub ||
                (e.rhs->kind == NumExpr::Kind::Index &&
                 (e.rhs->index->kind == IndexExpr::Kind::Add ||
                  e.rhs->index->kind == IndexExpr::Kind::Sub));
            if (rhs_is_sum) rhs = "(" + rhs + ")";
            return print_num(*e.lhs) + (e.kind == NumExpr::Kind::Add ? " + " : " - ") + rhs;
        }
        case NumExpr::Kind::Min2:
            return "min2(" + print_num(*e.lhs) + ", " + print_num(*e.rhs) + ")";
        case NumExpr::Kind::Max2:
            return "max2(" + print_num(*e.lhs) + ", " + print_num(*e.rhs) + ")";
        case NumExpr::Kind::Agg: {
            const char* name = e.agg_op == AggOp::Sum   ? "sum"
                               : e.agg_op == AggOp::Avg ? "avg"
                               : e.agg_op == AggOp::Min ? "min"
                                                        : "max";
            return std::string(name) + "(" + print_num(*e.source) + " ; where " + e.agg_var +
                   " = " + print_range(e.range_start, e.range_end) + print_cond_suffix(e.cond) +
                   ")";
        }
        case NumExpr::Kind::Count:
            return "count(" + print_aggcond(*e.cond, 0) + " ; where " + e.agg_var + " = " +
                   print_range(e.range_start, e.range_end) + ")";
        case NumExpr::Kind::CountVal:
            return "countval(" + e.attr + " ; within " +
                   print_range(e.range_start, e.range_end) + ")";
    }
    return {};
}

std::string print_nonnum(const NonNumExpr& e) {
    switch (e.kind) {
        case NonNumExpr::Kind::BoolLit: return e.bool_value ? "true" : "false";
        case NonNumExpr::Kind::StringLit: return quote_string(e.text);
        case NonNumExpr::Kind::NonNumAttr: return "e[" + print_index(*e.index) + "]." + e.attr;
        case NonNumExpr::Kind::Concat:
            return "concat(" + print_nonnum(*e.source) + " ; where " + e.agg_var + " = " +
                   print_range(e.range_start, e.range_end) + print_cond_suffix(e.cond) + ")";
    }
    return {};
}

std::string print_event(const EventExpr& e) {
    switch (e.kind) {
        case EventExpr::Kind::BoolLit: return e.bool_value ? "true" : "false";
        case EventExpr::Kind::NumCompare:
            return print_num(*e.num_lhs) + " " + op_text(e.op) + " " + print_num(*e.num_rhs);
        case EventExpr::Kind::NonNumCompare:
            return print_nonnum(*e.nonnum_lhs) + " " + op_text(e.op) + " " +
                   print_nonnum(*e.nonnum_rhs);
    }
    return {};
}

// Connective precedence: atoms 5, not 4, and 3, or 2.
std::string print_aggcond(const AggCond& c, int min_prec) {
    int prec;
    std::string out;
    switch (c.kind) {
        case AggCond::Kind::Atom:
            prec = 5;
            out = print_event(*c.atom);
            break;
        case AggCond::Kind::Not:
            prec = 4;
            out = "not " + print_aggcond(*c.lhs, 4);
            break;
        case AggCond::Kind::And:
            prec = 3;
            out = print_aggcond(*c.lhs, 3) + " and " + print_aggcond(*c.rhs, 4);
            break;
        case AggCond::Kind::Or:
            prec = 2;
            out = print_aggcond(*c.lhs, 2) + " or " + print_aggcond(*c.rhs, 3);
            break;
        default: return {};
    }
    if (prec < min_prec) return "(" + out + ")";
    return out;
}

// Formula precedence: atoms 5, not 4, and 3, or 2, -> 1 (right-assoc),
// quantifiers 0 (their body extends maximally to the right).
std::string print_formula(const FoeFormula& f, int min_prec) {
    int prec;
    std::string out;
    switch (f.kind) {
        case FoeFormula::Kind::Atom:
            prec = 5;
            out = print_event(*f.atom);
            break;
        case FoeFormula::Kind::Not:
            prec = 4;
            out = "not " + print_formula(*f.lhs, 4);
            break;
        case FoeFormula::Kind::And:
            prec = 3;
            out = print_formula(*f.lhs, 3) + " and " + print_formula(*f.rhs, 4);
            break;
        case FoeFormula::Kind::Or:
            prec = 2;
            out = print_formula(*f.lhs, 2) + " or " + print_formula(*f.rhs, 3);
            break;
        case FoeFormula::Kind::Implies:
            prec = 1;
            out = print_formula(*f.lhs, 2) + " -> " + print_formula(*f.rhs, 1);
            break;
        case FoeFormula::Kind::Forall:
        case FoeFormula::Kind::Exists:
            prec = 0;
            out = std::string(f.kind == FoeFormula::Kind::Forall ? "forall " : "exists ") + f.var +
                  " . (" + print_formula(*f.lhs, 0) + ")";
            break;
        default: return {};
    }
    if (prec < min_prec) return "(" + out + ")";
    return out;
}

}  // namespace

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string to_text(const IndexExpr& e) { return print_index(e); }
std::string to_text(const NumExpr& e) { return print_num(e); }
std::string to_text(const NonNumExpr& e) { return print_nonnum(e); }
std::string to_text(const EventExpr& e) { return print_event(e); }
std::string to_text(const AggCond& c) { return print_aggcond(c, 0); }
std::string to_text(const FoeFormula& f) { return print_formula(f, 0); }

std::string to_text(const TargetExpr& t) {
    return t.is_numeric() ? print_num(*t.num) : print_nonnum(*t.nonnum);
}

std::string to_text(const AnalyticRule& rule) {
    std::string out = "rule {\n";
    for (const RuleCase& c : rule.cases)
        out += "  " + print_formula(*c.condition, 0) + " => " + to_text(c.target) + ";\n";
    out += "  default " + to_text(rule.default_target) + "\n}\n";
    return out;
}

}  // namespace foe
