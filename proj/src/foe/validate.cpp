#include "foe/validate.hpp"

#include <set>

namespace foe {
namespace {

std::string join(const std::set<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

// ---------------------------------------------------------------------------
// standardize_apart

struct Standardizer {
    std::set<std::string> taken;      // names a binder may no longer claim
    std::set<std::string> all_names;  // every name in the formula + fresh ones

    std::string fresh(const std::string& base) {
        for (int n = 1;; ++n) {
            std::string candidate = base + "__" + std::to_string(n);
            if (!taken.count(candidate) && !all_names.count(candidate)) {
                all_names.insert(candidate);
                return candidate;
            }
        }
    }

    FoeFormulaPtr walk(const FoeFormulaPtr& f) {
        switch (f->kind) {
            case FoeFormula::Kind::Atom: return f;
            case FoeFormula::Kind::Not: {
                FoeFormulaPtr body = walk(f->lhs);
                return body == f->lhs ? f : FoeFormula::make_not(body);
            }
            case FoeFormula::Kind::And:
            case FoeFormula::Kind::Or:
            case FoeFormula::Kind::Implies: {
                FoeFormulaPtr l = walk(f->lhs);
                FoeFormulaPtr r = walk(f->rhs);
                if (l == f->lhs && r == f->rhs) return f;
                auto copy = std::make_shared<FoeFormula>(*f);
                copy->lhs = l;
                copy->rhs = r;
                return copy;
            }
            case FoeFormula::Kind::Forall:
            case FoeFormula::Kind::Exists: {
                std::string name = f->var;
                FoeFormulaPtr body = f->lhs;
                if (taken.count(name)) {
                    name = fresh(f->var);
                    body = rename_free(body, f->var, name);
                }
                taken.insert(name);
                FoeFormulaPtr walked = walk(body);
                if (walked == f->lhs && name == f->var) return f;
                auto copy = std::make_shared<FoeFormula>(*f);
                copy->var = name;
                copy->lhs = walked;
                return copy;
            }
        }
        return f;
    }
};

// ---------------------------------------------------------------------------
// validation walks

struct AggregateInfo {
    const std::string* var;  // null for countval
    std::set<std::string> body_vars;
    std::set<std::string> range_vars;
    bool nested = false;
};

void index_vars(const IndexExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == IndexExpr::Kind::Var) out.insert(e->name);
    index_vars(e->lhs, out);
    index_vars(e->rhs, out);
}

void aggcond_free_vars(const AggCondPtr& c, std::set<std::string>& out) {
    if (!c) return;
    if (c->atom) {
        if (c->atom->num_lhs)
            for (const auto& v : free_variables(*c->atom->num_lhs)) out.insert(v);
        if (c->atom->num_rhs)
            for (const auto& v : free_variables(*c->atom->num_rhs)) out.insert(v);
        if (c->atom->nonnum_lhs)
            for (const auto& v : free_variables(*c->atom->nonnum_lhs)) out.insert(v);
        if (c->atom->nonnum_rhs)
            for (const auto& v : free_variables(*c->atom->nonnum_rhs)) out.insert(v);
    }
    aggcond_free_vars(c->lhs, out);
    aggcond_free_vars(c->rhs, out);
}

void scan_num(const NumExprPtr& e, bool inside_aggregate, std::vector<AggregateInfo>& out);
void scan_nonnum(const NonNumExprPtr& e, bool inside_aggregate, std::vector<AggregateInfo>& out);

void scan_event(const EventExprPtr& e, bool inside, std::vector<AggregateInfo>& out) {
    if (!e) return;
    scan_num(e->num_lhs, inside, out);
    scan_num(e->num_rhs, inside, out);
    scan_nonnum(e->nonnum_lhs, inside, out);
    scan_nonnum(e->nonnum_rhs, inside, out);
}

void scan_aggcond(const AggCondPtr& c, bool inside, std::vector<AggregateInfo>& out) {
    if (!c) return;
    scan_event(c->atom, inside, out);
    scan_aggcond(c->lhs, inside, out);
    scan_aggcond(c->rhs, inside, out);
}

void scan_num(const NumExprPtr& e, bool inside, std::vector<AggregateInfo>& out) {
    if (!e) return;
    switch (e->kind) {
        case NumExpr::Kind::NumberLit:
        case NumExpr::Kind::Index:
        case NumExpr::Kind::NumAttr: return;
        case NumExpr::Kind::Add:
        case NumExpr::Kind::Sub:
        case NumExpr::Kind::Min2:
        case NumExpr::Kind::Max2:
            scan_num(e->lhs, inside, out);
            scan_num(e->rhs, inside, out);
            return;
        case NumExpr::Kind::Agg:
        case NumExpr::Kind::Count: {
            AggregateInfo info;
            info.var = &e->agg_var;
            info.nested = inside;
            index_vars(e->range_start, info.range_vars);
            index_vars(e->range_end, info.range_vars);
            if (e->source)
                for (const auto& v : free_variables(*e->source)) info.body_vars.insert(v);
            aggcond_free_vars(e->cond, info.body_vars);
            out.push_back(std::move(info));
            scan_num(e->source, true, out);
            scan_aggcond(e->cond, true, out);
            return;
        }
        case NumExpr::Kind::CountVal: {
            AggregateInfo info;
            info.var = nullptr;
            info.nested = inside;
            index_vars(e->range_start, info.range_vars);
            index_vars(e->range_end, info.range_vars);
            out.push_back(std::move(info));
            return;
        }
    }
}

void scan_nonnum(const NonNumExprPtr& e, bool inside, std::vector<AggregateInfo>& out) {
    if (!e) return;
    switch (e->kind) {
        case NonNumExpr::Kind::BoolLit:
        case NonNumExpr::Kind::StringLit:
        case NonNumExpr::Kind::NonNumAttr: return;
        case NonNumExpr::Kind::Concat: {
            AggregateInfo info;
            info.var = &e->agg_var;
            info.nested = inside;
            index_vars(e->range_start, info.range_vars);
            index_vars(e->range_end, info.range_vars);
            if (e->source)
                for (const auto& v : free_variables(*e->source)) info.body_vars.insert(v);
            aggcond_free_vars(e->cond, info.body_vars);
            out.push_back(std::move(info));
            scan_nonnum(e->source, true, out);
            scan_aggcond(e->cond, true, out);
            return;
        }
    }
}

}  // namespace

const char* to_string(ValidationReport::Kind kind) {
    switch (kind) {
        case ValidationReport::Kind::OpenCondition: return "open condition";
        case ValidationReport::Kind::IncoherentTargets: return "incoherent targets";
        case ValidationReport::Kind::NestedAggregate: return "nested aggregate";
        case ValidationReport::Kind::ForeignVariableInAggregate:
            return "foreign variable in aggregate";
        case ValidationReport::Kind::QuantifiedAggregationVariable:
            return "quantified aggregation variable";
        case ValidationReport::Kind::FreeVariableInTarget: return "free variable in target";
    }
    return "?";
}

std::string ValidationReport::to_string() const {
    std::string out;
    for (const Finding& f : findings) {
        out += foe::to_string(f.kind);
        out += " at ";
        out += f.location;
        if (!f.detail.empty()) {
            out += ": ";
            out += f.detail;
        }
        out += '\n';
    }
    return out;
}

FoeFormulaPtr standardize_apart(const FoeFormulaPtr& formula) {
    Standardizer s;
    s.all_names = all_variable_names(*formula);
    s.taken = free_variables(*formula);
    // Aggregation variables may not be rebound by quantifiers either.
    struct AggVarCollector {
        std::set<std::string>& out;
        void from_formula(const FoeFormulaPtr& f) {
            if (!f) return;
            from_event(f->atom);
            from_formula(f->lhs);
            from_formula(f->rhs);
        }
        void from_event(const EventExprPtr& e) {
            if (!e) return;
            from_num(e->num_lhs);
            from_num(e->num_rhs);
            from_nonnum(e->nonnum_lhs);
            from_nonnum(e->nonnum_rhs);
        }
        void from_cond(const AggCondPtr& c) {
            if (!c) return;
            from_event(c->atom);
            from_cond(c->lhs);
            from_cond(c->rhs);
        }
        void from_num(const NumExprPtr& e) {
            if (!e) return;
            if (!e->agg_var.empty()) out.insert(e->agg_var);
            from_num(e->lhs);
            from_num(e->rhs);
            from_num(e->source);
            from_cond(e->cond);
        }
        void from_nonnum(const NonNumExprPtr& e) {
            if (!e) return;
            if (!e->agg_var.empty()) out.insert(e->agg_var);
            from_nonnum(e->source);
            from_cond(e->cond);
        }
    };
    AggVarCollector{s.taken}.from_formula(formula);
    return s.walk(formula);
}

ValidationReport validate(const AnalyticRule& rule) {
    ValidationReport report;
    auto add = [&](ValidationReport::Kind kind, std::string location, std::string detail) {
        report.findings.push_back({kind, std::move(location), std::move(detail)});
    };

    // Closed conditions.
    for (std::size_t i = 0; i < rule.cases.size(); ++i) {
        std::set<std::string> free = free_variables(*rule.cases[i].condition);
        if (!free.empty())
            add(ValidationReport::Kind::OpenCondition,
                "case " + std::to_string(i + 1) + " condition", join(free));
    }

    // Coherence.
    {
        bool numeric = false, nonnumeric = false;
        for (const RuleCase& c : rule.cases)
            (c.target.is_numeric() ? numeric : nonnumeric) = true;
        (rule.default_target.is_numeric() ? numeric : nonnumeric) = true;
        if (numeric && nonnumeric)
            add(ValidationReport::Kind::IncoherentTargets, "targets",
                "both numeric and non-numeric targets present");
    }

    // Aggregate restrictions inside conditions and targets, plus free
    // variables in targets.
    auto check_aggregates = [&](const std::vector<AggregateInfo>& aggs,
                                const std::string& location) {
        for (const AggregateInfo& a : aggs) {
            if (a.nested)
                add(ValidationReport::Kind::NestedAggregate, location, "");
            std::set<std::string> foreign;
            for (const auto& v : a.body_vars)
                if (!a.var || v != *a.var) foreign.insert(v);
            for (const auto& v : a.range_vars) foreign.insert(v);  // bounds must be variable-free
            if (!foreign.empty())
                add(ValidationReport::Kind::ForeignVariableInAggregate, location, join(foreign));
        }
    };

    // Collect body free vars properly (source plus condition) per aggregate.
    auto aggregates_of_formula = [](const FoeFormulaPtr& f) {
        std::vector<AggregateInfo> out;
        struct Walker {
            std::vector<AggregateInfo>& out;
            void formula(const FoeFormulaPtr& g) {
                if (!g) return;
                event(g->atom);
                formula(g->lhs);
                formula(g->rhs);
            }
            void event(const EventExprPtr& e) {
                if (!e) return;
                scan_num(e->num_lhs, false, out);
                scan_num(e->num_rhs, false, out);
                scan_nonnum(e->nonnum_lhs, false, out);
                scan_nonnum(e->nonnum_rhs, false, out);
            }
        };
        Walker{out}.formula(f);
        return out;
    };

    for (std::size_t i = 0; i < rule.cases.size(); ++i) {
        check_aggregates(aggregates_of_formula(rule.cases[i].condition),
                         "case " + std::to_string(i + 1) + " condition");
    }

    auto target_aggregates = [](const TargetExpr& t) {
        std::vector<AggregateInfo> out;
        if (t.is_numeric())
            scan_num(t.num, false, out);
        else
            scan_nonnum(t.nonnum, false, out);
        return out;
    };
    auto check_target = [&](const TargetExpr& t, const std::string& location) {
        check_aggregates(target_aggregates(t), location);
        std::set<std::string> free =
            t.is_numeric() ? free_variables(*t.num) : free_variables(*t.nonnum);
        if (!free.empty())
            add(ValidationReport::Kind::FreeVariableInTarget, location, join(free));
    };
    for (std::size_t i = 0; i < rule.cases.size(); ++i)
        check_target(rule.cases[i].target, "case " + std::to_string(i + 1) + " target");
    check_target(rule.default_target, "default target");

    // Quantified aggregation variables.
    for (std::size_t i = 0; i < rule.cases.size(); ++i) {
        struct QuantWalk {
            ValidationReport& report;
            std::string location;
            std::set<std::string> quantified;

            void formula(const FoeFormulaPtr& f) {
                if (!f) return;
                if (f->kind == FoeFormula::Kind::Forall || f->kind == FoeFormula::Kind::Exists) {
                    bool inserted = quantified.insert(f->var).second;
                    formula(f->lhs);
                    if (inserted) quantified.erase(f->var);
                    return;
                }
                event(f->atom);
                formula(f->lhs);
                formula(f->rhs);
            }
            void event(const EventExprPtr& e) {
                if (!e) return;
                num(e->num_lhs);
                num(e->num_rhs);
                nonnum(e->nonnum_lhs);
                nonnum(e->nonnum_rhs);
            }
            void cond(const AggCondPtr& c) {
                if (!c) return;
                event(c->atom);
                cond(c->lhs);
                cond(c->rhs);
            }
            void num(const NumExprPtr& e) {
                if (!e) return;
                if ((e->kind == NumExpr::Kind::Agg || e->kind == NumExpr::Kind::Count) &&
                    quantified.count(e->agg_var))
                    report.findings.push_back({ValidationReport::Kind::QuantifiedAggregationVariable,
                                               location, e->agg_var});
                num(e->lhs);
                num(e->rhs);
                num(e->source);
                cond(e->cond);
            }
            void nonnum(const NonNumExprPtr& e) {
                if (!e) return;
                if (e->kind == NonNumExpr::Kind::Concat && quantified.count(e->agg_var))
                    report.findings.push_back({ValidationReport::Kind::QuantifiedAggregationVariable,
                                               location, e->agg_var});
                nonnum(e->source);
                cond(e->cond);
            }
        };
        QuantWalk{report, "case " + std::to_string(i + 1) + " condition", {}}.formula(
            rule.cases[i].condition);
    }

    return report;
}

}  // namespace foe
