#include "foe/ast.hpp"

#include <functional>

namespace foe {

IndexExprPtr IndexExpr::var(std::string n) {
    auto p = std::make_shared<IndexExpr>();
    p->kind = Kind::Var;
    p->name = std::move(n);
    return p;
}
IndexExprPtr IndexExpr::constant(std::int64_t v) {
    auto p = std::make_shared<IndexExpr>();
    p->kind = Kind::Const;
    p->value = v;
    return p;
}
IndexExprPtr IndexExpr::curr() {
    auto p = std::make_shared<IndexExpr>();
    p->kind = Kind::Curr;
    return p;
}
IndexExprPtr IndexExpr::last() {
    auto p = std::make_shared<IndexExpr>();
    p->kind = Kind::Last;
    return p;
}
IndexExprPtr IndexExpr::add(IndexExprPtr a, IndexExprPtr b) {
    auto p = std::make_shared<IndexExpr>();
    p->kind = Kind::Add;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
IndexExprPtr IndexExpr::sub(IndexExprPtr a, IndexExprPtr b) {
    auto p = std::make_shared<IndexExpr>();
    p->kind = Kind::Sub;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}

NumExprPtr NumExpr::number_lit(double v) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::NumberLit;
    p->number = v;
    return p;
}
NumExprPtr NumExpr::from_index(IndexExprPtr idx) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::Index;
    p->index = std::move(idx);
    return p;
}
NumExprPtr NumExpr::attr_access(IndexExprPtr idx, std::string attr) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::NumAttr;
    p->index = std::move(idx);
    p->attr = std::move(attr);
    return p;
}
NumExprPtr NumExpr::add(NumExprPtr a, NumExprPtr b) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::Add;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
NumExprPtr NumExpr::sub(NumExprPtr a, NumExprPtr b) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::Sub;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
NumExprPtr NumExpr::min2(NumExprPtr a, NumExprPtr b) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::Min2;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
NumExprPtr NumExpr::max2(NumExprPtr a, NumExprPtr b) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::Max2;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
NumExprPtr NumExpr::aggregate(AggOp op, NumExprPtr source, std::string var, IndexExprPtr st,
                              IndexExprPtr ed, AggCondPtr cond) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::Agg;
    p->agg_op = op;
    p->source = std::move(source);
    p->agg_var = std::move(var);
    p->range_start = std::move(st);
    p->range_end = std::move(ed);
    p->cond = std::move(cond);
    return p;
}
NumExprPtr NumExpr::count(AggCondPtr cond, std::string var, IndexExprPtr st, IndexExprPtr ed) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::Count;
    p->cond = std::move(cond);
    p->agg_var = std::move(var);
    p->range_start = std::move(st);
    p->range_end = std::move(ed);
    return p;
}
NumExprPtr NumExpr::count_val(std::string attr, IndexExprPtr st, IndexExprPtr ed) {
    auto p = std::make_shared<NumExpr>();
    p->kind = Kind::CountVal;
    p->attr = std::move(attr);
    p->range_start = std::move(st);
    p->range_end = std::move(ed);
    return p;
}

NonNumExprPtr NonNumExpr::bool_lit(bool v) {
    auto p = std::make_shared<NonNumExpr>();
    p->kind = Kind::BoolLit;
    p->bool_value = v;
    return p;
}
NonNumExprPtr NonNumExpr::string_lit(std::string s) {
    auto p = std::make_shared<NonNumExpr>();
    p->kind = Kind::StringLit;
    p->text = std::move(s);
    return p;
}
NonNumExprPtr NonNumExpr::attr_access(IndexExprPtr idx, std::string attr) {
    auto p = std::make_shared<NonNumExpr>();
    p->kind = Kind::NonNumAttr;
    p->index = std::move(idx);
    p->attr = std::move(attr);
    return p;
}
NonNumExprPtr NonNumExpr::concat(NonNumExprPtr source, std::string var, IndexExprPtr st,
                                 IndexExprPtr ed, AggCondPtr cond) {
    auto p = std::make_shared<NonNumExpr>();
    p->kind = Kind::Concat;
    p->source = std::move(source);
    p->agg_var = std::move(var);
    p->range_start = std::move(st);
    p->range_end = std::move(ed);
    p->cond = std::move(cond);
    return p;
}

EventExprPtr EventExpr::bool_lit(bool v) {
    auto p = std::make_shared<EventExpr>();
    p->kind = Kind::BoolLit;
    p->bool_value = v;
    return p;
}
EventExprPtr EventExpr::num_compare(CompareOp op, NumExprPtr a, NumExprPtr b) {
    auto p = std::make_shared<EventExpr>();
    p->kind = Kind::NumCompare;
    p->op = op;
    p->num_lhs = std::move(a);
    p->num_rhs = std::move(b);
    return p;
}
EventExprPtr EventExpr::nonnum_compare(CompareOp op, NonNumExprPtr a, NonNumExprPtr b) {
    auto p = std::make_shared<EventExpr>();
    p->kind = Kind::NonNumCompare;
    p->op = op;
    p->nonnum_lhs = std::move(a);
    p->nonnum_rhs = std::move(b);
    return p;
}

AggCondPtr AggCond::make_atom(EventExprPtr e) {
    auto p = std::make_shared<AggCond>();
    p->kind = Kind::Atom;
    p->atom = std::move(e);
    return p;
}
AggCondPtr AggCond::make_not(AggCondPtr a) {
    auto p = std::make_shared<AggCond>();
    p->kind = Kind::Not;
    p->lhs = std::move(a);
    return p;
}
AggCondPtr AggCond::make_and(AggCondPtr a, AggCondPtr b) {
    auto p = std::make_shared<AggCond>();
    p->kind = Kind::And;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
AggCondPtr AggCond::make_or(AggCondPtr a, AggCondPtr b) {
    auto p = std::make_shared<AggCond>();
    p->kind = Kind::Or;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
AggCondPtr AggCond::always() { return make_atom(EventExpr::bool_lit(true)); }

FoeFormulaPtr FoeFormula::make_atom(EventExprPtr e) {
    auto p = std::make_shared<FoeFormula>();
    p->kind = Kind::Atom;
    p->atom = std::move(e);
    return p;
}
FoeFormulaPtr FoeFormula::make_not(FoeFormulaPtr f) {
    auto p = std::make_shared<FoeFormula>();
    p->kind = Kind::Not;
    p->lhs = std::move(f);
    return p;
}
FoeFormulaPtr FoeFormula::make_and(FoeFormulaPtr a, FoeFormulaPtr b) {
    auto p = std::make_shared<FoeFormula>();
    p->kind = Kind::And;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
FoeFormulaPtr FoeFormula::make_or(FoeFormulaPtr a, FoeFormulaPtr b) {
    auto p = std::make_shared<FoeFormula>();
    p->kind = Kind::Or;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
FoeFormulaPtr FoeFormula::implies(FoeFormulaPtr a, FoeFormulaPtr b) {
    auto p = std::make_shared<FoeFormula>();
    p->kind = Kind::Implies;
    p->lhs = std::move(a);
    p->rhs = std::move(b);
    return p;
}
FoeFormulaPtr FoeFormula::forall(std::string var, FoeFormulaPtr body) {
    auto p = std::make_shared<FoeFormula>();
    p->kind = Kind::Forall;
    p->var = std::move(var);
    p->lhs = std::move(body);
    return p;
}
FoeFormulaPtr FoeFormula::exists(std::string var, FoeFormulaPtr body) {
    auto p = std::make_shared<FoeFormula>();
    p->kind = Kind::Exists;
    p->var = std::move(var);
    p->lhs = std::move(body);
    return p;
}

namespace {

bool eq(const IndexExprPtr& a, const IndexExprPtr& b) {
    if (!a || !b) return a == b;
    return equals(*a, *b);
}
bool eq(const NumExprPtr& a, const NumExprPtr& b) {
    if (!a || !b) return a == b;
    return equals(*a, *b);
}
bool eq(const NonNumExprPtr& a, const NonNumExprPtr& b) {
    if (!a || !b) return a == b;
    return equals(*a, *b);
}
bool eq(const EventExprPtr& a, const EventExprPtr& b) {
    if (!a || !b) return a == b;
    return equals(*a, *b);
}
bool eq(const AggCondPtr& a, const AggCondPtr& b) {
    if (!a || !b) return a == b;
    return equals(*a, *b);
}
bool eq(const FoeFormulaPtr& a, const FoeFormulaPtr& b) {
    if (!a || !b) return a == b;
    return equals(*a, *b);
}

}  // namespace

bool equals(const IndexExpr& a, const IndexExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case IndexExpr::Kind::Var: return a.name == b.name;
        case IndexExpr::Kind::Const: return a.value == b.value;
        case IndexExpr::Kind::Curr:
        case IndexExpr::Kind::Last: return true;
        case IndexExpr::Kind::Add:
        case IndexExpr::Kind::Sub: return eq(a.lhs, b.lhs) && eq(a.rhs, b.rhs);
    }
    return false;
}

bool equals(const NumExpr& a, const NumExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NumExpr::Kind::NumberLit: return a.number == b.number;
        case NumExpr::Kind::Index: return eq(a.index, b.index);
        case NumExpr::Kind::NumAttr: return a.attr == b.attr && eq(a.index, b.index);
        case NumExpr::Kind::Add:
        case NumExpr::Kind::Sub:
        case NumExpr::Kind::Min2:
        case NumExpr::Kind::Max2: return eq(a.lhs, b.lhs) && eq(a.rhs, b.rhs);
        case NumExpr::Kind::Agg:
            return a.agg_op == b.agg_op && a.agg_var == b.agg_var && eq(a.source, b.source) &&
                   eq(a.range_start, b.range_start) && eq(a.range_end, b.range_end) &&
                   eq(a.cond, b.cond);
        case NumExpr::Kind::Count:
            return a.agg_var == b.agg_var && eq(a.cond, b.cond) &&
                   eq(a.range_start, b.range_start) && eq(a.range_end, b.range_end);
        case NumExpr::Kind::CountVal:
            return a.attr == b.attr && eq(a.range_start, b.range_start) &&
                   eq(a.range_end, b.range_end);
    }
    return false;
}

bool equals(const NonNumExpr& a, const NonNumExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NonNumExpr::Kind::BoolLit: return a.bool_value == b.bool_value;
        case NonNumExpr::Kind::StringLit: return a.text == b.text;
        case NonNumExpr::Kind::NonNumAttr: return a.attr == b.attr && eq(a.index, b.index);
        case NonNumExpr::Kind::Concat:
            return a.agg_var == b.agg_var && eq(a.source, b.source) &&
                   eq(a.range_start, b.range_start) && eq(a.range_end, b.range_end) &&
                   eq(a.cond, b.cond);
    }
    return false;
}

bool equals(const EventExpr& a, const EventExpr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case EventExpr::Kind::BoolLit: return a.bool_value == b.bool_value;
        case EventExpr::Kind::NumCompare:
            return a.op == b.op && eq(a.num_lhs, b.num_lhs) && eq(a.num_rhs, b.num_rhs);
        case EventExpr::Kind::NonNumCompare:
            return a.op == b.op && eq(a.nonnum_lhs, b.nonnum_lhs) && eq(a.nonnum_rhs, b.nonnum_rhs);
    }
    return false;
}

bool equals(const AggCond& a, const AggCond& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case AggCond::Kind::Atom: return eq(a.atom, b.atom);
        case AggCond::Kind::Not: return eq(a.lhs, b.lhs);
        case AggCond::Kind::And:
        case AggCond::Kind::Or: return eq(a.lhs, b.lhs) && eq(a.rhs, b.rhs);
    }
    return false;
}

bool equals(const FoeFormula& a, const FoeFormula& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case FoeFormula::Kind::Atom: return eq(a.atom, b.atom);
        case FoeFormula::Kind::Not: return eq(a.lhs, b.lhs);
        case FoeFormula::Kind::And:
        case FoeFormula::Kind::Or:
        case FoeFormula::Kind::Implies: return eq(a.lhs, b.lhs) && eq(a.rhs, b.rhs);
        case FoeFormula::Kind::Forall:
        case FoeFormula::Kind::Exists: return a.var == b.var && eq(a.lhs, b.lhs);
    }
    return false;
}

bool equals(const TargetExpr& a, const TargetExpr& b) {
    if (a.is_numeric() != b.is_numeric()) return false;
    return a.is_numeric() ? equals(*a.num, *b.num) : equals(*a.nonnum, *b.nonnum);
}

bool equals(const AnalyticRule& a, const AnalyticRule& b) {
    if (a.cases.size() != b.cases.size()) return false;
    for (std::size_t i = 0; i < a.cases.size(); ++i) {
        if (!eq(a.cases[i].condition, b.cases[i].condition)) return false;
        if (!equals(a.cases[i].target, b.cases[i].target)) return false;
    }
    return equals(a.default_target, b.default_target);
}

// ---------------------------------------------------------------------------
// Free-variable mapping. One generic traversal drives substitution, renaming
// and free-variable collection; `bound` carries the names captured by
// enclosing quantifiers or aggregates.

namespace {

using VarFn = std::function<IndexExprPtr(const std::string&)>;

IndexExprPtr map_index(const IndexExprPtr& e, const VarFn& fn, std::set<std::string>& bound) {
    if (!e) return e;
    switch (e->kind) {
        case IndexExpr::Kind::Var: {
            if (bound.count(e->name)) return e;
            if (IndexExprPtr repl = fn(e->name)) return repl;
            return e;
        }
        case IndexExpr::Kind::Const:
        case IndexExpr::Kind::Curr:
        case IndexExpr::Kind::Last: return e;
        case IndexExpr::Kind::Add:
        case IndexExpr::Kind::Sub: {
            IndexExprPtr l = map_index(e->lhs, fn, bound);
            IndexExprPtr r = map_index(e->rhs, fn, bound);
            if (l == e->lhs && r == e->rhs) return e;
            return e->kind == IndexExpr::Kind::Add ? IndexExpr::add(l, r) : IndexExpr::sub(l, r);
        }
    }
    return e;
}

NumExprPtr map_num(const NumExprPtr& e, const VarFn& fn, std::set<std::string>& bound);
NonNumExprPtr map_nonnum(const NonNumExprPtr& e, const VarFn& fn, std::set<std::string>& bound);

EventExprPtr map_event(const EventExprPtr& e, const VarFn& fn, std::set<std::string>& bound) {
    if (!e || e->kind == EventExpr::Kind::BoolLit) return e;
    if (e->kind == EventExpr::Kind::NumCompare) {
        NumExprPtr l = map_num(e->num_lhs, fn, bound);
        NumExprPtr r = map_num(e->num_rhs, fn, bound);
        if (l == e->num_lhs && r == e->num_rhs) return e;
        return EventExpr::num_compare(e->op, l, r);
    }
    NonNumExprPtr l = map_nonnum(e->nonnum_lhs, fn, bound);
    NonNumExprPtr r = map_nonnum(e->nonnum_rhs, fn, bound);
    if (l == e->nonnum_lhs && r == e->nonnum_rhs) return e;
    return EventExpr::nonnum_compare(e->op, l, r);
}

AggCondPtr map_aggcond(const AggCondPtr& c, const VarFn& fn, std::set<std::string>& bound) {
    if (!c) return c;
    switch (c->kind) {
        case AggCond::Kind::Atom: {
            EventExprPtr a = map_event(c->atom, fn, bound);
            return a == c->atom ? c : AggCond::make_atom(a);
        }
        case AggCond::Kind::Not: {
            AggCondPtr l = map_aggcond(c->lhs, fn, bound);
            return l == c->lhs ? c : AggCond::make_not(l);
        }
        case AggCond::Kind::And:
        case AggCond::Kind::Or: {
            AggCondPtr l = map_aggcond(c->lhs, fn, bound);
            AggCondPtr r = map_aggcond(c->rhs, fn, bound);
            if (l == c->lhs && r == c->rhs) return c;
            return c->kind == AggCond::Kind::And ? AggCond::make_and(l, r) : AggCond::make_or(l, r);
        }
    }
    return c;
}

NumExprPtr map_num(const NumExprPtr& e, const VarFn& fn, std::set<std::string>& bound) {
    if (!e) return e;
    switch (e->kind) {
        case NumExpr::Kind::NumberLit: return e;
        case NumExpr::Kind::Index: {
            IndexExprPtr i = map_index(e->index, fn, bound);
            return i == e->index ? e : NumExpr::from_index(i);
        }
        case NumExpr::Kind::NumAttr: {
            IndexExprPtr i = map_index(e->index, fn, bound);
            return i == e->index ? e : NumExpr::attr_access(i, e->attr);
        }
        case NumExpr::Kind::Add:
        case NumExpr::Kind::Sub:
        case NumExpr::Kind::Min2:
        case NumExpr::Kind::Max2: {
            NumExprPtr l = map_num(e->lhs, fn, bound);
            NumExprPtr r = map_num(e->rhs, fn, bound);
            if (l == e->lhs && r == e->rhs) return e;
            auto copy = std::make_shared<NumExpr>(*e);
            copy->lhs = l;
            copy->rhs = r;
            return copy;
        }
        case NumExpr::Kind::Agg:
        case NumExpr::Kind::Count: {
            IndexExprPtr st = map_index(e->range_start, fn, bound);
            IndexExprPtr ed = map_index(e->range_end, fn, bound);
            bool inserted = bound.insert(e->agg_var).second;
            NumExprPtr src = map_num(e->source, fn, bound);
            AggCondPtr cond = map_aggcond(e->cond, fn, bound);
            if (inserted) bound.erase(e->agg_var);
            if (st == e->range_start && ed == e->range_end && src == e->source && cond == e->cond)
                return e;
            auto copy = std::make_shared<NumExpr>(*e);
            copy->range_start = st;
            copy->range_end = ed;
            copy->source = src;
            copy->cond = cond;
            return copy;
        }
        case NumExpr::Kind::CountVal: {
            IndexExprPtr st = map_index(e->range_start, fn, bound);
            IndexExprPtr ed = map_index(e->range_end, fn, bound);
            if (st == e->range_start && ed == e->range_end) return e;
            return NumExpr::count_val(e->attr, st, ed);
        }
    }
    return e;
}

NonNumExprPtr map_nonnum(const NonNumExprPtr& e, const VarFn& fn, std::set<std::string>& bound) {
    if (!e) return e;
    switch (e->kind) {
        case NonNumExpr::Kind::BoolLit:
        case NonNumExpr::Kind::StringLit: return e;
        case NonNumExpr::Kind::NonNumAttr: {
            IndexExprPtr i = map_index(e->index, fn, bound);
            return i == e->index ? e : NonNumExpr::attr_access(i, e->attr);
        }
        case NonNumExpr::Kind::Concat: {
            IndexExprPtr st = map_index(e->range_start, fn, bound);
            IndexExprPtr ed = map_index(e->range_end, fn, bound);
            bool inserted = bound.insert(e->agg_var).second;
            NonNumExprPtr src = map_nonnum(e->source, fn, bound);
            AggCondPtr cond = map_aggcond(e->cond, fn, bound);
            if (inserted) bound.erase(e->agg_var);
            if (st == e->range_start && ed == e->range_end && src == e->source && cond == e->cond)
                return e;
            return NonNumExpr::concat(src, e->agg_var, st, ed, cond);
        }
    }
    return e;
}

FoeFormulaPtr map_formula(const FoeFormulaPtr& f, const VarFn& fn, std::set<std::string>& bound) {
    if (!f) return f;
    switch (f->kind) {
        case FoeFormula::Kind::Atom: {
            EventExprPtr a = map_event(f->atom, fn, bound);
            return a == f->atom ? f : FoeFormula::make_atom(a);
        }
        case FoeFormula::Kind::Not: {
            FoeFormulaPtr l = map_formula(f->lhs, fn, bound);
            return l == f->lhs ? f : FoeFormula::make_not(l);
        }
        case FoeFormula::Kind::And:
        case FoeFormula::Kind::Or:
        case FoeFormula::Kind::Implies: {
            FoeFormulaPtr l = map_formula(f->lhs, fn, bound);
            FoeFormulaPtr r = map_formula(f->rhs, fn, bound);
            if (l == f->lhs && r == f->rhs) return f;
            auto copy = std::make_shared<FoeFormula>(*f);
            copy->lhs = l;
            copy->rhs = r;
            return copy;
        }
        case FoeFormula::Kind::Forall:
        case FoeFormula::Kind::Exists: {
            bool inserted = bound.insert(f->var).second;
            FoeFormulaPtr body = map_formula(f->lhs, fn, bound);
            if (inserted) bound.erase(f->var);
            if (body == f->lhs) return f;
            auto copy = std::make_shared<FoeFormula>(*f);
            copy->lhs = body;
            return copy;
        }
    }
    return f;
}

void collect_free_index(const IndexExprPtr& e, const std::set<std::string>& bound,
                        std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == IndexExpr::Kind::Var) {
        if (!bound.count(e->name)) out.insert(e->name);
    } else if (e->kind == IndexExpr::Kind::Add || e->kind == IndexExpr::Kind::Sub) {
        collect_free_index(e->lhs, bound, out);
        collect_free_index(e->rhs, bound, out);
    }
}

void collect_free_num(const NumExprPtr&, std::set<std::string>, std::set<std::string>&);
void collect_free_nonnum(const NonNumExprPtr&, std::set<std::string>, std::set<std::string>&);

void collect_free_event(const EventExprPtr& e, const std::set<std::string>& bound,
                        std::set<std::string>& out) {
    if (!e) return;
    collect_free_num(e->num_lhs, bound, out);
    collect_free_num(e->num_rhs, bound, out);
    collect_free_nonnum(e->nonnum_lhs, bound, out);
    collect_free_nonnum(e->nonnum_rhs, bound, out);
}

void collect_free_aggcond(const AggCondPtr& c, const std::set<std::string>& bound,
                          std::set<std::string>& out) {
    if (!c) return;
    collect_free_event(c->atom, bound, out);
    collect_free_aggcond(c->lhs, bound, out);
    collect_free_aggcond(c->rhs, bound, out);
}

void collect_free_num(const NumExprPtr& e, std::set<std::string> bound,
                      std::set<std::string>& out) {
    if (!e) return;
    switch (e->kind) {
        case NumExpr::Kind::NumberLit: return;
        case NumExpr::Kind::Index:
        case NumExpr::Kind::NumAttr: collect_free_index(e->index, bound, out); return;
        case NumExpr::Kind::Add:
        case NumExpr::Kind::Sub:
        case NumExpr::Kind::Min2:
        case NumExpr::Kind::Max2:
            collect_free_num(e->lhs, bound, out);
            collect_free_num(e->rhs, bound, out);
            return;
        case NumExpr::Kind::Agg:
        case NumExpr::Kind::Count: {
            collect_free_index(e->range_start, bound, out);
            collect_free_index(e->range_end, bound, out);
            bound.insert(e->agg_var);
            collect_free_num(e->source, bound, out);
            collect_free_aggcond(e->cond, bound, out);
            return;
        }
        case NumExpr::Kind::CountVal:
            collect_free_index(e->range_start, bound, out);
            collect_free_index(e->range_end, bound, out);
            return;
    }
}

void collect_free_nonnum(const NonNumExprPtr& e, std::set<std::string> bound,
                         std::set<std::string>& out) {
    if (!e) return;
    switch (e->kind) {
        case NonNumExpr::Kind::BoolLit:
        case NonNumExpr::Kind::StringLit: return;
        case NonNumExpr::Kind::NonNumAttr: collect_free_index(e->index, bound, out); return;
        case NonNumExpr::Kind::Concat: {
            collect_free_index(e->range_start, bound, out);
            collect_free_index(e->range_end, bound, out);
            bound.insert(e->agg_var);
            collect_free_nonnum(e->source, bound, out);
            collect_free_aggcond(e->cond, bound, out);
            return;
        }
    }
}

void collect_free_formula(const FoeFormulaPtr& f, std::set<std::string> bound,
                          std::set<std::string>& out) {
    if (!f) return;
    switch (f->kind) {
        case FoeFormula::Kind::Atom: collect_free_event(f->atom, bound, out); return;
        case FoeFormula::Kind::Not: collect_free_formula(f->lhs, bound, out); return;
        case FoeFormula::Kind::And:
        case FoeFormula::Kind::Or:
        case FoeFormula::Kind::Implies:
            collect_free_formula(f->lhs, bound, out);
            collect_free_formula(f->rhs, bound, out);
            return;
        case FoeFormula::Kind::Forall:
        case FoeFormula::Kind::Exists: {
            bound.insert(f->var);
            collect_free_formula(f->lhs, bound, out);
            return;
        }
    }
}

void collect_all_names_index(const IndexExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == IndexExpr::Kind::Var) out.insert(e->name);
    collect_all_names_index(e->lhs, out);
    collect_all_names_index(e->rhs, out);
}

void collect_all_names_num(const NumExprPtr&, std::set<std::string>&);
void collect_all_names_nonnum(const NonNumExprPtr&, std::set<std::string>&);

void collect_all_names_event(const EventExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    collect_all_names_num(e->num_lhs, out);
    collect_all_names_num(e->num_rhs, out);
    collect_all_names_nonnum(e->nonnum_lhs, out);
    collect_all_names_nonnum(e->nonnum_rhs, out);
}

void collect_all_names_aggcond(const AggCondPtr& c, std::set<std::string>& out) {
    if (!c) return;
    collect_all_names_event(c->atom, out);
    collect_all_names_aggcond(c->lhs, out);
    collect_all_names_aggcond(c->rhs, out);
}

void collect_all_names_num(const NumExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (!e->agg_var.empty()) out.insert(e->agg_var);
    collect_all_names_index(e->index, out);
    collect_all_names_index(e->range_start, out);
    collect_all_names_index(e->range_end, out);
    collect_all_names_num(e->lhs, out);
    collect_all_names_num(e->rhs, out);
    collect_all_names_num(e->source, out);
    collect_all_names_aggcond(e->cond, out);
}

void collect_all_names_nonnum(const NonNumExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (!e->agg_var.empty()) out.insert(e->agg_var);
    collect_all_names_index(e->index, out);
    collect_all_names_index(e->range_start, out);
    collect_all_names_index(e->range_end, out);
    collect_all_names_nonnum(e->source, out);
    collect_all_names_aggcond(e->cond, out);
}

void collect_all_names_formula(const FoeFormulaPtr& f, std::set<std::string>& out) {
    if (!f) return;
    if (!f->var.empty()) out.insert(f->var);
    collect_all_names_event(f->atom, out);
    collect_all_names_formula(f->lhs, out);
    collect_all_names_formula(f->rhs, out);
}

}  // namespace

std::set<std::string> free_variables(const FoeFormula& f) {
    std::set<std::string> out;
    collect_free_formula(std::make_shared<FoeFormula>(f), {}, out);
    return out;
}

std::set<std::string> free_variables(const NumExpr& e) {
    std::set<std::string> out;
    collect_free_num(std::make_shared<NumExpr>(e), {}, out);
    return out;
}

std::set<std::string> free_variables(const NonNumExpr& e) {
    std::set<std::string> out;
    collect_free_nonnum(std::make_shared<NonNumExpr>(e), {}, out);
    return out;
}

FoeFormulaPtr substitute(const FoeFormulaPtr& f, const std::string& var, std::int64_t value) {
    std::set<std::string> bound;
    IndexExprPtr constant = IndexExpr::constant(value);
    return map_formula(
        f, [&](const std::string& name) { return name == var ? constant : nullptr; }, bound);
}

FoeFormulaPtr rename_free(const FoeFormulaPtr& f, const std::string& from, const std::string& to) {
    std::set<std::string> bound;
    IndexExprPtr repl = IndexExpr::var(to);
    return map_formula(
        f, [&](const std::string& name) { return name == from ? repl : nullptr; }, bound);
}

std::set<std::string> all_variable_names(const FoeFormula& f) {
    std::set<std::string> out;
    collect_all_names_formula(std::make_shared<FoeFormula>(f), out);
    return out;
}

}  // namespace foe
