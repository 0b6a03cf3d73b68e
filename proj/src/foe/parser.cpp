#include "foe/parser.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "foe/event_log.hpp"
#include "foe/validate.hpp"

namespace foe {
namespace {

enum class Tok {
    End,
    Ident,
    Number,
    String,
    // keywords
    KwRule,
    KwDefault,
    KwForall,
    KwExists,
    KwAnd,
    KwOr,
    KwNot,
    KwTrue,
    KwFalse,
    KwCurr,
    KwLast,
    KwSum,
    KwAvg,
    KwMin,
    KwMax,
    KwConcat,
    KwCount,
    KwCountVal,
    KwMin2,
    KwMax2,
    KwWhere,
    KwWithin,
    KwIf,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Dot,
    Semi,
    Comma,
    Colon,
    Assign,   // =
    CaseArrow,  // =>
    Implies,    // ->
    Plus,
    Minus,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
};

struct Token {
    Tok type;
    std::string text;
    double number = 0;
    bool number_is_integer = false;
    std::int64_t int_value = 0;
    int line = 1;
    int column = 1;
    std::size_t offset = 0;
};

Tok keyword_of(const std::string& s) {
    if (s == "rule") return Tok::KwRule;
    if (s == "default") return Tok::KwDefault;
    if (s == "forall") return Tok::KwForall;
    if (s == "exists") return Tok::KwExists;
    if (s == "and") return Tok::KwAnd;
    if (s == "or") return Tok::KwOr;
    if (s == "not") return Tok::KwNot;
    if (s == "true") return Tok::KwTrue;
    if (s == "false") return Tok::KwFalse;
    if (s == "curr") return Tok::KwCurr;
    if (s == "last") return Tok::KwLast;
    if (s == "sum") return Tok::KwSum;
    if (s == "avg") return Tok::KwAvg;
    if (s == "min") return Tok::KwMin;
    if (s == "max") return Tok::KwMax;
    if (s == "concat") return Tok::KwConcat;
    if (s == "count") return Tok::KwCount;
    if (s == "countval") return Tok::KwCountVal;
    if (s == "min2") return Tok::KwMin2;
    if (s == "max2") return Tok::KwMax2;
    if (s == "where") return Tok::KwWhere;
    if (s == "within") return Tok::KwWithin;
    if (s == "if") return Tok::KwIf;
    return Tok::Ident;
}

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::Number: return "number";
        case Tok::String: return "string";
        case Tok::KwRule: return "'rule'";
        case Tok::KwDefault: return "'default'";
        case Tok::KwForall: return "'forall'";
        case Tok::KwExists: return "'exists'";
        case Tok::KwAnd: return "'and'";
        case Tok::KwOr: return "'or'";
        case Tok::KwNot: return "'not'";
        case Tok::KwTrue: return "'true'";
        case Tok::KwFalse: return "'false'";
        case Tok::KwCurr: return "'curr'";
        case Tok::KwLast: return "'last'";
        case Tok::KwSum: return "'sum'";
        case Tok::KwAvg: return "'avg'";
        case Tok::KwMin: return "'min'";
        case Tok::KwMax: return "'max'";
        case Tok::KwConcat: return "'concat'";
        case Tok::KwCount: return "'count'";
        case Tok::KwCountVal: return "'countval'";
        case Tok::KwMin2: return "'min2'";
        case Tok::KwMax2: return "'max2'";
        case Tok::KwWhere: return "'where'";
        case Tok::KwWithin: return "'within'";
        case Tok::KwIf: return "'if'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Dot: return "'.'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Colon: return "':'";
        case Tok::Assign: return "'='";
        case Tok::CaseArrow: return "'=>'";
        case Tok::Implies: return "'->'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Eq: return "'=='";
        case Tok::Ne: return "'!='";
        case Tok::Lt: return "'<'";
        case Tok::Gt: return "'>'";
        case Tok::Le: return "'<='";
        case Tok::Ge: return "'>='";
    }
    return "?";
}

[[noreturn]] void fail_at(const Token& found, std::vector<std::string> expected) {
    std::string found_text =
        found.type == Tok::End ? "end of input"
                               : (found.text.empty() ? tok_name(found.type) : "'" + found.text + "'");
    std::string msg = "parse error at line " + std::to_string(found.line) + ", column " +
                      std::to_string(found.column) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += expected.size() == 2 ? " or " : ", ";
        msg += expected[i];
    }
    msg += ", found " + found_text;
    throw ParseError(msg, found.line, found.column, std::move(expected), found_text);
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : s_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            Token t = next_token();
            bool end = t.type == Tok::End;
            out.push_back(std::move(t));
            if (end) return out;
        }
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
    }

    char advance() {
        char c = s_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_trivia() {
        for (;;) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (peek() != '\n' && peek() != '\0') advance();
            } else {
                return;
            }
        }
    }

    Token make(Tok type, std::string text, const Token& proto) {
        Token t = proto;
        t.type = type;
        t.text = std::move(text);
        return t;
    }

    [[noreturn]] void lex_fail(const std::string& what) {
        Token here;
        here.type = Tok::End;
        here.line = line_;
        here.column = col_;
        here.text = std::string(1, peek());
        fail_at(here, {what});
    }

    Token next_token() {
        Token proto;
        proto.line = line_;
        proto.column = col_;
        proto.offset = pos_;
        char c = peek();
        if (c == '\0') return make(Tok::End, "", proto);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_word(proto);
        if (std::isdigit(static_cast<unsigned char>(c))) return lex_number(proto);
        if (c == '"') return lex_string(proto);
        advance();
        switch (c) {
            case '(': return make(Tok::LParen, "(", proto);
            case ')': return make(Tok::RParen, ")", proto);
            case '[': return make(Tok::LBracket, "[", proto);
            case ']': return make(Tok::RBracket, "]", proto);
            case '{': return make(Tok::LBrace, "{", proto);
            case '}': return make(Tok::RBrace, "}", proto);
            case '.': return make(Tok::Dot, ".", proto);
            case ';': return make(Tok::Semi, ";", proto);
            case ',': return make(Tok::Comma, ",", proto);
            case ':': return make(Tok::Colon, ":", proto);
            case '+': return make(Tok::Plus, "+", proto);
            case '=':
                if (peek() == '=') {
                    advance();
                    return make(Tok::Eq, "==", proto);
                }
                if (peek() == '>') {
                    advance();
                    return make(Tok::CaseArrow, "=>", proto);
                }
                return make(Tok::Assign, "=", proto);
            case '!':
                if (peek() == '=') {
                    advance();
                    return make(Tok::Ne, "!=", proto);
                }
                lex_fail("'!='");
            case '<':
                if (peek() == '=') {
                    advance();
                    return make(Tok::Le, "<=", proto);
                }
                return make(Tok::Lt, "<", proto);
            case '>':
                if (peek() == '=') {
                    advance();
                    return make(Tok::Ge, ">=", proto);
                }
                return make(Tok::Gt, ">", proto);
            case '-':
                if (peek() == '>') {
                    advance();
                    return make(Tok::Implies, "->", proto);
                }
                return make(Tok::Minus, "-", proto);
            default: break;
        }
        lex_fail("a token");
    }

    Token lex_word(Token proto) {
        std::string text;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
            text += advance();
        Tok type = keyword_of(text);
        return make(type, std::move(text), proto);
    }

    Token lex_number(Token proto) {
        std::string digits;
        bool integral = true;
        auto take_digits = [&] {
            bool any = false;
            while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') {
                char c = advance();
                if (c != '_') digits += c;
                any = true;
            }
            return any;
        };
        take_digits();
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            integral = false;
            digits += advance();
            take_digits();
        }
        if (peek() == 'e' || peek() == 'E') {
            char sign = peek(1);
            if (std::isdigit(static_cast<unsigned char>(sign)) ||
                ((sign == '+' || sign == '-') &&
                 std::isdigit(static_cast<unsigned char>(peek(2))))) {
                integral = false;
                digits += advance();
                if (peek() == '+' || peek() == '-') digits += advance();
                take_digits();
            }
        }
        Token t = make(Tok::Number, digits, proto);
        double d = 0;
        auto res = std::from_chars(digits.data(), digits.data() + digits.size(), d);
        if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size())
            lex_fail("a valid number");
        t.number = d;
        if (integral) {
            std::int64_t v = 0;
            auto ri = std::from_chars(digits.data(), digits.data() + digits.size(), v);
            if (ri.ec == std::errc{} && ri.ptr == digits.data() + digits.size()) {
                t.number_is_integer = true;
                t.int_value = v;
            }
        }
        return t;
    }

    Token lex_string(Token proto) {
        advance();  // opening quote
        std::string text;
        for (;;) {
            char c = peek();
            if (c == '\0' || c == '\n') lex_fail("closing '\"'");
            advance();
            if (c == '"') break;
            if (c == '\\') {
                char esc = peek();
                if (esc != '"' && esc != '\\') lex_fail("'\\\"' or '\\\\' escape");
                text += advance();
            } else {
                text += c;
            }
        }
        Token t = make(Tok::String, std::move(text), proto);
        return t;
    }
};

// ---------------------------------------------------------------------------
// Parser. Comparison operands are parsed untyped and lowered to numeric or
// non-numeric expressions once the consuming construct fixes the kind; an
// attribute accessor compared with another accessor under == / != defaults
// to the non-numeric reading.

struct Operand {
    enum class Tag { Index, Number, Bool, Num, NonNum, Attr };

    Tag tag;
    IndexExprPtr index;            // Index (bare_literal marks a lone integer)
    bool bare_int_literal = false;
    double number = 0;             // Number
    bool bool_value = false;       // Bool
    NumExprPtr num;                // Num
    NonNumExprPtr nonnum;          // NonNum
    IndexExprPtr attr_index;       // Attr
    std::string attr_name;
    Token at;  // where this operand started, for diagnostics

    bool definitely_numeric() const {
        return tag == Tag::Index || tag == Tag::Number || tag == Tag::Num;
    }
    bool definitely_nonnumeric() const { return tag == Tag::Bool || tag == Tag::NonNum; }
};

struct FormulaOrOperand {
    FoeFormulaPtr formula;
    std::optional<Operand> operand;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    AnalyticRule rule() {
        expect(Tok::KwRule);
        expect(Tok::LBrace);
        struct PendingCase {
            FoeFormulaPtr condition;
            Operand target;
        };
        std::vector<PendingCase> cases;
        while (peek().type != Tok::KwDefault) {
            FoeFormulaPtr cond = formula();
            expect(Tok::CaseArrow);
            Operand target = value_operand();
            expect(Tok::Semi);
            cases.push_back({std::move(cond), std::move(target)});
        }
        expect(Tok::KwDefault);
        Operand default_target = value_operand();
        if (peek().type == Tok::Semi) next();
        expect(Tok::RBrace);
        expect(Tok::End);

        // Kind inference: the first syntactically decided target fixes the
        // rule kind; a rule made only of bare accessors reads non-numeric.
        std::optional<RuleKind> kind;
        for (const PendingCase& c : cases) {
            if (c.target.definitely_numeric()) kind = RuleKind::Numeric;
            if (c.target.definitely_nonnumeric()) kind = RuleKind::NonNumeric;
            if (kind) break;
        }
        if (!kind) {
            if (default_target.definitely_numeric()) kind = RuleKind::Numeric;
            if (default_target.definitely_nonnumeric()) kind = RuleKind::NonNumeric;
        }
        if (!kind) kind = RuleKind::NonNumeric;

        AnalyticRule out;
        for (PendingCase& c : cases)
            out.cases.push_back(RuleCase{standardize_apart(c.condition),
                                         lower_target(c.target, *kind)});
        out.default_target = lower_target(default_target, *kind);
        return out;
    }

    FoeFormulaPtr bare_formula() {
        FoeFormulaPtr f = formula();
        expect(Tok::End);
        return standardize_apart(f);
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    const Token& expect(Tok type) {
        if (peek().type != type) fail_at(peek(), {tok_name(type)});
        return next();
    }

    static bool is_compare(Tok t) {
        return t == Tok::Eq || t == Tok::Ne || t == Tok::Lt || t == Tok::Gt || t == Tok::Le ||
               t == Tok::Ge;
    }

    static CompareOp compare_op(Tok t) {
        switch (t) {
            case Tok::Eq: return CompareOp::Eq;
            case Tok::Ne: return CompareOp::Ne;
            case Tok::Lt: return CompareOp::Lt;
            case Tok::Gt: return CompareOp::Gt;
            case Tok::Le: return CompareOp::Le;
            default: return CompareOp::Ge;
        }
    }

    static bool is_word(Tok t) {
        return t == Tok::Ident || (t >= Tok::KwRule && t <= Tok::KwIf);
    }

    // Attribute names may embed colons (XES keys); pieces must be adjacent.
    std::string attr_name() {
        if (!is_word(peek().type)) fail_at(peek(), {"attribute name"});
        Token first = next();
        std::string name = first.text;
        std::size_t end = first.offset + first.text.size();
        while (peek().type == Tok::Colon && peek().offset == end && is_word(peek(1).type) &&
               peek(1).offset == end + 1) {
            next();  // ':'
            const Token& piece = next();
            name += ":" + piece.text;
            end = piece.offset + piece.text.size();
        }
        return name;
    }

    // ---- index expressions -------------------------------------------------

    IndexExprPtr index_expr() {
        IndexExprPtr lhs = index_primary();
        for (;;) {
            if (peek().type == Tok::Plus) {
                next();
                lhs = IndexExpr::add(std::move(lhs), index_primary());
            } else if (peek().type == Tok::Minus) {
                next();
                lhs = IndexExpr::sub(std::move(lhs), index_primary());
            } else {
                return lhs;
            }
        }
    }

    IndexExprPtr index_primary() {
        const Token& t = peek();
        switch (t.type) {
            case Tok::KwCurr: next(); return IndexExpr::curr();
            case Tok::KwLast: next(); return IndexExpr::last();
            case Tok::Ident: return IndexExpr::var(next().text);
            case Tok::Number: {
                if (!t.number_is_integer || t.int_value < 1)
                    fail_at(t, {"a positive integer index"});
                return IndexExpr::constant(next().int_value);
            }
            case Tok::LParen: {
                next();
                IndexExprPtr e = index_expr();
                expect(Tok::RParen);
                return e;
            }
            default: fail_at(t, {"an index expression"});
        }
    }

    // ---- operand lowering --------------------------------------------------

    NumExprPtr to_num(const Operand& v) {
        switch (v.tag) {
            case Operand::Tag::Index:
                if (v.bare_int_literal && v.index->kind == IndexExpr::Kind::Const)
                    return NumExpr::number_lit(static_cast<double>(v.index->value));
                return NumExpr::from_index(v.index);
            case Operand::Tag::Number: return NumExpr::number_lit(v.number);
            case Operand::Tag::Num: return v.num;
            case Operand::Tag::Attr: return NumExpr::attr_access(v.attr_index, v.attr_name);
            case Operand::Tag::Bool:
            case Operand::Tag::NonNum:
                fail_at(v.at, {"a numeric expression"});
        }
        fail_at(v.at, {"a numeric expression"});
    }

    NonNumExprPtr to_nonnum(const Operand& v) {
        switch (v.tag) {
            case Operand::Tag::Bool: return NonNumExpr::bool_lit(v.bool_value);
            case Operand::Tag::NonNum: return v.nonnum;
            case Operand::Tag::Attr: return NonNumExpr::attr_access(v.attr_index, v.attr_name);
            default: fail_at(v.at, {"a non-numeric expression"});
        }
    }

    TargetExpr lower_target(const Operand& v, RuleKind kind) {
        if (v.tag == Operand::Tag::Attr)
            return kind == RuleKind::Numeric
                       ? TargetExpr::numeric(NumExpr::attr_access(v.attr_index, v.attr_name))
                       : TargetExpr::non_numeric(
                             NonNumExpr::attr_access(v.attr_index, v.attr_name));
        if (v.definitely_numeric()) return TargetExpr::numeric(to_num(v));
        return TargetExpr::non_numeric(to_nonnum(v));
    }

    EventExprPtr comparison(const Operand& lhs, CompareOp op, const Operand& rhs,
                            const Token& op_tok) {
        bool ordering = op != CompareOp::Eq && op != CompareOp::Ne;
        if (ordering || lhs.definitely_numeric() || rhs.definitely_numeric()) {
            if (!ordering && (lhs.definitely_nonnumeric() || rhs.definitely_nonnumeric()))
                fail_at(op_tok, {"operands of one kind (numeric vs non-numeric)"});
            return EventExpr::num_compare(op, to_num(lhs), to_num(rhs));
        }
        return EventExpr::nonnum_compare(op, to_nonnum(lhs), to_nonnum(rhs));
    }

    // ---- values --------------------------------------------------------

    Operand value_operand() {
        FormulaOrOperand v = value_general();
        if (v.formula) fail_at(peek(), {"a value expression"});
        return *v.operand;
    }

    // Additive chain over primaries; a parenthesized formula escapes as one.
    FormulaOrOperand value_general() {
        FormulaOrOperand first = value_primary();
        if (first.formula) return first;
        Operand acc = *first.operand;
        while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
            bool is_add = next().type == Tok::Plus;
            FormulaOrOperand rhs = value_primary();
            if (rhs.formula) fail_at(peek(), {"a value expression"});
            // Arithmetic over pure index terms stays an index expression.
            if (acc.tag == Operand::Tag::Index && rhs.operand->tag == Operand::Tag::Index) {
                Operand merged;
                merged.tag = Operand::Tag::Index;
                merged.at = acc.at;
                merged.index = is_add ? IndexExpr::add(acc.index, rhs.operand->index)
                                      : IndexExpr::sub(acc.index, rhs.operand->index);
                acc = std::move(merged);
            } else {
                Operand merged;
                merged.tag = Operand::Tag::Num;
                merged.at = acc.at;
                merged.num = is_add ? NumExpr::add(to_num(acc), to_num(*rhs.operand))
                                    : NumExpr::sub(to_num(acc), to_num(*rhs.operand));
                acc = std::move(merged);
            }
        }
        return FormulaOrOperand{nullptr, std::move(acc)};
    }

    FormulaOrOperand value_primary() {
        const Token& t = peek();
        Operand v;
        v.at = t;
        switch (t.type) {
            case Tok::Number: {
                next();
                if (t.number_is_integer && t.int_value >= 1) {
                    v.tag = Operand::Tag::Index;
                    v.index = IndexExpr::constant(t.int_value);
                    v.bare_int_literal = true;
                } else {
                    v.tag = Operand::Tag::Number;
                    v.number = t.number;
                }
                return {nullptr, std::move(v)};
            }
            case Tok::String: {
                next();
                v.tag = Operand::Tag::NonNum;
                v.nonnum = NonNumExpr::string_lit(t.text);
                return {nullptr, std::move(v)};
            }
            case Tok::KwTrue:
            case Tok::KwFalse: {
                next();
                v.tag = Operand::Tag::Bool;
                v.bool_value = t.type == Tok::KwTrue;
                return {nullptr, std::move(v)};
            }
            case Tok::KwCurr:
            case Tok::KwLast: {
                next();
                v.tag = Operand::Tag::Index;
                v.index = t.type == Tok::KwCurr ? IndexExpr::curr() : IndexExpr::last();
                return {nullptr, std::move(v)};
            }
            case Tok::Ident: {
                if (t.text == "e" && peek(1).type == Tok::LBracket) {
                    next();  // e
                    next();  // [
                    IndexExprPtr idx = index_expr();
                    expect(Tok::RBracket);
                    expect(Tok::Dot);
                    v.tag = Operand::Tag::Attr;
                    v.attr_index = std::move(idx);
                    v.attr_name = attr_name();
                    return {nullptr, std::move(v)};
                }
                next();
                v.tag = Operand::Tag::Index;
                v.index = IndexExpr::var(t.text);
                return {nullptr, std::move(v)};
            }
            case Tok::KwSum:
            case Tok::KwAvg:
            case Tok::KwMin:
            case Tok::KwMax: {
                next();
                AggOp op = t.type == Tok::KwSum   ? AggOp::Sum
                           : t.type == Tok::KwAvg ? AggOp::Avg
                           : t.type == Tok::KwMin ? AggOp::Min
                                                  : AggOp::Max;
                expect(Tok::LParen);
                NumExprPtr source = to_num(value_operand());
                expect(Tok::Semi);
                expect(Tok::KwWhere);
                std::string var = expect(Tok::Ident).text;
                expect(Tok::Assign);
                auto [st, ed] = range();
                AggCondPtr cond = optional_if_clause();
                expect(Tok::RParen);
                v.tag = Operand::Tag::Num;
                v.num = NumExpr::aggregate(op, std::move(source), std::move(var), st, ed, cond);
                return {nullptr, std::move(v)};
            }
            case Tok::KwConcat: {
                next();
                expect(Tok::LParen);
                NonNumExprPtr source = to_nonnum(value_operand());
                expect(Tok::Semi);
                expect(Tok::KwWhere);
                std::string var = expect(Tok::Ident).text;
                expect(Tok::Assign);
                auto [st, ed] = range();
                AggCondPtr cond = optional_if_clause();
                expect(Tok::RParen);
                v.tag = Operand::Tag::NonNum;
                v.nonnum = NonNumExpr::concat(std::move(source), std::move(var), st, ed, cond);
                return {nullptr, std::move(v)};
            }
            case Tok::KwCount: {
                next();
                expect(Tok::LParen);
                AggCondPtr cond = agg_cond();
                expect(Tok::Semi);
                expect(Tok::KwWhere);
                std::string var = expect(Tok::Ident).text;
                expect(Tok::Assign);
                auto [st, ed] = range();
                expect(Tok::RParen);
                v.tag = Operand::Tag::Num;
                v.num = NumExpr::count(std::move(cond), std::move(var), st, ed);
                return {nullptr, std::move(v)};
            }
            case Tok::KwCountVal: {
                next();
                expect(Tok::LParen);
                std::string attr = attr_name();
                expect(Tok::Semi);
                expect(Tok::KwWithin);
                auto [st, ed] = range();
                expect(Tok::RParen);
                v.tag = Operand::Tag::Num;
                v.num = NumExpr::count_val(std::move(attr), st, ed);
                return {nullptr, std::move(v)};
            }
            case Tok::KwMin2:
            case Tok::KwMax2: {
                next();
                expect(Tok::LParen);
                NumExprPtr a = to_num(value_operand());
                expect(Tok::Comma);
                NumExprPtr b = to_num(value_operand());
                expect(Tok::RParen);
                v.tag = Operand::Tag::Num;
                v.num = t.type == Tok::KwMin2 ? NumExpr::min2(a, b) : NumExpr::max2(a, b);
                return {nullptr, std::move(v)};
            }
            case Tok::LParen: {
                next();
                FormulaOrOperand inner = formula_or_operand();
                expect(Tok::RParen);
                return inner;
            }
            default:
                fail_at(t, {"a value expression"});
        }
    }

    std::pair<IndexExprPtr, IndexExprPtr> range() {
        IndexExprPtr st = index_expr();
        expect(Tok::Colon);
        IndexExprPtr ed = index_expr();
        return {std::move(st), std::move(ed)};
    }

    AggCondPtr optional_if_clause() {
        if (peek().type != Tok::Semi) return AggCond::always();
        next();
        expect(Tok::KwIf);
        return agg_cond();
    }

    // ---- aggregation conditions (quantifier-free) ---------------------------

    AggCondPtr agg_cond() {
        Token start = peek();
        FoeFormulaPtr f = formula();
        return formula_to_aggcond(f, start);
    }

    AggCondPtr formula_to_aggcond(const FoeFormulaPtr& f, const Token& where) {
        switch (f->kind) {
            case FoeFormula::Kind::Atom: return AggCond::make_atom(f->atom);
            case FoeFormula::Kind::Not:
                return AggCond::make_not(formula_to_aggcond(f->lhs, where));
            case FoeFormula::Kind::And:
                return AggCond::make_and(formula_to_aggcond(f->lhs, where),
                                         formula_to_aggcond(f->rhs, where));
            case FoeFormula::Kind::Or:
                return AggCond::make_or(formula_to_aggcond(f->lhs, where),
                                        formula_to_aggcond(f->rhs, where));
            case FoeFormula::Kind::Implies:
                fail_at(where, {"an aggregation condition without '->'"});
            case FoeFormula::Kind::Forall:
            case FoeFormula::Kind::Exists:
                fail_at(where, {"an aggregation condition without quantifiers"});
        }
        fail_at(where, {"an aggregation condition"});
    }

    // ---- formulas ------------------------------------------------------

    FoeFormulaPtr formula() { return to_formula(formula_or_operand()); }

    FoeFormulaPtr to_formula(FormulaOrOperand v) {
        if (v.formula) return v.formula;
        if (v.operand->tag == Operand::Tag::Bool)
            return FoeFormula::make_atom(EventExpr::bool_lit(v.operand->bool_value));
        fail_at(v.operand->at, {"a condition"});
    }

    FormulaOrOperand formula_or_operand() { return implies_level(); }

    FormulaOrOperand implies_level() {
        FormulaOrOperand lhs = or_level();
        if (peek().type != Tok::Implies) return lhs;
        next();
        FormulaOrOperand rhs = implies_level();
        return {FoeFormula::implies(to_formula(std::move(lhs)), to_formula(std::move(rhs))),
                std::nullopt};
    }

    FormulaOrOperand or_level() {
        FormulaOrOperand lhs = and_level();
        while (peek().type == Tok::KwOr) {
            next();
            FormulaOrOperand rhs = and_level();
            lhs = {FoeFormula::make_or(to_formula(std::move(lhs)), to_formula(std::move(rhs))),
                   std::nullopt};
        }
        return lhs;
    }

    FormulaOrOperand and_level() {
        FormulaOrOperand lhs = unary_level();
        while (peek().type == Tok::KwAnd) {
            next();
            FormulaOrOperand rhs = unary_level();
            lhs = {FoeFormula::make_and(to_formula(std::move(lhs)), to_formula(std::move(rhs))),
                   std::nullopt};
        }
        return lhs;
    }

    FormulaOrOperand unary_level() {
        const Token& t = peek();
        if (t.type == Tok::KwNot) {
            next();
            FoeFormulaPtr f = to_formula(unary_level());
            return {FoeFormula::make_not(std::move(f)), std::nullopt};
        }
        if (t.type == Tok::KwForall || t.type == Tok::KwExists) {
            next();
            std::string var = expect(Tok::Ident).text;
            expect(Tok::Dot);
            // The body extends as far to the right as possible.
            FoeFormulaPtr body = to_formula(implies_level());
            return {t.type == Tok::KwForall ? FoeFormula::forall(std::move(var), std::move(body))
                                            : FoeFormula::exists(std::move(var), std::move(body)),
                    std::nullopt};
        }
        return atom_level();
    }

    FormulaOrOperand atom_level() {
        FormulaOrOperand lhs = value_general();
        if (lhs.formula) return lhs;
        if (is_compare(peek().type)) {
            Token op_tok = peek();
            CompareOp op = compare_op(next().type);
            Operand rhs = value_operand();
            if (is_compare(peek().type)) fail_at(peek(), {"a logical connective"});
            return {FoeFormula::make_atom(comparison(*lhs.operand, op, rhs, op_tok)),
                    std::nullopt};
        }
        return lhs;  // a bare operand; callers accept bool literals only
    }
};

std::vector<Token> lex(const std::string& text) { return Lexer(text).run(); }

}  // namespace

ParseError::ParseError(std::string msg, int line_, int column_, std::vector<std::string> expected_,
                       std::string found_)
    : std::runtime_error(std::move(msg)),
      line(line_),
      column(column_),
      expected(std::move(expected_)),
      found(std::move(found_)) {}

AnalyticRule parse_rule(const std::string& text) { return Parser(lex(text)).rule(); }

FoeFormulaPtr parse_formula(const std::string& text) { return Parser(lex(text)).bare_formula(); }

AnalyticRule parse_rule_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open rule file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rule(ss.str());
}

}  // namespace foe
