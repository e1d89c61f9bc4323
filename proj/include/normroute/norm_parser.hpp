#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "normroute/norm_ast.hpp"

namespace normroute {

namespace dsl {

enum class TokKind {
    Ident, Number, String, Keyword, RelOp,
    LParen, RParen, Semicolon, Comma, Dot,
    End, Bad,
};

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    double number = 0.0;
    SourcePos pos;
};

inline bool is_keyword(const std::string& s) {
    return s == "norm" || s == "priority" || s == "whenever" || s == "then" ||
           s == "and" || s == "or" || s == "not" || s == "true" || s == "false";
}

/// Hand-rolled lexer; never throws, bad bytes become Bad tokens.
class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws_and_comments();
        Token t;
        t.pos = {line_, col_};
        if (at_end()) {
            t.kind = TokKind::End;
            return t;
        }
        char c = peek();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_ident(t);
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
            return lex_number(t);
        if (c == '"') return lex_string(t);
        switch (c) {
            case '(': advance(); t.kind = TokKind::LParen; t.text = "("; return t;
            case ')': advance(); t.kind = TokKind::RParen; t.text = ")"; return t;
            case ';': advance(); t.kind = TokKind::Semicolon; t.text = ";"; return t;
            case ',': advance(); t.kind = TokKind::Comma; t.text = ","; return t;
            case '.': advance(); t.kind = TokKind::Dot; t.text = "."; return t;
            case '=':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                    advance(); advance();
                    t.kind = TokKind::RelOp; t.text = "==";
                    return t;
                }
                break;
            case '!':
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                    advance(); advance();
                    t.kind = TokKind::RelOp; t.text = "!=";
                    return t;
                }
                break;
            case '<':
            case '>': {
                advance();
                t.text = std::string(1, c);
                if (!at_end() && peek() == '=') { advance(); t.text += '='; }
                t.kind = TokKind::RelOp;
                return t;
            }
            default: break;
        }
        advance();
        t.kind = TokKind::Bad;
        t.text = std::string(1, c);
        return t;
    }

private:
    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws_and_comments() {
        while (!at_end()) {
            char c = peek();
            if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    Token& lex_ident(Token& t) {
        std::string s;
        while (!at_end()) {
            char c = peek();
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') break;
            s += c;
            advance();
        }
        // the dot separates path segments; handled by the parser
        t.kind = is_keyword(s) ? TokKind::Keyword : TokKind::Ident;
        t.text = s;
        return t;
    }

    Token& lex_number(Token& t) {
        std::string s;
        if (peek() == '-') { s += '-'; advance(); }
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            s += peek();
            advance();
        }
        if (!at_end() && peek() == '.' && pos_ + 1 < src_.size() &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            s += '.';
            advance();
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
                s += peek();
                advance();
            }
        }
        t.kind = TokKind::Number;
        t.text = s;
        t.number = std::strtod(s.c_str(), nullptr);
        return t;
    }

    Token& lex_string(Token& t) {
        advance(); // opening quote
        std::string s;
        while (!at_end() && peek() != '"' && peek() != '\n') {
            char c = peek();
            if (c == '\\') {
                advance();
                if (at_end()) break;
                char e = peek();
                switch (e) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case 'r': s += '\r'; break;
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    default:
                        t.kind = TokKind::Bad;
                        t.text = std::string("\\") + e;
                        advance();
                        return t;
                }
                advance();
            } else {
                s += c;
                advance();
            }
        }
        if (at_end() || peek() != '"') {
            t.kind = TokKind::Bad;
            t.text = "unterminated string";
            return t;
        }
        advance(); // closing quote
        t.kind = TokKind::String;
        t.text = s;
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace dsl

struct ParseResult {
    std::vector<NormAST> norms;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

namespace dsl {

// norm     := "norm" IDENT ["priority" INT] "whenever" cond "then" action {";" action}
// cond     := disj ; disj := conj {"or" conj} ; conj := neg {"and" neg}
// neg      := ["not"] prim ; prim := cmp | "(" cond ")"
// cmp      := term REL term | path
// term     := path | NUMBER | STRING | "true" | "false"
class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { shift(); }

    ParseResult parse_all() {
        ParseResult result;
        while (cur_.kind != TokKind::End) {
            if (!at_keyword("norm")) {
                fail("expected 'norm'");
                break;
            }
            std::optional<NormAST> n = parse_norm();
            if (!n) break; // no recovery: first error wins
            result.norms.push_back(std::move(*n));
        }
        result.diagnostics = std::move(diagnostics_);
        if (!result.diagnostics.empty()) result.norms.clear();
        return result;
    }

private:
    void shift() { cur_ = lexer_.next(); }

    bool at_keyword(const std::string& kw) const {
        return cur_.kind == TokKind::Keyword && cur_.text == kw;
    }

    void fail(const std::string& expected) {
        std::string got = cur_.kind == TokKind::End ? "end of input"
                        : cur_.kind == TokKind::Bad ? "invalid input '" + cur_.text + "'"
                                                    : "'" + cur_.text + "'";
        diagnostics_.push_back({cur_.pos, Severity::Error, expected + ", found " + got});
    }

    bool expect_keyword(const std::string& kw) {
        if (at_keyword(kw)) {
            shift();
            return true;
        }
        fail("expected '" + kw + "'");
        return false;
    }

    std::optional<NormAST> parse_norm() {
        NormAST n;
        n.pos = cur_.pos;
        shift(); // "norm"
        if (cur_.kind != TokKind::Ident) {
            fail("expected norm name (identifier)");
            return std::nullopt;
        }
        n.name = cur_.text;
        shift();
        if (at_keyword("priority")) {
            shift();
            if (cur_.kind != TokKind::Number || cur_.text.find('.') != std::string::npos) {
                fail("expected integer priority");
                return std::nullopt;
            }
            n.priority = static_cast<int>(cur_.number);
            shift();
        }
        if (!expect_keyword("whenever")) return std::nullopt;
        auto cond = parse_cond();
        if (!cond) return std::nullopt;
        n.condition = std::move(*cond);
        if (!expect_keyword("then")) return std::nullopt;
        auto act = parse_action();
        if (!act) return std::nullopt;
        n.actions.push_back(std::move(*act));
        while (cur_.kind == TokKind::Semicolon) {
            shift();
            act = parse_action();
            if (!act) return std::nullopt;
            n.actions.push_back(std::move(*act));
        }
        return n;
    }

    std::optional<ConditionExpr> parse_cond() { return parse_disj(); }

    std::optional<ConditionExpr> parse_disj() {
        auto first = parse_conj();
        if (!first) return std::nullopt;
        if (!at_keyword("or")) return first;
        ConditionExpr node;
        node.kind = ConditionExpr::Kind::Or;
        node.pos = first->pos;
        node.children.push_back(std::move(*first));
        while (at_keyword("or")) {
            shift();
            auto next = parse_conj();
            if (!next) return std::nullopt;
            node.children.push_back(std::move(*next));
        }
        return node;
    }

    std::optional<ConditionExpr> parse_conj() {
        auto first = parse_neg();
        if (!first) return std::nullopt;
        if (!at_keyword("and")) return first;
        ConditionExpr node;
        node.kind = ConditionExpr::Kind::And;
        node.pos = first->pos;
        node.children.push_back(std::move(*first));
        while (at_keyword("and")) {
            shift();
            auto next = parse_neg();
            if (!next) return std::nullopt;
            node.children.push_back(std::move(*next));
        }
        return node;
    }

    std::optional<ConditionExpr> parse_neg() {
        if (at_keyword("not")) {
            ConditionExpr node;
            node.kind = ConditionExpr::Kind::Not;
            node.pos = cur_.pos;
            shift();
            auto inner = parse_neg();
            if (!inner) return std::nullopt;
            node.children.push_back(std::move(*inner));
            return node;
        }
        return parse_prim();
    }

    std::optional<ConditionExpr> parse_prim() {
        if (cur_.kind == TokKind::LParen) {
            shift();
            auto inner = parse_cond();
            if (!inner) return std::nullopt;
            if (cur_.kind != TokKind::RParen) {
                fail("expected ')'");
                return std::nullopt;
            }
            shift();
            return inner;
        }
        auto lhs = parse_term();
        if (!lhs) return std::nullopt;
        if (cur_.kind == TokKind::RelOp) {
            ConditionExpr node;
            node.kind = ConditionExpr::Kind::Compare;
            node.pos = lhs->pos;
            node.relop = relop_from(cur_.text);
            node.lhs = std::move(*lhs);
            shift();
            auto rhs = parse_term();
            if (!rhs) return std::nullopt;
            node.rhs = std::move(*rhs);
            return node;
        }
        if (!lhs->is_path) {
            fail("expected comparison operator after literal");
            return std::nullopt;
        }
        ConditionExpr node;
        node.kind = ConditionExpr::Kind::PathTest;
        node.pos = lhs->pos;
        node.path = std::move(lhs->path);
        return node;
    }

    static RelOp relop_from(const std::string& s) {
        if (s == "==") return RelOp::Eq;
        if (s == "!=") return RelOp::Ne;
        if (s == "<") return RelOp::Lt;
        if (s == "<=") return RelOp::Le;
        if (s == ">") return RelOp::Gt;
        return RelOp::Ge;
    }

    std::optional<Term> parse_term() {
        Term t;
        t.pos = cur_.pos;
        switch (cur_.kind) {
            case TokKind::Number:
                t.literal = cur_.number;
                shift();
                return t;
            case TokKind::String:
                t.literal = cur_.text;
                shift();
                return t;
            case TokKind::Keyword:
                if (cur_.text == "true" || cur_.text == "false") {
                    t.literal = cur_.text == "true";
                    shift();
                    return t;
                }
                break;
            case TokKind::Ident: {
                auto p = parse_path();
                if (!p) return std::nullopt;
                t.is_path = true;
                t.path = std::move(*p);
                return t;
            }
            default: break;
        }
        fail("expected a term (path, number, string, true or false)");
        return std::nullopt;
    }

    std::optional<PathRef> parse_path() {
        PathRef p;
        p.pos = cur_.pos;
        p.parts.push_back(cur_.text);
        shift();
        while (cur_.kind == TokKind::Dot) {
            shift();
            if (cur_.kind != TokKind::Ident && cur_.kind != TokKind::Keyword) {
                fail("expected identifier after '.'");
                return std::nullopt;
            }
            p.parts.push_back(cur_.text);
            shift();
        }
        return p;
    }

    std::optional<ActionCall> parse_action() {
        ActionCall a;
        a.pos = cur_.pos;
        if (cur_.kind != TokKind::Ident) {
            fail("expected action name (identifier)");
            return std::nullopt;
        }
        a.name = cur_.text;
        shift();
        if (cur_.kind != TokKind::LParen) {
            fail("expected '(' after action name");
            return std::nullopt;
        }
        shift();
        if (cur_.kind != TokKind::RParen) {
            auto arg = parse_term();
            if (!arg) return std::nullopt;
            a.args.push_back(std::move(*arg));
            while (cur_.kind == TokKind::Comma) {
                shift();
                arg = parse_term();
                if (!arg) return std::nullopt;
                a.args.push_back(std::move(*arg));
            }
        }
        if (cur_.kind != TokKind::RParen) {
            fail("expected ')'");
            return std::nullopt;
        }
        shift();
        return a;
    }

    Lexer lexer_;
    Token cur_;
    std::vector<Diagnostic> diagnostics_;
};

} // namespace dsl

/// Parses a norm file; on any error the norm list is empty and diagnostics
/// carry line:column positions. Total on arbitrary input.
inline ParseResult parse_norms(std::string_view text) {
    return dsl::Parser(text).parse_all();
}

// ---------------------------------------------------------------------------
// Lint

namespace dsl {

inline void lint_path(const PathRef& p, const SchemaCatalog& schema,
                      std::vector<Diagnostic>& out) {
    if (!schema.paths.count(p.dotted()))
        out.push_back({p.pos, Severity::Error, "unknown path '" + p.dotted() + "'"});
}

inline std::optional<ValueKind> term_kind(const Term& t, const SchemaCatalog& schema) {
    if (!t.is_path) return kind_of(t.literal);
    auto it = schema.paths.find(t.path.dotted());
    if (it == schema.paths.end()) return std::nullopt;
    return it->second;
}

inline void lint_condition(const ConditionExpr& c, const SchemaCatalog& schema,
                           std::vector<Diagnostic>& out) {
    switch (c.kind) {
        case ConditionExpr::Kind::And:
        case ConditionExpr::Kind::Or:
        case ConditionExpr::Kind::Not:
            for (const auto& child : c.children) lint_condition(child, schema, out);
            break;
        case ConditionExpr::Kind::PathTest: {
            lint_path(c.path, schema, out);
            auto it = schema.paths.find(c.path.dotted());
            if (it != schema.paths.end() && it->second != ValueKind::Boolean)
                out.push_back({c.pos, Severity::Error,
                               "path '" + c.path.dotted() + "' used as a condition but has kind " +
                                   to_string(it->second)});
            break;
        }
        case ConditionExpr::Kind::Compare: {
            for (const Term* t : {&c.lhs, &c.rhs})
                if (t->is_path) lint_path(t->path, schema, out);
            auto lk = term_kind(c.lhs, schema);
            auto rk = term_kind(c.rhs, schema);
            if (lk && rk) {
                bool ordered = c.relop != RelOp::Eq && c.relop != RelOp::Ne;
                if (*lk != *rk) {
                    out.push_back({c.pos, Severity::Error,
                                   "comparison between " + to_string(*lk) + " and " +
                                       to_string(*rk)});
                } else if (ordered && *lk != ValueKind::Number) {
                    out.push_back({c.pos, Severity::Error,
                                   "ordered comparison requires numbers, got " + to_string(*lk)});
                }
            }
            break;
        }
    }
}

} // namespace dsl

/// Resolves paths, actions, arities and kinds against the schema.
/// An empty result means the norms are clean.
inline std::vector<Diagnostic> lint_norms(const std::vector<NormAST>& norms,
                                          const SchemaCatalog& schema) {
    std::vector<Diagnostic> out;
    for (const auto& n : norms) {
        dsl::lint_condition(n.condition, schema, out);
        for (const auto& a : n.actions) {
            auto it = schema.actions.find(a.name);
            if (it == schema.actions.end()) {
                out.push_back({a.pos, Severity::Error, "unknown action '" + a.name + "'"});
                continue;
            }
            const auto& sig = it->second;
            if (a.args.size() != sig.arg_kinds.size()) {
                out.push_back({a.pos, Severity::Error,
                               "action '" + a.name + "': expected " +
                                   std::to_string(sig.arg_kinds.size()) + " argument(s), found " +
                                   std::to_string(a.args.size())});
                continue;
            }
            for (std::size_t i = 0; i < a.args.size(); ++i) {
                const Term& arg = a.args[i];
                if (arg.is_path) dsl::lint_path(arg.path, schema, out);
                if (sig.arg_kinds[i] == ValueKind::Any) continue;
                auto k = dsl::term_kind(arg, schema);
                if (k && *k != sig.arg_kinds[i])
                    out.push_back({arg.pos, Severity::Error,
                                   "action '" + a.name + "': argument " + std::to_string(i + 1) +
                                       " should be " + to_string(sig.arg_kinds[i]) + ", found " +
                                       to_string(*k)});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pretty printer

namespace dsl {

inline std::string format_number(double x) {
    if (x == static_cast<long long>(x) && std::abs(x) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(x));
        return buf;
    }
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

inline std::string format_value(const Value& v) {
    if (const double* d = std::get_if<double>(&v)) return format_number(*d);
    if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    std::string out = "\"";
    for (char c : std::get<std::string>(v)) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

inline std::string format_term(const Term& t) {
    return t.is_path ? t.path.dotted() : format_value(t.literal);
}

// 0 = or, 1 = and, 2 = not/atom; parentheses only where precedence demands
inline std::string format_cond(const ConditionExpr& c, int parent_level) {
    auto wrap = [&](std::string s, int level) {
        return level < parent_level ? "(" + std::move(s) + ")" : std::move(s);
    };
    switch (c.kind) {
        case ConditionExpr::Kind::Or: {
            std::string s;
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                if (i) s += " or ";
                s += format_cond(c.children[i], 1);
            }
            return wrap(std::move(s), 0);
        }
        case ConditionExpr::Kind::And: {
            std::string s;
            for (std::size_t i = 0; i < c.children.size(); ++i) {
                if (i) s += " and ";
                s += format_cond(c.children[i], 2);
            }
            return wrap(std::move(s), 1);
        }
        case ConditionExpr::Kind::Not:
            return "not " + format_cond(c.children[0], 3);
        case ConditionExpr::Kind::Compare:
            return format_term(c.lhs) + " " + to_string(c.relop) + " " + format_term(c.rhs);
        case ConditionExpr::Kind::PathTest:
            return c.path.dotted();
    }
    return "";
}

inline std::string format_action(const ActionCall& a) {
    std::string s = a.name + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ", ";
        s += format_term(a.args[i]);
    }
    return s + ")";
}

} // namespace dsl

/// Canonical formatting: one clause per line, two-space indent, default
/// priority omitted, redundant parentheses dropped. Reparses to equal ASTs.
inline std::string pretty_print(const std::vector<NormAST>& norms) {
    std::ostringstream out;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const NormAST& n = norms[i];
        if (i) out << "\n";
        out << "norm " << n.name;
        if (n.priority != 0) out << " priority " << n.priority;
        out << "\n  whenever " << dsl::format_cond(n.condition, 0);
        out << "\n  then " << dsl::format_action(n.actions[0]);
        for (std::size_t a = 1; a < n.actions.size(); ++a)
            out << ";\n    " << dsl::format_action(n.actions[a]);
        out << "\n";
    }
    return out.str();
}

} // namespace normroute
