#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "normroute/errors.hpp"

namespace normroute {

using Value = std::variant<double, std::string, bool>;

enum class ValueKind { Number, String, Boolean, Any };

inline ValueKind kind_of(const Value& v) {
    if (std::holds_alternative<double>(v)) return ValueKind::Number;
    if (std::holds_alternative<std::string>(v)) return ValueKind::String;
    return ValueKind::Boolean;
}

inline std::string to_string(ValueKind k) {
    switch (k) {
        case ValueKind::Number: return "number";
        case ValueKind::String: return "string";
        case ValueKind::Boolean: return "boolean";
        case ValueKind::Any: return "any";
    }
    return "?";
}

struct SourcePos {
    int line = 0;
    int col = 0;
    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

/// Dotted identifier chain referencing application state (e.g. event.type).
struct PathRef {
    std::vector<std::string> parts;
    SourcePos pos;

    std::string dotted() const {
        std::string s;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) s += '.';
            s += parts[i];
        }
        return s;
    }

    friend bool operator==(const PathRef& a, const PathRef& b) {
        return a.parts == b.parts; // position is not part of identity
    }
};

/// A comparison operand or action argument: a path or a literal.
struct Term {
    bool is_path = false;
    PathRef path;
    Value literal = false;
    SourcePos pos;

    friend bool operator==(const Term& a, const Term& b) {
        if (a.is_path != b.is_path) return false;
        return a.is_path ? a.path == b.path : a.literal == b.literal;
    }
};

enum class RelOp { Eq, Ne, Lt, Le, Gt, Ge };

inline std::string to_string(RelOp op) {
    switch (op) {
        case RelOp::Eq: return "==";
        case RelOp::Ne: return "!=";
        case RelOp::Lt: return "<";
        case RelOp::Le: return "<=";
        case RelOp::Gt: return ">";
        case RelOp::Ge: return ">=";
    }
    return "?";
}

struct ConditionExpr {
    enum class Kind { And, Or, Not, Compare, PathTest };

    Kind kind = Kind::PathTest;
    std::vector<ConditionExpr> children; // And/Or: >=2, Not: 1
    RelOp relop = RelOp::Eq;             // Compare
    Term lhs, rhs;                       // Compare
    PathRef path;                        // PathTest (bare boolean path)
    SourcePos pos;

    friend bool operator==(const ConditionExpr& a, const ConditionExpr& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Kind::And:
            case Kind::Or:
            case Kind::Not: return a.children == b.children;
            case Kind::Compare:
                return a.relop == b.relop && a.lhs == b.lhs && a.rhs == b.rhs;
            case Kind::PathTest: return a.path == b.path;
        }
        return false;
    }
};

struct ActionCall {
    std::string name;
    std::vector<Term> args;
    SourcePos pos;

    friend bool operator==(const ActionCall& a, const ActionCall& b) {
        return a.name == b.name && a.args == b.args;
    }
};

/// A parsed if-then norm.
struct NormAST {
    std::string name;
    int priority = 0;
    ConditionExpr condition;
    std::vector<ActionCall> actions;
    SourcePos pos;

    friend bool operator==(const NormAST& a, const NormAST& b) {
        return a.name == b.name && a.priority == b.priority &&
               a.condition == b.condition && a.actions == b.actions;
    }
};

struct ActionSignature {
    std::vector<ValueKind> arg_kinds; // arity = size
};

/// Legal state paths and action vocabulary that norms may reference.
struct SchemaCatalog {
    std::map<std::string, ValueKind> paths;
    std::map<std::string, ActionSignature> actions;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    SourcePos pos;
    Severity severity = Severity::Error;
    std::string message;

    std::string render(const std::string& file = "<input>") const {
        return file + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.col) +
               ": " + (severity == Severity::Error ? "error" : "warning") + ": " + message;
    }
};

} // namespace normroute
