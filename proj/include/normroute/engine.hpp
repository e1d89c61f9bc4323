#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "normroute/matching.hpp"
#include "normroute/norm_parser.hpp"
#include "normroute/profile.hpp"

namespace normroute {

enum class EventType { QuestionCreated, AnswerSubmitted, FeedbackSubmitted, TimerTick };

inline std::string to_string(EventType t) {
    switch (t) {
        case EventType::QuestionCreated: return "question_created";
        case EventType::AnswerSubmitted: return "answer_submitted";
        case EventType::FeedbackSubmitted: return "feedback_submitted";
        case EventType::TimerTick: return "timer_tick";
    }
    throw ContractError("invalid EventType");
}

inline EventType event_type_from_string(const std::string& s) {
    if (s == "question_created") return EventType::QuestionCreated;
    if (s == "answer_submitted") return EventType::AnswerSubmitted;
    if (s == "feedback_submitted") return EventType::FeedbackSubmitted;
    if (s == "timer_tick") return EventType::TimerTick;
    throw ValidationError("unknown event type '" + s + "'");
}

struct Event {
    EventType type = EventType::TimerTick;
    std::string question_id;
    std::string user_id; // questioner for question_created, answerer otherwise
    std::string rating;  // "helpful" | "unhelpful" on feedback_submitted
    double timestamp = 0.0;
    std::string text;                 // question text
    std::optional<MatchQuery> query;  // question_created payload

    void validate() const {
        switch (type) {
            case EventType::QuestionCreated:
                if (question_id.empty() || user_id.empty() || !query)
                    throw ValidationError(
                        "question_created requires question_id, user_id and query");
                break;
            case EventType::AnswerSubmitted:
                if (question_id.empty() || user_id.empty())
                    throw ValidationError("answer_submitted requires question_id and user_id");
                break;
            case EventType::FeedbackSubmitted:
                if (question_id.empty() || user_id.empty() || rating.empty())
                    throw ValidationError(
                        "feedback_submitted requires question_id, user_id and rating");
                break;
            case EventType::TimerTick:
                break;
        }
    }
};

struct ActionEffect {
    std::uint64_t seq = 0;
    std::string norm;
    std::string action;
    std::vector<Value> args;
    std::string event_id;
    std::vector<std::string> recipients; // select_responders only
};

inline nlohmann::json value_to_json(const Value& v) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    return std::get<std::string>(v);
}

inline nlohmann::json effect_to_json(const ActionEffect& e) {
    nlohmann::json j;
    j["seq"] = e.seq;
    j["norm"] = e.norm;
    j["action"] = e.action;
    j["args"] = nlohmann::json::array();
    for (const auto& a : e.args) j["args"].push_back(value_to_json(a));
    j["event_id"] = e.event_id;
    if (!e.recipients.empty()) j["recipients"] = e.recipients;
    return j;
}

struct LeafValuation {
    std::string expr;     // rendered condition leaf
    std::string observed; // path = observed value bindings
    bool outcome = false;
};

/// Why a norm did or did not fire on an event.
struct ExplanationTrace {
    std::string norm;
    bool fired = false;
    std::vector<LeafValuation> leaves;
    int first_false = -1; // index of the first false leaf when not fired
};

struct FaultRecord {
    std::string norm;
    std::string action;
    std::string reason;
};

struct HandleResult {
    std::string event_id;
    std::vector<ActionEffect> effects;
    std::vector<ExplanationTrace> traces;
    std::vector<FaultRecord> faults;
};

struct OpenQuestion {
    std::string id;
    std::string questioner;
    std::string text;
    MatchQuery query;
    std::string status = "created"; // created -> dispatched -> answered
    std::vector<std::string> recipients;
    std::vector<std::string> answers;
};

/// State paths and action vocabulary the engine exposes to norms.
inline SchemaCatalog engine_schema() {
    SchemaCatalog s;
    s.paths = {
        {"event.type", ValueKind::String},
        {"event.question_id", ValueKind::String},
        {"event.user_id", ValueKind::String},
        {"event.rating", ValueKind::String},
        {"event.timestamp", ValueKind::Number},
        {"question.id", ValueKind::String},
        {"question.text", ValueKind::String},
        {"question.k", ValueKind::Number},
        {"question.status", ValueKind::String},
        {"questioner.id", ValueKind::String},
        {"questioner.gender", ValueKind::String},
        {"candidate.id", ValueKind::String},
        {"candidate.gender", ValueKind::String},
        {"candidate.score", ValueKind::Number},
        {"community.id", ValueKind::String},
        {"community.size", ValueKind::Number},
    };
    s.actions = {
        {"send_message", {{ValueKind::String, ValueKind::String}}},
        {"update_profile", {{ValueKind::String, ValueKind::String, ValueKind::Any}}},
        {"select_responders", {{ValueKind::String, ValueKind::Number}}},
        {"notify", {{ValueKind::String, ValueKind::String}}},
        {"set", {{ValueKind::Any, ValueKind::Any}}},
    };
    return s;
}

/// Single-threaded norm interpreter: one event fully processed before the
/// next; conditions read the pre-event snapshot plus the event payload.
class Engine {
public:
    Engine(Community community, MetricParams params = {})
        : community_(std::move(community)), params_(params), schema_(engine_schema()) {}

    /// Replaces the norm set atomically; on parse or lint failure the old
    /// norms stay active and the diagnostics are returned.
    std::vector<Diagnostic> reload_norms(std::string_view text) {
        ParseResult pr = parse_norms(text);
        if (!pr.ok()) return pr.diagnostics;
        auto diags = lint_norms(pr.norms, schema_);
        if (!diags.empty()) return diags;
        norms_ = std::move(pr.norms);
        ++version_;
        return {};
    }

    int norm_version() const { return version_; }
    const std::vector<NormAST>& norms() const { return norms_; }
    const Community& community() const { return community_; }
    const std::map<std::string, OpenQuestion>& questions() const { return questions_; }
    const std::vector<ActionEffect>& effect_log() const { return log_; }

    HandleResult handle_event(const Event& event) {
        event.validate();
        HandleResult result;
        result.event_id = "e" + std::to_string(event_counter_++);

        // Platform bookkeeping happens regardless of which norms fire.
        if (event.type == EventType::QuestionCreated) {
            if (!community_.has_member(event.user_id))
                throw ValidationError("questioner '" + event.user_id + "' is not a member");
            OpenQuestion q;
            q.id = event.question_id;
            q.questioner = event.user_id;
            q.text = event.text;
            q.query = *event.query;
            q.query.questioner = event.user_id;
            questions_[q.id] = q;
        } else if (event.type == EventType::AnswerSubmitted) {
            auto it = questions_.find(event.question_id);
            if (it != questions_.end()) {
                it->second.answers.push_back(event.user_id);
                it->second.status = "answered";
            }
        }

        auto env = build_env(event);

        // Decide firing on the shared snapshot, then execute in
        // (priority desc, declaration order).
        std::vector<const NormAST*> order;
        for (const auto& n : norms_) order.push_back(&n);
        std::stable_sort(order.begin(), order.end(),
                         [](const NormAST* a, const NormAST* b) { return a->priority > b->priority; });

        std::vector<const NormAST*> fired;
        for (const NormAST* n : order) {
            ExplanationTrace trace;
            trace.norm = n->name;
            trace.fired = eval_condition(n->condition, env, trace.leaves);
            if (!trace.fired) {
                for (std::size_t i = 0; i < trace.leaves.size(); ++i) {
                    if (!trace.leaves[i].outcome) {
                        trace.first_false = static_cast<int>(i);
                        break;
                    }
                }
            }
            if (trace.fired) fired.push_back(n);
            result.traces.push_back(std::move(trace));
        }

        for (const NormAST* n : fired)
            for (const ActionCall& action : n->actions)
                execute_action(*n, action, env, event, result);

        for (const auto& e : result.effects) log_.push_back(e);
        return result;
    }

private:
    using Env = std::map<std::string, Value>;

    Env build_env(const Event& event) const {
        Env env;
        for (const auto& [path, kind] : schema_.paths) {
            switch (kind) {
                case ValueKind::Number: env[path] = 0.0; break;
                case ValueKind::Boolean: env[path] = false; break;
                default: env[path] = std::string(); break;
            }
        }
        for (const auto& [path, v] : vars_) env[path] = v;

        env["community.id"] = community_.id();
        env["community.size"] = static_cast<double>(community_.size());
        env["event.type"] = to_string(event.type);
        env["event.question_id"] = event.question_id;
        env["event.user_id"] = event.user_id;
        env["event.rating"] = event.rating;
        env["event.timestamp"] = event.timestamp;

        auto it = questions_.find(event.question_id);
        if (it != questions_.end()) {
            const OpenQuestion& q = it->second;
            env["question.id"] = q.id;
            env["question.text"] = q.text;
            env["question.k"] = static_cast<double>(q.query.k);
            env["question.status"] = q.status;
            if (community_.has_member(q.questioner)) {
                const Profile& p = community_.member(q.questioner);
                env["questioner.id"] = p.id;
                env["questioner.gender"] = p.gender;
            }
        }
        return env;
    }

    static double as_number(const Value& v) {
        if (const double* d = std::get_if<double>(&v)) return *d;
        throw ContractError("value is not a number");
    }

    Value resolve_term(const Term& t, const Env& env) const {
        if (!t.is_path) return t.literal;
        auto it = env.find(t.path.dotted());
        if (it == env.end())
            throw ContractError("unknown path '" + t.path.dotted() + "' at evaluation time");
        return it->second;
    }

    static bool compare(RelOp op, const Value& a, const Value& b) {
        switch (op) {
            case RelOp::Eq: return a == b;
            case RelOp::Ne: return a != b;
            default: break;
        }
        double x = as_number(a), y = as_number(b);
        switch (op) {
            case RelOp::Lt: return x < y;
            case RelOp::Le: return x <= y;
            case RelOp::Gt: return x > y;
            case RelOp::Ge: return x >= y;
            default: return false;
        }
    }

    static std::string render_observed(const Term& t, const Env& env) {
        if (!t.is_path) return "";
        auto it = env.find(t.path.dotted());
        std::string v = it == env.end() ? "?" : dsl::format_value(it->second);
        return t.path.dotted() + " = " + v;
    }

    // Full evaluation, no short circuit, so every leaf lands in the trace.
    bool eval_condition(const ConditionExpr& c, const Env& env,
                        std::vector<LeafValuation>& leaves) const {
        switch (c.kind) {
            case ConditionExpr::Kind::And: {
                bool all = true;
                for (const auto& child : c.children)
                    all = eval_condition(child, env, leaves) && all;
                return all;
            }
            case ConditionExpr::Kind::Or: {
                bool any = false;
                for (const auto& child : c.children)
                    any = eval_condition(child, env, leaves) || any;
                return any;
            }
            case ConditionExpr::Kind::Not:
                return !eval_condition(c.children[0], env, leaves);
            case ConditionExpr::Kind::Compare: {
                bool out = compare(c.relop, resolve_term(c.lhs, env), resolve_term(c.rhs, env));
                LeafValuation leaf;
                leaf.expr = dsl::format_cond(c, 0);
                std::string lo = render_observed(c.lhs, env);
                std::string ro = render_observed(c.rhs, env);
                leaf.observed = lo + (lo.empty() || ro.empty() ? "" : ", ") + ro;
                leaf.outcome = out;
                leaves.push_back(std::move(leaf));
                return out;
            }
            case ConditionExpr::Kind::PathTest: {
                Value v = resolve_term(Term{true, c.path, false, c.pos}, env);
                bool out = std::holds_alternative<bool>(v) && std::get<bool>(v);
                leaves.push_back({c.path.dotted(),
                                  c.path.dotted() + " = " + dsl::format_value(v), out});
                return out;
            }
        }
        return false;
    }

    void execute_action(const NormAST& norm, const ActionCall& action, const Env& env,
                        const Event& event, HandleResult& result) {
        auto fault = [&](const std::string& reason) {
            result.faults.push_back({norm.name, action.name, reason});
        };

        std::vector<Value> args;
        if (action.name == "set") {
            // first argument is the target path, not a read
            if (!action.args[0].is_path) {
                fault("set target must be a path");
                return;
            }
            args.push_back(action.args[0].path.dotted());
            args.push_back(resolve_term(action.args[1], env));
        } else {
            for (const Term& t : action.args) args.push_back(resolve_term(t, env));
        }

        auto emit = [&](const std::string& name, std::vector<Value> a,
                        std::vector<std::string> recipients = {}) {
            ActionEffect e;
            e.seq = seq_++;
            e.norm = norm.name;
            e.action = name;
            e.args = std::move(a);
            e.event_id = result.event_id;
            e.recipients = std::move(recipients);
            result.effects.push_back(std::move(e));
        };

        if (action.name == "send_message" || action.name == "notify") {
            const std::string& user = std::get<std::string>(args[0]);
            if (!community_.has_member(user)) {
                fault("unknown user '" + user + "'");
                return;
            }
            emit(action.name, std::move(args));
        } else if (action.name == "update_profile") {
            const std::string& user = std::get<std::string>(args[0]);
            if (!community_.has_member(user)) {
                fault("unknown user '" + user + "'");
                return;
            }
            emit(action.name, std::move(args));
        } else if (action.name == "set") {
            vars_[std::get<std::string>(args[0])] = args[1];
            emit(action.name, std::move(args));
        } else if (action.name == "select_responders") {
            const std::string& qid = std::get<std::string>(args[0]);
            auto it = questions_.find(qid);
            if (it == questions_.end()) {
                fault("unknown question '" + qid + "'");
                return;
            }
            OpenQuestion& q = it->second;
            MatchQuery query = q.query;
            query.k = static_cast<int>(as_number(args[1]));
            if (query.k <= 0) {
                fault("non-positive fan-out k");
                return;
            }
            std::vector<std::string> chosen = select_responders(query, community_, params_);
            q.recipients = chosen;
            q.status = "dispatched";
            emit("select_responders", std::move(args), chosen);
            for (const auto& r : chosen)
                emit("send_message", {Value(r), Value(q.id)});
        } else {
            fault("unknown action '" + action.name + "'");
        }
        (void)event;
    }

    Community community_;
    MetricParams params_;
    SchemaCatalog schema_;
    std::vector<NormAST> norms_;
    int version_ = 0;
    std::map<std::string, OpenQuestion> questions_;
    std::map<std::string, Value> vars_;
    std::vector<ActionEffect> log_;
    std::uint64_t seq_ = 0;
    std::uint64_t event_counter_ = 0;
};

/// Newline-delimited JSON export of an effect log.
inline std::string effects_to_ndjson(const std::vector<ActionEffect>& effects) {
    std::string out;
    for (const auto& e : effects) out += effect_to_json(e).dump() + "\n";
    return out;
}

/// Human-readable rendering of one norm's trace; the blocking leaf of a
/// non-fired norm is marked.
inline std::string explain(const std::vector<ExplanationTrace>& traces,
                           const std::string& norm_name) {
    for (const auto& t : traces) {
        if (t.norm != norm_name) continue;
        std::ostringstream out;
        out << "norm " << t.norm << ": " << (t.fired ? "fired" : "did not fire") << "\n";
        for (std::size_t i = 0; i < t.leaves.size(); ++i) {
            const auto& leaf = t.leaves[i];
            out << "  " << leaf.expr;
            if (!leaf.observed.empty()) out << "  [" << leaf.observed << "]";
            out << "  -> " << (leaf.outcome ? "true" : "false");
            if (!t.fired && static_cast<int>(i) == t.first_false) out << "  <== first failure";
            out << "\n";
        }
        return out.str();
    }
    throw ContractError("no trace for norm '" + norm_name + "'");
}

} // namespace normroute
