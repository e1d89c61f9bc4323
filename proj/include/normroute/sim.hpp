#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "normroute/engine.hpp"
#include "normroute/matching.hpp"
#include "normroute/profile.hpp"
#include "normroute/rng.hpp"

namespace normroute {

// ---------------------------------------------------------------------------
// Histogram

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

/// Fixed-width bins over [0,1]; bin i covers [i/bins,(i+1)/bins), the last
/// bin is closed at 1.
inline std::vector<HistogramBin> histogram(const std::vector<double>& scores, int bins = 10) {
    if (bins <= 0) throw ContractError("bins must be positive");
    std::vector<HistogramBin> out(bins);
    for (int i = 0; i < bins; ++i) {
        out[i].low = static_cast<double>(i) / bins;
        out[i].high = static_cast<double>(i + 1) / bins;
    }
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0))
            throw ContractError("score " + std::to_string(s) + " out of [0,1]");
        int idx = std::min(bins - 1, static_cast<int>(s * bins));
        out[idx].count++;
    }
    return out;
}

/// Log-scaled bar: round(10*log10(count+1)) characters.
inline int histogram_bar_length(std::size_t count) {
    return static_cast<int>(std::lround(10.0 * std::log10(static_cast<double>(count) + 1.0)));
}

inline std::string render_histogram(const std::vector<HistogramBin>& bins) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    for (const auto& b : bins) {
        out << "[" << b.low << "," << b.high << (b.high >= 1.0 ? "]" : ")") << " ";
        out << std::string(histogram_bar_length(b.count), '#');
        out << " (" << b.count << ")\n";
    }
    return out.str();
}

inline std::string histogram_to_csv(const std::vector<HistogramBin>& bins) {
    std::ostringstream out;
    out << "bin_low,bin_high,count\n";
    out.precision(9);
    for (const auto& b : bins) out << b.low << "," << b.high << "," << b.count << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Feedback and fan-out adaptation

struct FeedbackRecord {
    std::string question_id;
    int recipients = 0;
    int answers = 0;
    int helpful = 0;
    int unhelpful = 0;
};

/// Smallest k in [k_min,k_max] whose chance of at least one answer reaches
/// `target`, under per-recipient answer probability estimated from history.
/// Empty history (or zero estimate) falls back to the default fan-out.
inline int adapt_k(const std::vector<FeedbackRecord>& history, int k_min = 1, int k_max = 10,
                   double target = 0.95) {
    long total_recipients = 0, total_answers = 0;
    for (const auto& r : history) {
        total_recipients += r.recipients;
        total_answers += r.answers;
    }
    if (total_recipients == 0 || total_answers == 0) return kDefaultFanout;
    double p = static_cast<double>(total_answers) / static_cast<double>(total_recipients);
    for (int k = k_min; k <= k_max; ++k)
        if (1.0 - std::pow(1.0 - p, k) >= target) return k;
    return k_max;
}

// ---------------------------------------------------------------------------
// Scenario

struct ScriptEvent {
    double t = 0.0;
    std::string type; // question_created | answer_submitted | feedback_submitted |
                      // timer_tick | reload
    std::string question_id;
    std::string questioner;
    std::string user;
    std::string rating;
    std::string text;
    std::optional<MatchQuery> query;
    double answer_prob = 0.0;
    double helpful_prob = 1.0;
    std::string reload_path;
};

struct Scenario {
    // community source: either a file path or a generator config + seed
    std::string community_path;
    std::optional<GeneratorConfig> generator;
    std::uint64_t generator_seed = 0;

    std::string norms_path;
    std::uint64_t seed = 0;
    std::vector<ScriptEvent> events;
    MetricParams params;

    void validate() const {
        if (community_path.empty() && !generator)
            throw ValidationError("scenario needs a community path or generator config");
        if (norms_path.empty()) throw ValidationError("scenario needs a norm file");
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& e : events) {
            if (e.t < prev) throw ValidationError("event script is not temporally ordered");
            prev = e.t;
        }
    }
};

namespace detail {

inline GeneratorConfig generator_from_json(const nlohmann::json& j) {
    GeneratorConfig cfg;
    cfg.size = j.at("size").get<int>();
    cfg.interest_dim = j.value("interest_dim", 4);
    cfg.values_dim = j.value("values_dim", 4);
    if (j.contains("gender_mix")) {
        for (const auto& [label, p] : j.at("gender_mix").items())
            cfg.gender_mix.emplace_back(label, p.get<double>());
    } else {
        cfg.gender_mix = {{"female", 0.5}, {"male", 0.5}};
    }
    cfg.edge_probability = j.value("edge_probability", 0.1);
    if (j.contains("location_region")) {
        const auto& r = j.at("location_region");
        cfg.location_region = {r.at("lat_min").get<double>(), r.at("lat_max").get<double>(),
                               r.at("lon_min").get<double>(), r.at("lon_max").get<double>()};
    } else {
        cfg.location_region = {55.0, 56.0, 9.0, 10.0}; // campus-scale box
    }
    return cfg;
}

inline std::string resolve_path(const std::string& p, const std::string& base_dir) {
    std::filesystem::path fp(p);
    if (fp.is_absolute() || base_dir.empty()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
}

} // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = "") {
    Scenario sc;
    const auto& comm = j.at("community");
    if (comm.is_string()) {
        sc.community_path = detail::resolve_path(comm.get<std::string>(), base_dir);
    } else {
        sc.generator = detail::generator_from_json(comm.at("generator"));
        sc.generator_seed = comm.value("seed", 0);
    }
    sc.norms_path = detail::resolve_path(j.at("norms").get<std::string>(), base_dir);
    sc.seed = j.value("seed", 0);
    if (j.contains("decay_length_km")) sc.params.decay_length_km = j.at("decay_length_km");
    int auto_qid = 0;
    for (const auto& ej : j.at("events")) {
        ScriptEvent e;
        e.t = ej.value("t", 0.0);
        e.type = ej.value("type", ej.contains("reload") ? std::string("reload")
                                                        : std::string("timer_tick"));
        e.question_id = ej.value("question_id", std::string());
        e.questioner = ej.value("questioner", std::string());
        e.user = ej.value("user", std::string());
        e.rating = ej.value("rating", std::string());
        e.text = ej.value("text", std::string());
        if (ej.contains("query")) e.query = match_query_from_json(ej.at("query"));
        e.answer_prob = ej.value("answer_prob", 0.0);
        e.helpful_prob = ej.value("helpful_prob", 1.0);
        if (ej.contains("reload"))
            e.reload_path = detail::resolve_path(ej.at("reload").get<std::string>(), base_dir);
        if (e.type == "question_created" && e.question_id.empty())
            e.question_id = "q" + std::to_string(auto_qid);
        if (e.type == "question_created") ++auto_qid;
        sc.events.push_back(std::move(e));
    }
    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return scenario_from_json(doc, std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Simulation report

struct QuestionRecord {
    std::string id;
    std::string questioner;
    double t = 0.0;
    int norm_version = 0;
    std::vector<MatchScore> selected;
    std::vector<std::string> answers;
    std::vector<ExplanationTrace> traces;
};

struct SimulationReport {
    std::uint64_t seed = 0;
    std::string community_id;
    std::size_t community_size = 0;
    std::vector<QuestionRecord> questions;
    std::vector<HistogramBin> score_histogram;
    std::vector<FeedbackRecord> feedback;
    std::vector<int> k_trajectory;         // adapt_k after each question
    std::vector<int> norm_version_history; // version after each scripted event
};

inline nlohmann::json match_score_to_json(const MatchScore& ms) {
    nlohmann::json j;
    j["id"] = ms.candidate;
    j["aggregate"] = ms.aggregate;
    j["tier"] = ms.tier;
    for (const auto& [dim, s] : ms.dimension_scores) j["scores"][to_string(dim)] = s;
    return j;
}

inline nlohmann::json trace_to_json(const ExplanationTrace& t) {
    nlohmann::json j;
    j["norm"] = t.norm;
    j["fired"] = t.fired;
    j["first_false"] = t.first_false;
    j["leaves"] = nlohmann::json::array();
    for (const auto& leaf : t.leaves)
        j["leaves"].push_back({{"expr", leaf.expr},
                               {"observed", leaf.observed},
                               {"outcome", leaf.outcome}});
    return j;
}

inline ExplanationTrace trace_from_json(const nlohmann::json& j) {
    ExplanationTrace t;
    t.norm = j.at("norm").get<std::string>();
    t.fired = j.at("fired").get<bool>();
    t.first_false = j.at("first_false").get<int>();
    for (const auto& lj : j.at("leaves"))
        t.leaves.push_back({lj.at("expr").get<std::string>(),
                            lj.at("observed").get<std::string>(),
                            lj.at("outcome").get<bool>()});
    return t;
}

inline nlohmann::json report_to_json(const SimulationReport& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["community"] = {{"id", r.community_id}, {"size", r.community_size}};
    j["questions"] = nlohmann::json::array();
    for (const auto& q : r.questions) {
        nlohmann::json qj;
        qj["id"] = q.id;
        qj["questioner"] = q.questioner;
        qj["t"] = q.t;
        qj["norm_version"] = q.norm_version;
        qj["selected"] = nlohmann::json::array();
        for (const auto& ms : q.selected) qj["selected"].push_back(match_score_to_json(ms));
        qj["answers"] = q.answers;
        qj["traces"] = nlohmann::json::array();
        for (const auto& t : q.traces) qj["traces"].push_back(trace_to_json(t));
        j["questions"].push_back(std::move(qj));
    }
    j["histogram"] = nlohmann::json::array();
    for (const auto& b : r.score_histogram)
        j["histogram"].push_back({{"low", b.low}, {"high", b.high}, {"count", b.count}});
    j["feedback"] = nlohmann::json::array();
    for (const auto& f : r.feedback)
        j["feedback"].push_back({{"question", f.question_id},
                                 {"recipients", f.recipients},
                                 {"answers", f.answers},
                                 {"helpful", f.helpful},
                                 {"unhelpful", f.unhelpful}});
    j["k_trajectory"] = r.k_trajectory;
    j["norm_version_history"] = r.norm_version_history;
    return j;
}

inline std::string serialize_report(const SimulationReport& r) {
    return report_to_json(r).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Scenario runner

inline Community scenario_community(const Scenario& sc) {
    if (sc.generator) return generate_synthetic(*sc.generator, sc.generator_seed);
    return load_community(sc.community_path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Replays the scripted events through the engine. Every random draw
/// (answers, ratings) comes from the run seed, so the report is a pure
/// function of (scenario, seed).
inline SimulationReport run_scenario(const Scenario& sc) {
    sc.validate();
    Community community = scenario_community(sc);
    Engine engine(community, sc.params);

    std::string norm_text = read_file(sc.norms_path);
    auto diags = engine.reload_norms(norm_text);
    if (!diags.empty()) {
        std::string msg = "norm file rejected:";
        for (const auto& d : diags) msg += "\n" + d.render(sc.norms_path);
        throw ValidationError(msg);
    }

    Rng rng(sc.seed);
    SimulationReport report;
    report.seed = sc.seed;
    report.community_id = community.id();
    report.community_size = community.size();

    std::vector<double> selected_aggregates;

    for (const auto& se : sc.events) {
        if (se.type == "reload") {
            auto rd = engine.reload_norms(read_file(se.reload_path));
            if (!rd.empty()) {
                std::string msg = "mid-run reload rejected:";
                for (const auto& d : rd) msg += "\n" + d.render(se.reload_path);
                throw ValidationError(msg);
            }
            report.norm_version_history.push_back(engine.norm_version());
            continue;
        }

        Event ev;
        ev.type = event_type_from_string(se.type);
        ev.question_id = se.question_id;
        ev.user_id = !se.questioner.empty() ? se.questioner : se.user;
        ev.rating = se.rating;
        ev.timestamp = se.t;
        ev.text = se.text;
        ev.query = se.query;

        HandleResult hr = engine.handle_event(ev);
        report.norm_version_history.push_back(engine.norm_version());

        if (ev.type != EventType::QuestionCreated) continue;

        QuestionRecord qr;
        qr.id = se.question_id;
        qr.questioner = ev.user_id;
        qr.t = se.t;
        qr.norm_version = engine.norm_version();
        qr.traces = hr.traces;

        // Recover the dispatched set and score it for the report.
        const OpenQuestion& oq = engine.questions().at(se.question_id);
        MatchQuery query = oq.query;
        for (const auto& eff : hr.effects) {
            if (eff.action != "select_responders") continue;
            query.k = static_cast<int>(std::get<double>(eff.args[1]));
            const Profile& questioner = community.member(oq.questioner);
            for (const auto& rid : eff.recipients) {
                MatchScore ms =
                    score_candidate(query, community, questioner, community.member(rid), sc.params);
                selected_aggregates.push_back(ms.aggregate);
                qr.selected.push_back(std::move(ms));
            }
        }

        // Bernoulli answer model; answered recipients reply in dispatch order.
        FeedbackRecord fb;
        fb.question_id = se.question_id;
        fb.recipients = static_cast<int>(qr.selected.size());
        for (const auto& ms : qr.selected) {
            if (!rng.bernoulli(se.answer_prob)) continue;
            fb.answers++;
            qr.answers.push_back(ms.candidate);
            Event answer;
            answer.type = EventType::AnswerSubmitted;
            answer.question_id = se.question_id;
            answer.user_id = ms.candidate;
            answer.timestamp = se.t;
            engine.handle_event(answer);

            bool helpful = rng.bernoulli(se.helpful_prob);
            (helpful ? fb.helpful : fb.unhelpful)++;
            Event rate;
            rate.type = EventType::FeedbackSubmitted;
            rate.question_id = se.question_id;
            rate.user_id = oq.questioner;
            rate.rating = helpful ? "helpful" : "unhelpful";
            rate.timestamp = se.t;
            engine.handle_event(rate);
        }
        report.feedback.push_back(fb);
        report.questions.push_back(std::move(qr));
        report.k_trajectory.push_back(adapt_k(report.feedback));
    }

    report.score_histogram = histogram(selected_aggregates);
    return report;
}

} // namespace normroute
