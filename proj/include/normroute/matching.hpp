#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "normroute/errors.hpp"
#include "normroute/metrics.hpp"
#include "normroute/profile.hpp"

namespace normroute {

/// Whether a dimension's requirement seeks similarity/closeness (score = s)
/// or diversity/distance (score = 1 - s).
enum class Polarity { Similar, Diverse };

enum class AggregationMode { Weighted, Lexicographic };

inline constexpr int kDefaultFanout = 5;
inline constexpr double kDefaultTierThreshold = 0.6;

/// A question's diversity requirements.
struct MatchQuery {
    std::string questioner;
    std::map<Dimension, Polarity> requirements;
    AggregationMode mode = AggregationMode::Weighted;
    std::map<Dimension, double> weights;          // Weighted mode
    std::set<Dimension> primary;                  // Lexicographic mode
    std::set<Dimension> secondary;
    double threshold = kDefaultTierThreshold;
    int k = kDefaultFanout;
    std::string diversify_attribute = "gender";

    void validate() const {
        if (k <= 0) throw ValidationError("k must be positive");
        if (requirements.empty())
            throw ValidationError("query must specify at least one dimension");
        if (mode == AggregationMode::Weighted) {
            double total = 0.0;
            for (const auto& [dim, w] : weights) {
                if (w < 0.0) throw ValidationError("negative weight for " + to_string(dim));
                if (!requirements.count(dim))
                    throw ValidationError("weight on unspecified dimension " + to_string(dim));
                total += w;
            }
            if (total <= 0.0)
                throw ValidationError("weighted mode needs at least one positive weight");
        } else {
            if (threshold < 0.0 || threshold > 1.0)
                throw ValidationError("threshold must lie in [0,1]");
            for (Dimension d : primary) {
                if (secondary.count(d))
                    throw ValidationError(to_string(d) + " is both primary and secondary");
                if (!requirements.count(d))
                    throw ValidationError("primary dimension " + to_string(d) + " is unspecified");
            }
            for (Dimension d : secondary)
                if (!requirements.count(d))
                    throw ValidationError("secondary dimension " + to_string(d) + " is unspecified");
        }
    }
};

/// Per-candidate scoring result.
struct MatchScore {
    std::string candidate;
    std::map<Dimension, double> dimension_scores;
    double aggregate = 0.0;
    int tier = 1; // 1 = all primary dimensions satisfied; always 1 in Weighted mode
};

inline Polarity polarity_from_string(const std::string& s) {
    if (s == "similar" || s == "close") return Polarity::Similar;
    if (s == "diverse" || s == "distant") return Polarity::Diverse;
    throw ValidationError("unknown polarity '" + s + "'");
}

inline std::string to_string(Polarity p) {
    return p == Polarity::Similar ? "similar" : "diverse";
}

inline MatchQuery match_query_from_json(const nlohmann::json& j) {
    MatchQuery q;
    if (j.contains("questioner")) q.questioner = j.at("questioner").get<std::string>();
    for (const auto& [name, pol] : j.at("dimensions").items())
        q.requirements[dimension_from_string(name)] = polarity_from_string(pol.get<std::string>());
    std::string mode = j.value("mode", std::string("weighted"));
    if (mode == "weighted") {
        q.mode = AggregationMode::Weighted;
        if (j.contains("weights")) {
            for (const auto& [name, w] : j.at("weights").items())
                q.weights[dimension_from_string(name)] = w.get<double>();
        } else {
            for (const auto& [dim, pol] : q.requirements) q.weights[dim] = 1.0;
        }
    } else if (mode == "lexicographic") {
        q.mode = AggregationMode::Lexicographic;
        for (const auto& name : j.value("primary", std::vector<std::string>{}))
            q.primary.insert(dimension_from_string(name));
        for (const auto& name : j.value("secondary", std::vector<std::string>{}))
            q.secondary.insert(dimension_from_string(name));
        q.threshold = j.value("threshold", kDefaultTierThreshold);
    } else {
        throw ValidationError("unknown mode '" + mode + "'");
    }
    q.k = j.value("k", kDefaultFanout);
    q.diversify_attribute = j.value("diversify_attribute", std::string("gender"));
    q.validate();
    return q;
}

inline nlohmann::json match_query_to_json(const MatchQuery& q) {
    nlohmann::json j;
    if (!q.questioner.empty()) j["questioner"] = q.questioner;
    for (const auto& [dim, pol] : q.requirements)
        j["dimensions"][to_string(dim)] = to_string(pol);
    if (q.mode == AggregationMode::Weighted) {
        j["mode"] = "weighted";
        for (const auto& [dim, w] : q.weights) j["weights"][to_string(dim)] = w;
    } else {
        j["mode"] = "lexicographic";
        j["primary"] = nlohmann::json::array();
        for (Dimension d : q.primary) j["primary"].push_back(to_string(d));
        j["secondary"] = nlohmann::json::array();
        for (Dimension d : q.secondary) j["secondary"].push_back(to_string(d));
        j["threshold"] = q.threshold;
    }
    j["k"] = q.k;
    j["diversify_attribute"] = q.diversify_attribute;
    return j;
}

/// Polarity flip over the base metric.
inline double dimension_score(Dimension dim, Polarity polarity, const Community& c,
                              const Profile& questioner, const Profile& candidate,
                              const MetricParams& params) {
    double s = dimension_similarity(dim, c, questioner, candidate, params);
    return polarity == Polarity::Similar ? s : 1.0 - s;
}

/// Normalized weighted mean of the specified dimension scores.
inline double score_weighted(const std::map<Dimension, double>& scores,
                             const std::map<Dimension, double>& weights) {
    double num = 0.0, den = 0.0;
    for (const auto& [dim, s] : scores) {
        auto it = weights.find(dim);
        double w = it == weights.end() ? 0.0 : it->second;
        num += w * s;
        den += w;
    }
    if (den <= 0.0) throw ContractError("score_weighted: all weights zero");
    return num / den;
}

/// Tier gate on primary dimensions plus unweighted mean over all specified
/// scores. Rank key is (tier, aggregate), compared lexicographically.
inline std::pair<int, double> score_lexicographic(const std::map<Dimension, double>& scores,
                                                  const std::set<Dimension>& primary,
                                                  double threshold) {
    int tier = 1;
    for (Dimension d : primary) {
        auto it = scores.find(d);
        if (it == scores.end() || it->second < threshold) {
            tier = 0;
            break;
        }
    }
    double sum = 0.0;
    for (const auto& [dim, s] : scores) sum += s;
    double aggregate = scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
    return {tier, aggregate};
}

inline MatchScore score_candidate(const MatchQuery& query, const Community& c,
                                  const Profile& questioner, const Profile& candidate,
                                  const MetricParams& params) {
    MatchScore ms;
    ms.candidate = candidate.id;
    for (const auto& [dim, pol] : query.requirements)
        ms.dimension_scores[dim] = dimension_score(dim, pol, c, questioner, candidate, params);
    if (query.mode == AggregationMode::Weighted) {
        ms.aggregate = score_weighted(ms.dimension_scores, query.weights);
        ms.tier = 1;
    } else {
        auto [tier, agg] = score_lexicographic(ms.dimension_scores, query.primary, query.threshold);
        ms.tier = tier;
        ms.aggregate = agg;
    }
    return ms;
}

/// Scores every non-questioner member and sorts by
/// (tier desc, aggregate desc, id asc).
inline std::vector<MatchScore> rank_candidates(const MatchQuery& query, const Community& c,
                                               const MetricParams& params) {
    query.validate();
    const Profile& questioner = c.member(query.questioner);
    std::vector<MatchScore> ranked;
    ranked.reserve(c.size());
    for (const auto& candidate : c.members()) {
        if (candidate.id == questioner.id) continue;
        ranked.push_back(score_candidate(query, c, questioner, candidate, params));
    }
    std::sort(ranked.begin(), ranked.end(), [](const MatchScore& a, const MatchScore& b) {
        if (a.tier != b.tier) return a.tier > b.tier;
        if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
        return a.candidate < b.candidate;
    });
    return ranked;
}

/// Round-robin over shallow-attribute groups. Groups are visited in order of
/// their best-ranked member; each cycle takes every non-empty group's
/// highest-ranked remaining candidate until k are chosen.
inline std::vector<MatchScore> diversify_shortlist(const std::vector<MatchScore>& ranked,
                                                   const Community& c, int k,
                                                   const std::string& attribute) {
    if (k <= 0) throw ContractError("k must be positive");
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<std::size_t>> groups; // attr value -> rank indices
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const std::string& v = c.member(ranked[i].candidate).shallow_attribute(attribute);
        auto [it, inserted] = groups.try_emplace(v);
        if (inserted) group_order.push_back(v);
        it->second.push_back(i);
    }
    std::map<std::string, std::size_t> cursor;
    std::vector<MatchScore> selected;
    std::size_t want = std::min<std::size_t>(k, ranked.size());
    while (selected.size() < want) {
        for (const auto& g : group_order) {
            if (selected.size() >= want) break;
            auto& idx = groups[g];
            auto& cur = cursor[g];
            if (cur < idx.size()) selected.push_back(ranked[idx[cur++]]);
        }
    }
    return selected;
}

/// Full pipeline: rank, then diversify, then truncate to k.
inline std::vector<MatchScore> select_responder_scores(const MatchQuery& query,
                                                       const Community& c,
                                                       const MetricParams& params) {
    return diversify_shortlist(rank_candidates(query, c, params), c, query.k,
                               query.diversify_attribute);
}

inline std::vector<std::string> select_responders(const MatchQuery& query, const Community& c,
                                                  const MetricParams& params) {
    std::vector<std::string> ids;
    for (const auto& ms : select_responder_scores(query, c, params))
        ids.push_back(ms.candidate);
    return ids;
}

/// CSV of the full ranking with a selected flag.
/// Columns: candidate_id, one per specified dimension, aggregate, tier, selected.
inline std::string scores_to_csv(const std::vector<MatchScore>& ranked,
                                 const std::vector<std::string>& selected,
                                 const MatchQuery& query) {
    std::set<std::string> chosen(selected.begin(), selected.end());
    std::ostringstream out;
    out << "candidate_id";
    for (const auto& [dim, pol] : query.requirements) out << "," << to_string(dim);
    out << ",aggregate,tier,selected\n";
    out.precision(9);
    for (const auto& ms : ranked) {
        out << ms.candidate;
        for (const auto& [dim, pol] : query.requirements)
            out << "," << ms.dimension_scores.at(dim);
        out << "," << ms.aggregate << "," << ms.tier << ","
            << (chosen.count(ms.candidate) ? 1 : 0) << "\n";
    }
    return out.str();
}

} // namespace normroute
