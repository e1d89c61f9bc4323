#pragma once

#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "normroute/errors.hpp"
#include "normroute/profile.hpp"

namespace normroute {

/// The four deep-feature axes a question can constrain.
enum class Dimension {
    DomainInterests,
    BeliefsValues,
    SocialCloseness,
    PhysicalCloseness,
};

inline constexpr Dimension kAllDimensions[] = {
    Dimension::DomainInterests,
    Dimension::BeliefsValues,
    Dimension::SocialCloseness,
    Dimension::PhysicalCloseness,
};

inline std::string to_string(Dimension d) {
    switch (d) {
        case Dimension::DomainInterests: return "domain_interests";
        case Dimension::BeliefsValues: return "beliefs_values";
        case Dimension::SocialCloseness: return "social_closeness";
        case Dimension::PhysicalCloseness: return "physical_closeness";
    }
    throw ContractError("invalid Dimension");
}

inline Dimension dimension_from_string(const std::string& s) {
    if (s == "domain_interests") return Dimension::DomainInterests;
    if (s == "beliefs_values") return Dimension::BeliefsValues;
    if (s == "social_closeness") return Dimension::SocialCloseness;
    if (s == "physical_closeness") return Dimension::PhysicalCloseness;
    throw ValidationError("unknown dimension '" + s + "'");
}

struct MetricParams {
    double decay_length_km = 50.0;
};

/// Cosine similarity on nonnegative vectors. Both all-zero -> 1, exactly
/// one all-zero -> 0, so self-similarity is always 1.
inline double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size())
        throw ContractError("cosine_similarity: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 && nv == 0.0) return 1.0;
    if (nu == 0.0 || nv == 0.0) return 0.0;
    double s = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::min(1.0, std::max(0.0, s));
}

/// 1/(1+spl) with spl the unweighted shortest-path length; 0 if unreachable.
inline double social_closeness(const Community& c, const std::string& a, const std::string& b) {
    if (!c.has_member(a)) throw ContractError("unknown member id '" + a + "'");
    if (!c.has_member(b)) throw ContractError("unknown member id '" + b + "'");
    if (a == b) return 1.0;
    std::map<std::string, int> dist;
    dist[a] = 0;
    std::deque<std::string> queue{a};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        int d = dist[cur];
        for (const auto& nbr : c.neighbors(cur)) {
            if (dist.count(nbr)) continue;
            if (nbr == b) return 1.0 / (1.0 + d + 1);
            dist[nbr] = d + 1;
            queue.push_back(nbr);
        }
    }
    return 0.0;
}

inline constexpr double kEarthRadiusKm = 6371.0;

/// Great-circle distance in km.
inline double haversine_km(const Location& p, const Location& q) {
    constexpr double deg = std::numbers::pi / 180.0;
    double lat1 = p.lat * deg, lat2 = q.lat * deg;
    double dlat = (q.lat - p.lat) * deg;
    double dlon = (q.lon - p.lon) * deg;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

/// exp(-d/decay_length_km); 1 at zero distance, -> 0 far away.
inline double physical_proximity(const Location& p, const Location& q, const MetricParams& params) {
    if (params.decay_length_km <= 0.0)
        throw ContractError("decay_length_km must be positive");
    return std::exp(-haversine_km(p, q) / params.decay_length_km);
}

inline double dimension_similarity(Dimension dim, const Community& c,
                                   const Profile& questioner, const Profile& candidate,
                                   const MetricParams& params) {
    switch (dim) {
        case Dimension::DomainInterests:
            return cosine_similarity(questioner.interests, candidate.interests);
        case Dimension::BeliefsValues:
            return cosine_similarity(questioner.values, candidate.values);
        case Dimension::SocialCloseness:
            return social_closeness(c, questioner.id, candidate.id);
        case Dimension::PhysicalCloseness:
            return physical_proximity(questioner.location, candidate.location, params);
    }
    throw ContractError("invalid Dimension");
}

} // namespace normroute
