#pragma once

#include <string>
#include <vector>

#include "normroute/normroute.hpp"

namespace testutil {

using namespace normroute;

inline Profile make_profile(std::string id, std::vector<double> interests,
                            std::vector<double> values, double lat, double lon,
                            std::string gender) {
    Profile p;
    p.id = std::move(id);
    p.interests = std::move(interests);
    p.values = std::move(values);
    p.location = {lat, lon};
    p.gender = std::move(gender);
    return p;
}

// Small hand-built community: u1--u2--u3 chain, u4 isolated.
inline Community chain_community() {
    std::vector<Profile> members = {
        make_profile("u1", {1.0, 0.0}, {0.5, 0.5}, 57.00, 9.90, "female"),
        make_profile("u2", {0.0, 1.0}, {0.5, 0.5}, 57.01, 9.90, "male"),
        make_profile("u3", {1.0, 1.0}, {0.2, 0.8}, 57.02, 9.90, "female"),
        make_profile("u4", {0.5, 0.5}, {0.9, 0.1}, 57.03, 9.90, "male"),
    };
    return Community("test", 2, 2, {"female", "male"}, std::move(members),
                     {{"u1", "u2"}, {"u2", "u3"}});
}

inline GeneratorConfig default_generator(int size) {
    GeneratorConfig cfg;
    cfg.size = size;
    cfg.interest_dim = 4;
    cfg.values_dim = 4;
    cfg.gender_mix = {{"female", 0.5}, {"male", 0.5}};
    cfg.edge_probability = 0.1;
    cfg.location_region = {57.0, 57.1, 9.9, 10.0};
    return cfg;
}

inline MatchQuery weighted_query(std::string questioner) {
    MatchQuery q;
    q.questioner = std::move(questioner);
    q.requirements = {{Dimension::DomainInterests, Polarity::Similar},
                      {Dimension::PhysicalCloseness, Polarity::Similar}};
    q.weights = {{Dimension::DomainInterests, 2.0}, {Dimension::PhysicalCloseness, 1.0}};
    return q;
}

// Brute-force reimplementation of rank + round-robin selection, kept naive
// on purpose so pipeline tests have an independent check.
inline std::vector<std::string> oracle_select(const MatchQuery& query, const Community& c,
                                              const MetricParams& params) {
    const Profile& questioner = c.member(query.questioner);

    struct Row {
        std::string id;
        int tier;
        double aggregate;
        std::string attr;
    };
    std::vector<Row> rows;
    for (const auto& cand : c.members()) {
        if (cand.id == questioner.id) continue;
        std::map<Dimension, double> scores;
        for (const auto& [dim, pol] : query.requirements) {
            double s = 0.0;
            switch (dim) {
                case Dimension::DomainInterests:
                    s = cosine_similarity(questioner.interests, cand.interests);
                    break;
                case Dimension::BeliefsValues:
                    s = cosine_similarity(questioner.values, cand.values);
                    break;
                case Dimension::SocialCloseness:
                    s = social_closeness(c, questioner.id, cand.id);
                    break;
                case Dimension::PhysicalCloseness:
                    s = physical_proximity(questioner.location, cand.location, params);
                    break;
            }
            scores[dim] = pol == Polarity::Similar ? s : 1.0 - s;
        }
        Row r;
        r.id = cand.id;
        if (query.mode == AggregationMode::Weighted) {
            double num = 0, den = 0;
            for (const auto& [dim, s] : scores) {
                auto it = query.weights.find(dim);
                double w = it == query.weights.end() ? 0.0 : it->second;
                num += w * s;
                den += w;
            }
            r.aggregate = num / den;
            r.tier = 1;
        } else {
            r.tier = 1;
            for (Dimension d : query.primary)
                if (scores.count(d) == 0 || scores[d] < query.threshold) r.tier = 0;
            double sum = 0;
            for (const auto& [dim, s] : scores) sum += s;
            r.aggregate = sum / static_cast<double>(scores.size());
        }
        r.attr = c.member(cand.id).shallow_attribute(query.diversify_attribute);
        rows.push_back(std::move(r));
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.tier != b.tier) return a.tier > b.tier;
        if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
        return a.id < b.id;
    });

    // round-robin by attribute group, groups ordered by best rank
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& r : rows) {
        if (!groups.count(r.attr)) group_order.push_back(r.attr);
        groups[r.attr].push_back(r.id);
    }
    std::vector<std::string> selected;
    std::size_t want = std::min<std::size_t>(query.k, rows.size());
    std::map<std::string, std::size_t> cursor;
    while (selected.size() < want) {
        for (const auto& g : group_order) {
            if (selected.size() >= want) break;
            if (cursor[g] < groups[g].size()) selected.push_back(groups[g][cursor[g]++]);
        }
    }
    return selected;
}

// Random community + query with everything drawn from one Rng, for
// oracle-equivalence sweeps.
inline Community random_community(Rng& rng, int size) {
    std::vector<Profile> members;
    for (int i = 0; i < size; ++i) {
        Profile p;
        p.id = "m" + std::to_string(i);
        for (int d = 0; d < 3; ++d) p.interests.push_back(rng.next_double());
        for (int d = 0; d < 3; ++d) p.values.push_back(rng.next_double());
        p.location = {rng.uniform(56.9, 57.2), rng.uniform(9.8, 10.1)};
        p.gender = rng.bernoulli(0.5) ? "female" : "male";
        members.push_back(std::move(p));
    }
    std::vector<Edge> edges;
    for (int i = 0; i < size; ++i)
        for (int j = i + 1; j < size; ++j)
            if (rng.bernoulli(0.3)) edges.emplace_back(members[i].id, members[j].id);
    return Community("rand", 3, 3, {"female", "male"}, std::move(members), std::move(edges));
}

inline MatchQuery random_query(Rng& rng, const Community& c, int max_k) {
    MatchQuery q;
    q.questioner = c.members()[rng.below(c.size())].id;
    std::vector<Dimension> dims(std::begin(kAllDimensions), std::end(kAllDimensions));
    int ndims = 1 + static_cast<int>(rng.below(4));
    rng.shuffle(dims.begin(), dims.end());
    dims.resize(ndims);
    for (Dimension d : dims)
        q.requirements[d] = rng.bernoulli(0.5) ? Polarity::Similar : Polarity::Diverse;
    if (rng.bernoulli(0.5)) {
        q.mode = AggregationMode::Weighted;
        for (Dimension d : dims) q.weights[d] = 0.25 + rng.next_double();
    } else {
        q.mode = AggregationMode::Lexicographic;
        for (Dimension d : dims) {
            double r = rng.next_double();
            if (r < 0.4) q.primary.insert(d);
            else if (r < 0.8) q.secondary.insert(d);
        }
        q.threshold = rng.next_double();
    }
    q.k = 1 + static_cast<int>(rng.below(max_k));
    return q;
}

} // namespace testutil
