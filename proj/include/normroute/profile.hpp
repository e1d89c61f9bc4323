#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "normroute/errors.hpp"
#include "normroute/rng.hpp"

namespace normroute {

struct Location {
    double lat = 0.0; // degrees, [-90,90]
    double lon = 0.0; // degrees, (-180,180]

    friend bool operator==(const Location&, const Location&) = default;
};

/// One community member. Deep features are dense vectors in [0,1];
/// shallow attributes are categorical labels.
struct Profile {
    std::string id;
    std::vector<double> interests;
    std::vector<double> values;
    Location location;
    std::string gender;
    std::map<std::string, std::string> extra_shallow;

    friend bool operator==(const Profile&, const Profile&) = default;

    // Returns the value of a shallow attribute; "gender" is always present.
    const std::string& shallow_attribute(const std::string& name) const {
        if (name == "gender") return gender;
        auto it = extra_shallow.find(name);
        if (it == extra_shallow.end())
            throw ContractError("unknown shallow attribute '" + name + "' on profile " + id);
        return it->second;
    }
};

using Edge = std::pair<std::string, std::string>; // stored with first < second

/// Immutable snapshot of a community: members, social graph, declared dims.
class Community {
public:
    Community() = default;

    Community(std::string id, int interest_dim, int values_dim,
              std::vector<std::string> gender_labels,
              std::vector<Profile> members, std::vector<Edge> edges)
        : id_(std::move(id)),
          interest_dim_(interest_dim),
          values_dim_(values_dim),
          gender_labels_(std::move(gender_labels)),
          members_(std::move(members)) {
        canonicalize_members();
        for (auto& e : edges) add_edge_checked(e.first, e.second);
        canonicalize_edges();
        validate();
    }

    const std::string& id() const { return id_; }
    int interest_dim() const { return interest_dim_; }
    int values_dim() const { return values_dim_; }
    const std::vector<std::string>& gender_labels() const { return gender_labels_; }
    const std::vector<Profile>& members() const { return members_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t size() const { return members_.size(); }

    bool has_member(const std::string& id) const {
        return index_.count(id) != 0;
    }

    const Profile& member(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end())
            throw ContractError("unknown member id '" + id + "'");
        return members_[it->second];
    }

    const std::vector<std::string>& neighbors(const std::string& id) const {
        auto it = adjacency_.find(id);
        if (it == adjacency_.end())
            throw ContractError("unknown member id '" + id + "'");
        return it->second;
    }

    friend bool operator==(const Community& a, const Community& b) {
        return a.id_ == b.id_ && a.interest_dim_ == b.interest_dim_ &&
               a.values_dim_ == b.values_dim_ &&
               a.gender_labels_ == b.gender_labels_ &&
               a.members_ == b.members_ && a.edges_ == b.edges_;
    }

private:
    void canonicalize_members() {
        std::sort(members_.begin(), members_.end(),
                  [](const Profile& a, const Profile& b) { return a.id < b.id; });
        for (std::size_t i = 0; i < members_.size(); ++i) {
            if (!index_.emplace(members_[i].id, i).second)
                throw ValidationError("duplicate member id '" + members_[i].id + "'");
            adjacency_[members_[i].id];
        }
    }

    void add_edge_checked(std::string a, std::string b) {
        if (a == b) throw ValidationError("self-loop on '" + a + "'");
        if (!index_.count(a)) throw ValidationError("edge endpoint '" + a + "' is not a member");
        if (!index_.count(b)) throw ValidationError("edge endpoint '" + b + "' is not a member");
        if (a > b) std::swap(a, b);
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
        edges_.emplace_back(std::move(a), std::move(b));
    }

    void canonicalize_edges() {
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
        for (auto& [id, nbrs] : adjacency_) {
            std::sort(nbrs.begin(), nbrs.end());
            nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        }
    }

    void validate() const {
        if (interest_dim_ <= 0 || values_dim_ <= 0)
            throw ValidationError("feature dimensions must be positive");
        std::set<std::string> labels(gender_labels_.begin(), gender_labels_.end());
        for (const auto& p : members_) {
            if (p.interests.size() != static_cast<std::size_t>(interest_dim_))
                throw ValidationError("member '" + p.id + "': interests size mismatch");
            if (p.values.size() != static_cast<std::size_t>(values_dim_))
                throw ValidationError("member '" + p.id + "': values size mismatch");
            for (double x : p.interests)
                if (!(x >= 0.0 && x <= 1.0))
                    throw ValidationError("member '" + p.id + "': interest entry out of [0,1]");
            for (double x : p.values)
                if (!(x >= 0.0 && x <= 1.0))
                    throw ValidationError("member '" + p.id + "': values entry out of [0,1]");
            if (p.location.lat < -90.0 || p.location.lat > 90.0 ||
                p.location.lon <= -180.0 || p.location.lon > 180.0)
                throw ValidationError("member '" + p.id + "': location out of range");
            if (!labels.count(p.gender))
                throw ValidationError("member '" + p.id + "': gender '" + p.gender +
                                      "' not in declared label set");
        }
    }

    std::string id_;
    int interest_dim_ = 1;
    int values_dim_ = 1;
    std::vector<std::string> gender_labels_;
    std::vector<Profile> members_;
    std::vector<Edge> edges_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::vector<std::string>> adjacency_;
};

struct BoundingBox {
    double lat_min = 0.0, lat_max = 0.0;
    double lon_min = 0.0, lon_max = 0.0;
};

struct GeneratorConfig {
    int size = 0;
    int interest_dim = 4;
    int values_dim = 4;
    std::vector<std::pair<std::string, double>> gender_mix; // label -> proportion
    double edge_probability = 0.1;
    BoundingBox location_region;

    void validate() const {
        if (size <= 0) throw ValidationError("generator size must be positive");
        if (interest_dim <= 0 || values_dim <= 0)
            throw ValidationError("feature dimensions must be positive");
        if (edge_probability < 0.0 || edge_probability > 1.0)
            throw ValidationError("edge_probability must lie in [0,1]");
        if (location_region.lat_min > location_region.lat_max ||
            location_region.lon_min > location_region.lon_max)
            throw ValidationError("location_region bounding box is not well-ordered");
        if (gender_mix.empty()) throw ValidationError("gender_mix must be non-empty");
        double total = 0.0;
        for (const auto& [label, p] : gender_mix) {
            if (p < 0.0) throw ValidationError("gender proportion for '" + label + "' is negative");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError("gender proportions must sum to 1");
    }
};

namespace detail {

inline nlohmann::json community_to_json(const Community& c) {
    nlohmann::json doc;
    doc["id"] = c.id();
    doc["interest_dim"] = c.interest_dim();
    doc["values_dim"] = c.values_dim();
    doc["gender_labels"] = c.gender_labels();
    auto& members = doc["members"] = nlohmann::json::array();
    for (const auto& p : c.members()) {
        nlohmann::json m;
        m["id"] = p.id;
        m["interests"] = p.interests;
        m["values"] = p.values;
        m["location"] = {{"lat", p.location.lat}, {"lon", p.location.lon}};
        m["gender"] = p.gender;
        m["extra_shallow"] = p.extra_shallow;
        members.push_back(std::move(m));
    }
    auto& edges = doc["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : c.edges()) edges.push_back({a, b});
    return doc;
}

inline Community community_from_json(const nlohmann::json& doc) {
    std::vector<Profile> members;
    for (const auto& m : doc.at("members")) {
        Profile p;
        p.id = m.at("id").get<std::string>();
        p.interests = m.at("interests").get<std::vector<double>>();
        p.values = m.at("values").get<std::vector<double>>();
        p.location.lat = m.at("location").at("lat").get<double>();
        p.location.lon = m.at("location").at("lon").get<double>();
        p.gender = m.at("gender").get<std::string>();
        if (m.contains("extra_shallow"))
            p.extra_shallow = m.at("extra_shallow").get<std::map<std::string, std::string>>();
        members.push_back(std::move(p));
    }
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError("edge must be a pair of member ids");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return Community(doc.at("id").get<std::string>(),
                     doc.at("interest_dim").get<int>(),
                     doc.at("values_dim").get<int>(),
                     doc.at("gender_labels").get<std::vector<std::string>>(),
                     std::move(members), std::move(edges));
}

} // namespace detail

inline Community load_community(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    try {
        return detail::community_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": malformed community document: " + e.what());
    }
}

inline std::string serialize_community(const Community& c) {
    return detail::community_to_json(c).dump(2) + "\n";
}

inline void save_community(const Community& c, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << serialize_community(c);
    if (!out) throw IoError("write to '" + path + "' failed");
}

/// Largest-remainder apportionment of `size` among proportions.
inline std::vector<int> largest_remainder_counts(
    const std::vector<std::pair<std::string, double>>& mix, int size) {
    std::vector<int> counts(mix.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t i = 0; i < mix.size(); ++i) {
        double exact = mix[i].second * size;
        counts[i] = static_cast<int>(std::floor(exact));
        assigned += counts[i];
        remainders.push_back({exact - counts[i], i});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int r = 0; r < size - assigned; ++r) counts[remainders[r].second]++;
    return counts;
}

inline Community generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);

    std::vector<std::string> labels;
    auto counts = largest_remainder_counts(cfg.gender_mix, cfg.size);
    for (std::size_t i = 0; i < cfg.gender_mix.size(); ++i)
        labels.insert(labels.end(), counts[i], cfg.gender_mix[i].first);
    rng.shuffle(labels.begin(), labels.end());

    int width = 1;
    for (int n = cfg.size - 1; n >= 10; n /= 10) ++width;

    std::vector<Profile> members;
    members.reserve(cfg.size);
    for (int i = 0; i < cfg.size; ++i) {
        Profile p;
        std::ostringstream name;
        name << "u";
        std::string digits = std::to_string(i);
        name << std::string(width - static_cast<int>(digits.size()), '0') << digits;
        p.id = name.str();
        p.interests.resize(cfg.interest_dim);
        for (auto& x : p.interests) x = rng.next_double();
        p.values.resize(cfg.values_dim);
        for (auto& x : p.values) x = rng.next_double();
        p.location.lat = rng.uniform(cfg.location_region.lat_min, cfg.location_region.lat_max);
        p.location.lon = rng.uniform(cfg.location_region.lon_min, cfg.location_region.lon_max);
        p.gender = labels[i];
        members.push_back(std::move(p));
    }

    std::vector<Edge> edges;
    for (int i = 0; i < cfg.size; ++i)
        for (int j = i + 1; j < cfg.size; ++j)
            if (rng.bernoulli(cfg.edge_probability))
                edges.emplace_back(members[i].id, members[j].id);

    std::vector<std::string> gender_labels;
    for (const auto& [label, p] : cfg.gender_mix) gender_labels.push_back(label);

    return Community("synthetic-" + std::to_string(seed), cfg.interest_dim,
                     cfg.values_dim, std::move(gender_labels), std::move(members),
                     std::move(edges));
}

} // namespace normroute
