#pragma once

// Domain types, document schemas and validation shared by every module.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "naminglab/errors.hpp"

namespace naminglab {

using json = nlohmann::json;

inline constexpr double kDefaultSignificanceThreshold = 0.9;
inline constexpr std::size_t kDefaultMinClusterSize = 3;
inline constexpr const char* kDefaultUnnamedToken = "unlabeled";

// One significant activation: the X-feature `feature_id` of an image scored for a class.
struct ActivationRef {
    std::string image_id;
    std::string class_id;
    int feature_id = 0;

    auto operator<=>(const ActivationRef&) const = default;
    bool operator==(const ActivationRef&) const = default;
};

using ActivationSet = std::set<ActivationRef>;

inline std::string to_string(const ActivationRef& a) {
    return "(" + a.image_id + ", " + a.class_id + ", " + std::to_string(a.feature_id) + ")";
}

// Per (image, class) signed contributions w_i * x_i, one per X-feature.
struct XFeatureRecord {
    std::string image_id;
    std::string class_id;
    std::vector<double> contributions;
    std::vector<std::string> heatmap_paths; // empty, or one path per X-feature

    bool operator==(const XFeatureRecord&) const = default;
};

struct TestSet {
    std::vector<std::string> categories;
    int feature_count = 0;
    double significance_threshold = kDefaultSignificanceThreshold;
    std::vector<XFeatureRecord> records; // document order; keys are unique

    bool operator==(const TestSet&) const = default;

    bool has_category(const std::string& class_id) const {
        return std::find(categories.begin(), categories.end(), class_id) != categories.end();
    }

    const XFeatureRecord* find(const std::string& image_id, const std::string& class_id) const {
        for (const auto& r : records)
            if (r.image_id == image_id && r.class_id == class_id) return &r;
        return nullptr;
    }

    std::vector<const XFeatureRecord*> records_of(const std::string& class_id) const {
        std::vector<const XFeatureRecord*> out;
        for (const auto& r : records)
            if (r.class_id == class_id) out.push_back(&r);
        return out;
    }
};

struct VisualConcept {
    std::string concept_id;
    std::string name; // may be empty
    ActivationSet members;

    bool operator==(const VisualConcept&) const = default;
};

// One annotator's clustering of a category's significant activations.
struct Naming {
    std::string annotator_id;
    std::string class_id;
    std::vector<VisualConcept> concepts;
    ActivationSet discarded;
    std::int64_t version = 0;

    bool operator==(const Naming&) const = default;

    const VisualConcept* find_concept(const std::string& concept_id) const {
        for (const auto& c : concepts)
            if (c.concept_id == concept_id) return &c;
        return nullptr;
    }
    VisualConcept* find_concept(const std::string& concept_id) {
        for (auto& c : concepts)
            if (c.concept_id == concept_id) return &c;
        return nullptr;
    }
};

// The set of names attached to one image's significant activations.
struct Explanation {
    std::string image_id;
    std::string class_id;
    std::set<std::string> names;

    bool operator==(const Explanation&) const = default;
};

// Union of all concept members.
inline ActivationSet named_set(const Naming& n) {
    ActivationSet out;
    for (const auto& c : n.concepts) out.insert(c.members.begin(), c.members.end());
    return out;
}

// Label used for a concept in explanations and reports: its name, or its id when unnamed.
inline const std::string& display_name(const VisualConcept& c) {
    return c.name.empty() ? c.concept_id : c.name;
}

// ---------------------------------------------------------------------------
// JSON schema helpers

namespace detail {

inline std::string describe(const json& j) {
    std::string s = j.dump();
    if (s.size() > 60) s = s.substr(0, 57) + "...";
    return s;
}

// Ids are opaque strings; integer ids from exporters are accepted and stringified.
inline std::string read_id(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw SchemaError(where + ": missing \"" + key + "\"");
    const auto& v = obj.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw SchemaError(where + ": \"" + key + "\" must be a string, got " + describe(v));
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key))
        throw SchemaError(where + ": missing \"" + key + "\"");
    return obj.at(key);
}

inline const json& require_array(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_array()) throw SchemaError(where + ": \"" + key + "\" must be an array");
    return v;
}

inline json parse_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(what + ": " + e.what());
    }
}

} // namespace detail

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

// ---------------------------------------------------------------------------
// Test set documents

inline json to_json(const TestSet& ts) {
    json records = json::array();
    for (const auto& r : ts.records) {
        json jr = {{"image_id", r.image_id},
                   {"class_id", r.class_id},
                   {"contributions", r.contributions}};
        if (!r.heatmap_paths.empty()) jr["heatmap_paths"] = r.heatmap_paths;
        records.push_back(std::move(jr));
    }
    return {{"feature_count", ts.feature_count},
            {"significance_threshold", ts.significance_threshold},
            {"categories", ts.categories},
            {"records", std::move(records)}};
}

// Checks the dataset schema, then every consistency invariant; reports all violations at once.
inline TestSet validate_testset(const json& doc) {
    if (!doc.is_object()) throw SchemaError("dataset: top level must be an object");
    TestSet ts;

    const auto& fc = detail::require(doc, "feature_count", "dataset");
    if (!fc.is_number_integer() || fc.get<std::int64_t>() <= 0)
        throw SchemaError("dataset: feature_count must be a positive integer");
    ts.feature_count = fc.get<int>();

    if (doc.contains("significance_threshold")) {
        const auto& t = doc.at("significance_threshold");
        if (!t.is_number()) throw SchemaError("dataset: significance_threshold must be a number");
        ts.significance_threshold = t.get<double>();
        if (!(ts.significance_threshold > 0.0 && ts.significance_threshold <= 1.0))
            throw SchemaError("dataset: significance_threshold must lie in (0, 1]");
    }

    for (const auto& c : detail::require_array(doc, "categories", "dataset")) {
        if (c.is_string()) ts.categories.push_back(c.get<std::string>());
        else if (c.is_number_integer()) ts.categories.push_back(std::to_string(c.get<std::int64_t>()));
        else throw SchemaError("dataset: category ids must be strings");
    }

    std::size_t index = 0;
    for (const auto& jr : detail::require_array(doc, "records", "dataset")) {
        const std::string where = "dataset: records[" + std::to_string(index++) + "]";
        if (!jr.is_object()) throw SchemaError(where + " must be an object");
        XFeatureRecord r;
        r.image_id = detail::read_id(jr, "image_id", where);
        r.class_id = detail::read_id(jr, "class_id", where);
        for (const auto& v : detail::require_array(jr, "contributions", where)) {
            if (!v.is_number()) throw SchemaError(where + ": contributions must be numbers");
            r.contributions.push_back(v.get<double>());
        }
        if (jr.contains("heatmap_paths") && !jr.at("heatmap_paths").is_null()) {
            const auto& hp = jr.at("heatmap_paths");
            if (!hp.is_array()) throw SchemaError(where + ": heatmap_paths must be an array");
            for (const auto& p : hp) {
                if (!p.is_string()) throw SchemaError(where + ": heatmap_paths must be strings");
                r.heatmap_paths.push_back(p.get<std::string>());
            }
        }
        ts.records.push_back(std::move(r));
    }

    std::vector<std::string> violations;
    {
        std::set<std::string> seen;
        for (const auto& c : ts.categories)
            if (!seen.insert(c).second) violations.push_back("duplicate category " + c);
    }
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& r : ts.records) {
        const std::string ctx = "record (" + r.image_id + ", " + r.class_id + ")";
        if (!keys.insert({r.image_id, r.class_id}).second)
            violations.push_back(ctx + ": duplicate (image_id, class_id)");
        if (!ts.has_category(r.class_id))
            violations.push_back(ctx + ": unknown class " + r.class_id);
        if (r.contributions.size() != static_cast<std::size_t>(ts.feature_count))
            violations.push_back(ctx + ": " + std::to_string(r.contributions.size()) +
                                 " contributions, expected " + std::to_string(ts.feature_count));
        if (!r.heatmap_paths.empty() && r.heatmap_paths.size() != r.contributions.size())
            violations.push_back(ctx + ": " + std::to_string(r.heatmap_paths.size()) +
                                 " heatmap paths for " + std::to_string(r.contributions.size()) +
                                 " contributions");
    }
    if (!violations.empty()) throw ConsistencyError(std::move(violations));
    return ts;
}

inline TestSet parse_testset(const std::string& text) {
    return validate_testset(detail::parse_text(text, "dataset"));
}

inline TestSet load_testset(const std::string& path) { return parse_testset(read_file(path)); }

// ---------------------------------------------------------------------------
// Naming documents

inline json to_json(const ActivationRef& a) {
    return {{"image_id", a.image_id}, {"class_id", a.class_id}, {"feature_id", a.feature_id}};
}

inline json to_json(const ActivationSet& s) {
    json arr = json::array();
    for (const auto& a : s) arr.push_back(to_json(a));
    return arr;
}

inline json to_json(const Naming& n) {
    json concepts = json::array();
    for (const auto& c : n.concepts)
        concepts.push_back(
            {{"concept_id", c.concept_id}, {"name", c.name}, {"members", to_json(c.members)}});
    return {{"annotator_id", n.annotator_id},
            {"class_id", n.class_id},
            {"version", n.version},
            {"concepts", std::move(concepts)},
            {"discarded", to_json(n.discarded)}};
}

inline ActivationRef activation_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + " must be an object");
    ActivationRef a;
    a.image_id = detail::read_id(j, "image_id", where);
    a.class_id = detail::read_id(j, "class_id", where);
    const auto& f = detail::require(j, "feature_id", where);
    if (!f.is_number_integer() || f.get<std::int64_t>() < 0)
        throw SchemaError(where + ": feature_id must be a non-negative integer");
    a.feature_id = f.get<int>();
    return a;
}

namespace detail {

// Reads an array of activations; repeated entries are reported through `dupes`.
inline ActivationSet read_members(const json& arr, const std::string& where,
                                  std::vector<std::string>& dupes) {
    if (!arr.is_array()) throw SchemaError(where + " must be an array");
    ActivationSet out;
    std::size_t i = 0;
    for (const auto& jm : arr) {
        auto a = activation_from_json(jm, where + "[" + std::to_string(i++) + "]");
        if (!out.insert(a).second) dupes.push_back(where + ": repeated member " + to_string(a));
    }
    return out;
}

} // namespace detail

// Parses a naming document. Shape errors throw SchemaError; repeated members throw ConsistencyError.
inline Naming naming_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("naming: top level must be an object");
    Naming n;
    n.annotator_id = detail::read_id(doc, "annotator_id", "naming");
    n.class_id = detail::read_id(doc, "class_id", "naming");
    if (doc.contains("version")) {
        const auto& v = doc.at("version");
        if (!v.is_number_integer()) throw SchemaError("naming: version must be an integer");
        n.version = v.get<std::int64_t>();
    }
    std::vector<std::string> dupes;
    std::size_t index = 0;
    for (const auto& jc : detail::require_array(doc, "concepts", "naming")) {
        const std::string where = "naming: concepts[" + std::to_string(index++) + "]";
        if (!jc.is_object()) throw SchemaError(where + " must be an object");
        VisualConcept c;
        c.concept_id = detail::read_id(jc, "concept_id", where);
        if (jc.contains("name") && !jc.at("name").is_null()) {
            if (!jc.at("name").is_string()) throw SchemaError(where + ": name must be a string");
            c.name = jc.at("name").get<std::string>();
        }
        c.members = detail::read_members(detail::require(jc, "members", where), where + ".members", dupes);
        n.concepts.push_back(std::move(c));
    }
    if (doc.contains("discarded"))
        n.discarded = detail::read_members(doc.at("discarded"), "naming: discarded", dupes);
    if (!dupes.empty()) throw ConsistencyError(std::move(dupes));
    return n;
}

// Invariants that need no test set: unique concept ids, class agreement, disjointness.
inline std::vector<std::string> structural_violations(const Naming& n) {
    std::vector<std::string> out;
    std::set<std::string> ids;
    std::map<ActivationRef, std::string> owner;
    for (const auto& c : n.concepts) {
        if (c.concept_id.empty()) out.push_back("concept with empty concept_id");
        if (!ids.insert(c.concept_id).second) out.push_back("duplicate concept_id " + c.concept_id);
        for (const auto& m : c.members) {
            if (m.class_id != n.class_id)
                out.push_back("concept " + c.concept_id + ": member " + to_string(m) +
                              " belongs to class " + m.class_id);
            auto [it, fresh] = owner.emplace(m, c.concept_id);
            if (!fresh)
                out.push_back("member " + to_string(m) + " is in both " + it->second + " and " +
                              c.concept_id);
        }
    }
    for (const auto& d : n.discarded) {
        if (d.class_id != n.class_id)
            out.push_back("discarded " + to_string(d) + " belongs to class " + d.class_id);
        if (auto it = owner.find(d); it != owner.end())
            out.push_back("discarded " + to_string(d) + " is also in concept " + it->second);
    }
    return out;
}

inline Naming parse_naming(const std::string& text) {
    Naming n = naming_from_json(detail::parse_text(text, "naming"));
    if (auto v = structural_violations(n); !v.empty()) throw ConsistencyError(std::move(v));
    return n;
}

inline Naming load_naming(const std::string& path) { return parse_naming(read_file(path)); }

// Drops concepts with fewer than `min_cluster_size` members. Their members become unnamed.
inline Naming clean_naming(Naming naming, std::size_t min_cluster_size = kDefaultMinClusterSize) {
    std::erase_if(naming.concepts,
                  [&](const VisualConcept& c) { return c.members.size() < min_cluster_size; });
    ++naming.version;
    return naming;
}

} // namespace naminglab
