#pragma once

// Significant X-features per (image, class) and the explanations built from a naming.

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "naminglab/core.hpp"

namespace naminglab {

struct SignificantSet {
    std::string image_id;
    std::string class_id;
    std::vector<int> features; // descending contribution, ties by ascending feature_id
    double positive_total = 0.0;
    double covered_fraction = 0.0;

    bool operator==(const SignificantSet&) const = default;

    ActivationSet activations() const {
        ActivationSet out;
        for (int f : features) out.insert({image_id, class_id, f});
        return out;
    }
};

// Relative slack for the coverage comparison so that sums landing exactly on the
// threshold are not lost to rounding in threshold * total.
inline constexpr double kCoverageSlack = 1e-12;

inline bool reaches_threshold(double sum, double threshold, double positive_total) {
    return sum >= threshold * positive_total - kCoverageSlack * positive_total;
}

// Minimal-cardinality subset of positive contributions covering `threshold` of the positive
// score. Taking the largest contributions first is optimal for a sum threshold.
inline SignificantSet significant_features(const XFeatureRecord& record,
                                           double threshold = kDefaultSignificanceThreshold) {
    std::vector<int> positive;
    double total = 0.0;
    for (std::size_t i = 0; i < record.contributions.size(); ++i) {
        if (record.contributions[i] > 0.0) {
            positive.push_back(static_cast<int>(i));
            total += record.contributions[i];
        }
    }
    if (positive.empty())
        throw NoPositiveEvidence("no positive contribution for (" + record.image_id + ", " +
                                 record.class_id + ")");

    std::stable_sort(positive.begin(), positive.end(), [&](int a, int b) {
        return record.contributions[a] > record.contributions[b];
    });

    SignificantSet out{record.image_id, record.class_id, {}, total, 0.0};
    double sum = 0.0;
    for (int f : positive) {
        out.features.push_back(f);
        sum += record.contributions[f];
        if (reaches_threshold(sum, threshold, total)) break;
    }
    out.covered_fraction = std::min(1.0, sum / total);
    return out;
}

struct ClassSignificance {
    std::string class_id;
    std::vector<SignificantSet> sets;       // images with positive evidence, document order
    std::vector<std::string> no_evidence;   // images excluded for lack of positive evidence
    std::size_t image_count = 0;            // all images of the class
    std::size_t total = 0;                  // significant activations
    double average = 0.0;                   // total / image_count
    bool average_undefined = false;         // class has no images; average reported as 0

    ActivationSet activations() const {
        ActivationSet out;
        for (const auto& s : sets) {
            auto a = s.activations();
            out.insert(a.begin(), a.end());
        }
        return out;
    }

    const SignificantSet* find(const std::string& image_id) const {
        for (const auto& s : sets)
            if (s.image_id == image_id) return &s;
        return nullptr;
    }
};

inline ClassSignificance significant_sets(const TestSet& ts, const std::string& class_id,
                                          double threshold) {
    if (!ts.has_category(class_id)) throw UnknownClass("unknown class " + class_id);
    ClassSignificance out;
    out.class_id = class_id;
    for (const auto* r : ts.records_of(class_id)) {
        ++out.image_count;
        try {
            out.sets.push_back(significant_features(*r, threshold));
            out.total += out.sets.back().features.size();
        } catch (const NoPositiveEvidence&) {
            out.no_evidence.push_back(r->image_id);
        }
    }
    if (out.image_count == 0) out.average_undefined = true;
    else out.average = static_cast<double>(out.total) / static_cast<double>(out.image_count);
    return out;
}

inline ClassSignificance significant_sets(const TestSet& ts, const std::string& class_id) {
    return significant_sets(ts, class_id, ts.significance_threshold);
}

inline json to_json(const ClassSignificance& cs) {
    json images = json::array();
    for (const auto& s : cs.sets)
        images.push_back({{"image_id", s.image_id},
                          {"features", s.features},
                          {"positive_total", s.positive_total},
                          {"covered_fraction", s.covered_fraction}});
    return {{"class_id", cs.class_id},
            {"image_count", cs.image_count},
            {"total", cs.total},
            {"average", cs.average},
            {"average_undefined", cs.average_undefined},
            {"no_evidence", cs.no_evidence},
            {"images", std::move(images)}};
}

// Naming members that are not significant activations of the class.
inline std::vector<std::string> significance_violations(const Naming& n, const ClassSignificance& cs) {
    std::vector<std::string> out;
    if (n.class_id != cs.class_id) {
        out.push_back("naming class " + n.class_id + " does not match " + cs.class_id);
        return out;
    }
    const auto sig = cs.activations();
    auto check = [&](const ActivationRef& a, const std::string& where) {
        if (!sig.contains(a)) out.push_back(where + ": " + to_string(a) + " is not a significant activation");
    };
    for (const auto& c : n.concepts)
        for (const auto& m : c.members) check(m, "concept " + c.concept_id);
    for (const auto& d : n.discarded) check(d, "discarded");
    return out;
}

// Throws ConsistencyError listing every violated naming invariant against the test set.
inline void validate_naming(const Naming& n, const TestSet& ts) {
    auto v = structural_violations(n);
    if (!ts.has_category(n.class_id)) {
        v.push_back("unknown class " + n.class_id);
    } else {
        auto s = significance_violations(n, significant_sets(ts, n.class_id));
        v.insert(v.end(), s.begin(), s.end());
    }
    if (!v.empty()) throw ConsistencyError(std::move(v));
}

inline Explanation explain(const std::string& image_id, const std::string& class_id,
                           const Naming& naming, const SignificantSet& sigset,
                           const std::string& unnamed_token = kDefaultUnnamedToken) {
    if (sigset.image_id != image_id || sigset.class_id != class_id || naming.class_id != class_id)
        throw MismatchedKeys("explanation keys (" + image_id + ", " + class_id +
                             ") do not match significant set (" + sigset.image_id + ", " +
                             sigset.class_id + ") / naming class " + naming.class_id);
    std::map<ActivationRef, const VisualConcept*> owner;
    for (const auto& c : naming.concepts)
        for (const auto& m : c.members) owner.emplace(m, &c);

    Explanation e{image_id, class_id, {}};
    for (int f : sigset.features) {
        auto it = owner.find({image_id, class_id, f});
        if (it == owner.end()) e.names.insert(unnamed_token);
        else e.names.insert(display_name(*it->second));
    }
    return e;
}

} // namespace naminglab
