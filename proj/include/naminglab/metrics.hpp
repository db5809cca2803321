#pragma once

// Coverage, purity and named-set overlap statistics.

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "naminglab/core.hpp"
#include "naminglab/significance.hpp"

namespace naminglab {

struct CoverageTriple {
    double activation_coverage = 0.0; // named significant activations / significant activations
    double partial_coverage = 0.0;    // images with at least one named significant activation
    double complete_coverage = 0.0;   // images with every significant activation named

    bool operator==(const CoverageTriple&) const = default;
};

struct CoverageReport {
    std::string class_id;
    std::map<std::string, CoverageTriple> per_annotator;
    CoverageTriple any_annotator;
    std::vector<double> exactly_n_histogram; // index n = named by exactly n annotators
};

namespace detail {

inline void require_significant(const ClassSignificance& cs) {
    if (cs.total == 0)
        throw EmptySignificantSet("class " + cs.class_id + " has no significant activations");
}

} // namespace detail

inline CoverageTriple coverage_of(const ActivationSet& named, const ClassSignificance& cs) {
    detail::require_significant(cs);
    std::size_t named_count = 0, partial = 0, complete = 0;
    for (const auto& s : cs.sets) {
        std::size_t hit = 0;
        for (int f : s.features)
            if (named.contains({s.image_id, s.class_id, f})) ++hit;
        named_count += hit;
        if (hit > 0) ++partial;
        if (hit == s.features.size()) ++complete;
    }
    const double images = static_cast<double>(cs.sets.size());
    return {static_cast<double>(named_count) / static_cast<double>(cs.total),
            static_cast<double>(partial) / images, static_cast<double>(complete) / images};
}

inline double activation_coverage(const Naming& n, const ClassSignificance& cs) {
    return coverage_of(named_set(n), cs).activation_coverage;
}

inline std::pair<double, double> explanation_coverage(const Naming& n, const ClassSignificance& cs) {
    auto t = coverage_of(named_set(n), cs);
    return {t.partial_coverage, t.complete_coverage};
}

inline std::vector<double> exactly_n_histogram(std::span<const Naming> namings,
                                               const ClassSignificance& cs) {
    detail::require_significant(cs);
    std::set<std::string> ids;
    for (const auto& n : namings) {
        if (!ids.insert(n.annotator_id).second)
            throw DuplicateAnnotator("annotator " + n.annotator_id + " appears twice");
        if (n.class_id != cs.class_id)
            throw MismatchedKeys("naming class " + n.class_id + " does not match " + cs.class_id);
    }
    std::vector<ActivationSet> named;
    named.reserve(namings.size());
    for (const auto& n : namings) named.push_back(named_set(n));

    std::vector<std::size_t> counts(namings.size() + 1, 0);
    for (const auto& a : cs.activations()) {
        std::size_t k = 0;
        for (const auto& s : named) k += s.contains(a) ? 1 : 0;
        ++counts[k];
    }
    std::vector<double> out;
    out.reserve(counts.size());
    for (auto c : counts) out.push_back(static_cast<double>(c) / static_cast<double>(cs.total));
    return out;
}

inline CoverageReport coverage_report(std::span<const Naming> namings, const ClassSignificance& cs) {
    CoverageReport r;
    r.class_id = cs.class_id;
    r.exactly_n_histogram = exactly_n_histogram(namings, cs);
    ActivationSet any;
    for (const auto& n : namings) {
        auto named = named_set(n);
        r.per_annotator[n.annotator_id] = coverage_of(named, cs);
        any.insert(named.begin(), named.end());
    }
    r.any_annotator = coverage_of(any, cs);
    return r;
}

// Plurality X-feature per concept, ties to the lowest feature_id.
inline std::map<std::string, int> concept_plurality(const Naming& n) {
    std::map<std::string, int> out;
    for (const auto& c : n.concepts) {
        std::map<int, std::size_t> counts;
        for (const auto& m : c.members) ++counts[m.feature_id];
        int best = -1;
        std::size_t best_count = 0;
        for (auto [f, k] : counts)
            if (k > best_count) best = f, best_count = k;
        if (best >= 0) out[c.concept_id] = best;
    }
    return out;
}

// Plurality concept per X-feature, ties to the lexicographically least concept_id.
inline std::map<int, std::string> feature_plurality(const Naming& n) {
    std::map<int, std::map<std::string, std::size_t>> counts;
    for (const auto& c : n.concepts)
        for (const auto& m : c.members) ++counts[m.feature_id][c.concept_id];
    std::map<int, std::string> out;
    for (const auto& [f, per_concept] : counts) {
        std::size_t best_count = 0;
        for (const auto& [cid, k] : per_concept)
            if (k > best_count) out[f] = cid, best_count = k;
    }
    return out;
}

inline double cx_purity(const Naming& n) {
    std::size_t total = 0, agree = 0;
    for (const auto& c : n.concepts) {
        std::map<int, std::size_t> counts;
        for (const auto& m : c.members) ++counts[m.feature_id];
        std::size_t best = 0;
        for (auto [f, k] : counts) best = std::max(best, k);
        agree += best;
        total += c.members.size();
    }
    if (total == 0) throw EmptyNaming("naming " + n.annotator_id + "/" + n.class_id + " names nothing");
    return static_cast<double>(agree) / static_cast<double>(total);
}

inline double xc_purity(const Naming& n) {
    std::map<int, std::map<std::string, std::size_t>> counts;
    std::size_t total = 0;
    for (const auto& c : n.concepts) {
        for (const auto& m : c.members) ++counts[m.feature_id][c.concept_id];
        total += c.members.size();
    }
    if (total == 0) throw EmptyNaming("naming " + n.annotator_id + "/" + n.class_id + " names nothing");
    std::size_t agree = 0;
    for (const auto& [f, per_concept] : counts) {
        std::size_t best = 0;
        for (const auto& [cid, k] : per_concept) best = std::max(best, k);
        agree += best;
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

inline double jaccard(const ActivationSet& a, const ActivationSet& b) {
    if (a.empty() && b.empty()) throw BothEmpty("both named sets are empty");
    std::size_t common = 0;
    for (const auto& x : a) common += b.contains(x) ? 1 : 0;
    const std::size_t uni = a.size() + b.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

inline double jaccard(const Naming& a, const Naming& b) {
    if (a.class_id != b.class_id)
        throw MismatchedKeys("namings cover different classes " + a.class_id + " and " + b.class_id);
    return jaccard(named_set(a), named_set(b));
}

} // namespace naminglab
