#pragma once

// Synthetic test sets and namings with a planted concept assignment.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "naminglab/core.hpp"
#include "naminglab/matching.hpp"
#include "naminglab/significance.hpp"

namespace naminglab {

struct SynthConfig {
    std::size_t image_count = 100;
    int feature_count = 5;
    std::size_t concept_count = 5;
    std::size_t annotator_count = 5;
    double noise_rate = 0.0;    // chance an activation is moved to a random other concept
    double unnamed_rate = 0.0;  // chance an activation is left unnamed
    std::uint64_t seed = 1;
    std::size_t activation_count = 0;   // 0: 1..max_significant_per_image per image
    std::size_t max_significant_per_image = 3;
    bool feature_aligned = true;        // planted concept = feature_id mod concept_count
    std::size_t min_cluster_size = kDefaultMinClusterSize;
    std::string class_id = "synth";
};

struct SynthOutput {
    TestSet testset;
    std::map<ActivationRef, std::size_t> planted;              // activation -> planted concept
    std::vector<Naming> namings;
    std::vector<std::map<std::string, std::size_t>> concept_truth; // per naming: concept_id -> planted
};

namespace detail {

inline const std::vector<std::string>& planted_names() {
    static const std::vector<std::string> names{"eye",   "wing",    "beak",  "tail",   "crown",
                                                "throat", "feet",   "neck",  "breast", "forehead"};
    return names;
}

inline std::string planted_name(std::size_t c) {
    const auto& names = planted_names();
    if (c < names.size()) return names[c];
    return names[c % names.size()] + " " + std::to_string(c / names.size() + 1);
}

// Largest number of significant features for which values drawn from [10, 15] keep every
// feature necessary: the smallest (10) must exceed a tenth of the largest possible sum.
inline constexpr std::size_t kMaxPlantedPerImage = 6;

} // namespace detail

inline void check_config(const SynthConfig& c) {
    auto fail = [](const std::string& why) { throw InfeasibleConfig(why); };
    if (c.concept_count < 1) fail("concept_count must be at least 1");
    if (c.image_count < 1) fail("image_count must be at least 1");
    if (c.feature_count < 1) fail("feature_count must be at least 1");
    if (c.annotator_count < 1) fail("annotator_count must be at least 1");
    if (c.noise_rate < 0.0 || c.noise_rate >= 1.0) fail("noise_rate must lie in [0, 1)");
    if (c.unnamed_rate < 0.0 || c.unnamed_rate >= 1.0) fail("unnamed_rate must lie in [0, 1)");
    if (c.noise_rate + c.unnamed_rate >= 1.0) fail("noise_rate + unnamed_rate must be below 1");
    const std::size_t per_image = std::min<std::size_t>(c.max_significant_per_image,
                                                        static_cast<std::size_t>(c.feature_count));
    if (per_image < 1) fail("max_significant_per_image must be at least 1");
    if (per_image > detail::kMaxPlantedPerImage)
        fail("at most " + std::to_string(detail::kMaxPlantedPerImage) + " significant features per image");
    if (c.activation_count != 0 &&
        (c.activation_count < c.image_count || c.activation_count > c.image_count * per_image))
        fail("activation_count must lie in [image_count, image_count * max_significant_per_image]");
    if (c.feature_aligned && c.concept_count > static_cast<std::size_t>(c.feature_count))
        fail("feature-aligned concepts need concept_count <= feature_count");
    if (c.min_cluster_size * c.concept_count >
        (c.activation_count ? c.activation_count : c.image_count * per_image))
        fail("too few activations to give every concept min_cluster_size members");
}

inline SynthOutput generate(const SynthConfig& cfg) {
    check_config(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t F = static_cast<std::size_t>(cfg.feature_count);
    const std::size_t per_image = std::min(cfg.max_significant_per_image, F);

    std::vector<std::vector<int>> features; // per image, planted significant features
    std::vector<std::vector<std::size_t>> concepts;
    bool ok = false;
    for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
        std::vector<std::size_t> counts(cfg.image_count, 1);
        if (cfg.activation_count) {
            std::size_t remaining = cfg.activation_count - cfg.image_count;
            std::vector<std::size_t> open(cfg.image_count);
            std::iota(open.begin(), open.end(), 0);
            while (remaining > 0) {
                std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
                const std::size_t k = pick(rng);
                if (++counts[open[k]] == per_image) open.erase(open.begin() + static_cast<std::ptrdiff_t>(k));
                --remaining;
            }
        } else {
            std::uniform_int_distribution<std::size_t> count(1, per_image);
            for (auto& c : counts) c = count(rng);
        }
        features.assign(cfg.image_count, {});
        concepts.assign(cfg.image_count, {});
        std::vector<std::size_t> sizes(cfg.concept_count, 0);
        std::vector<int> all(F);
        std::iota(all.begin(), all.end(), 0);
        std::uniform_int_distribution<std::size_t> any_concept(0, cfg.concept_count - 1);
        for (std::size_t i = 0; i < cfg.image_count; ++i) {
            std::shuffle(all.begin(), all.end(), rng);
            features[i].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(counts[i]));
            std::sort(features[i].begin(), features[i].end());
            for (int f : features[i]) {
                const std::size_t c = cfg.feature_aligned ? static_cast<std::size_t>(f) % cfg.concept_count
                                                          : any_concept(rng);
                concepts[i].push_back(c);
                ++sizes[c];
            }
        }
        ok = std::all_of(sizes.begin(), sizes.end(),
                         [&](std::size_t s) { return s >= cfg.min_cluster_size; });
    }
    if (!ok) throw InfeasibleConfig("could not give every planted concept enough members");

    SynthOutput out;
    auto& ts = out.testset;
    ts.categories = {cfg.class_id};
    ts.feature_count = cfg.feature_count;
    ts.significance_threshold = kDefaultSignificanceThreshold;
    std::uniform_real_distribution<double> strong(10.0, 15.0), negative(-5.0, 0.0);
    for (std::size_t i = 0; i < cfg.image_count; ++i) {
        XFeatureRecord r;
        r.image_id = "img" + std::to_string(i);
        r.class_id = cfg.class_id;
        r.contributions.assign(F, 0.0);
        double strong_sum = 0.0;
        for (int f : features[i]) strong_sum += (r.contributions[static_cast<std::size_t>(f)] = strong(rng));
        // Weak positives stay under 5% of the planted mass, so the planted features are
        // both necessary and sufficient at the 90% threshold.
        const double weak_cap = 0.05 * strong_sum / static_cast<double>(F);
        for (std::size_t f = 0; f < F; ++f) {
            if (std::find(features[i].begin(), features[i].end(), static_cast<int>(f)) != features[i].end()) continue;
            r.contributions[f] = unit(rng) < 0.5 ? negative(rng) : unit(rng) * weak_cap;
        }
        for (std::size_t k = 0; k < features[i].size(); ++k)
            out.planted[{r.image_id, cfg.class_id, features[i][k]}] = concepts[i][k];

        auto sig = significant_features(r, ts.significance_threshold);
        std::sort(sig.features.begin(), sig.features.end());
        if (sig.features != features[i])
            throw InfeasibleConfig("planted features of " + r.image_id + " are not significant");
        ts.records.push_back(std::move(r));
    }

    std::uniform_int_distribution<std::size_t> other(0, cfg.concept_count > 1 ? cfg.concept_count - 2 : 0);
    for (std::size_t a = 0; a < cfg.annotator_count; ++a) {
        std::vector<std::size_t> label(cfg.concept_count);
        std::iota(label.begin(), label.end(), 0);
        std::shuffle(label.begin(), label.end(), rng);

        std::vector<ActivationSet> members(cfg.concept_count);
        for (const auto& [act, c] : out.planted) {
            const double u = unit(rng);
            if (u < cfg.unnamed_rate) continue;
            std::size_t target = c;
            if (u < cfg.unnamed_rate + cfg.noise_rate && cfg.concept_count > 1) {
                target = other(rng);
                if (target >= c) ++target;
            }
            members[target].insert(act);
        }

        Naming n;
        n.annotator_id = "annotator-" + std::to_string(a + 1);
        n.class_id = cfg.class_id;
        n.version = 1;
        std::map<std::string, std::size_t> truth;
        for (std::size_t c = 0; c < cfg.concept_count; ++c) {
            if (members[c].empty()) continue;
            const std::string id = "k" + std::to_string(a + 1) + "-c" + std::to_string(label[c]);
            n.concepts.push_back({id, detail::planted_name(c), std::move(members[c])});
            truth[id] = c;
        }
        out.namings.push_back(std::move(n));
        out.concept_truth.push_back(std::move(truth));
    }
    return out;
}

// Share of planted concepts, present in both namings, whose two concepts the partition
// places in one family.
inline double planted_recovery(const IntersectionGraph& g, const DFamilyPartition& p,
                               const std::map<std::string, std::size_t>& truth_left,
                               const std::map<std::string, std::size_t>& truth_right) {
    std::map<std::size_t, std::size_t> left_of, right_of; // planted -> node index
    for (std::size_t i = 0; i < g.left.size(); ++i)
        if (auto it = truth_left.find(g.left[i]); it != truth_left.end()) left_of[it->second] = i;
    for (std::size_t j = 0; j < g.right.size(); ++j)
        if (auto it = truth_right.find(g.right[j]); it != truth_right.end()) right_of[it->second] = j;

    std::vector<std::ptrdiff_t> fam_l(g.left.size(), -1), fam_r(g.right.size(), -1);
    for (std::size_t k = 0; k < p.families.size(); ++k) {
        for (auto i : p.families[k].left) fam_l[i] = static_cast<std::ptrdiff_t>(k);
        for (auto j : p.families[k].right) fam_r[j] = static_cast<std::ptrdiff_t>(k);
    }
    std::size_t shared = 0, recovered = 0;
    for (const auto& [c, i] : left_of) {
        auto it = right_of.find(c);
        if (it == right_of.end()) continue;
        ++shared;
        if (fam_l[i] >= 0 && fam_l[i] == fam_r[it->second]) ++recovered;
    }
    return shared == 0 ? 0.0 : static_cast<double>(recovered) / static_cast<double>(shared);
}

// key=value lines; '#' starts a comment.
inline SynthConfig parse_synth_config(const std::string& text, SynthConfig cfg = {}) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto eq = line.find('=');
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos)
            throw SchemaError("synth config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "image_count") cfg.image_count = std::stoull(value);
            else if (key == "feature_count") cfg.feature_count = std::stoi(value);
            else if (key == "concept_count") cfg.concept_count = std::stoull(value);
            else if (key == "annotator_count") cfg.annotator_count = std::stoull(value);
            else if (key == "noise_rate") cfg.noise_rate = std::stod(value);
            else if (key == "unnamed_rate") cfg.unnamed_rate = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "activation_count") cfg.activation_count = std::stoull(value);
            else if (key == "max_significant_per_image") cfg.max_significant_per_image = std::stoull(value);
            else if (key == "feature_aligned") cfg.feature_aligned = value == "true" || value == "1";
            else if (key == "min_cluster_size") cfg.min_cluster_size = std::stoull(value);
            else if (key == "class_id") cfg.class_id = value;
            else throw SchemaError("synth config line " + std::to_string(lineno) + ": unknown key " + key);
        } catch (const std::logic_error&) {
            throw SchemaError("synth config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    return cfg;
}

} // namespace naminglab
