#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "naminglab/naminglab.hpp"

namespace fx {

using namespace naminglab;

inline ActivationRef act(const std::string& image, int f, const std::string& cls = "a") {
    return {image, cls, f};
}

inline XFeatureRecord record(const std::string& image, const std::string& cls, std::vector<double> c) {
    return {image, cls, std::move(c), {}};
}

// A class whose image i has exactly counts[i] significant features (equal contributions,
// so every positive one is needed). A count of 0 gives an image without positive evidence.
inline TestSet testset_with_counts(const std::string& cls, const std::vector<int>& counts, int features = 5) {
    TestSet ts;
    ts.categories = {cls};
    ts.feature_count = features;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::vector<double> c(static_cast<std::size_t>(features), 0.0);
        for (int f = 0; f < counts[i]; ++f) c[static_cast<std::size_t>(f)] = 10.0;
        if (counts[i] == 0) c[0] = -1.0;
        ts.records.push_back(record("img" + std::to_string(i), cls, std::move(c)));
    }
    return ts;
}

struct ConceptSpec {
    std::string id;
    std::string name;
    std::vector<ActivationRef> members;
};

inline Naming naming(const std::string& annotator, const std::string& cls, const std::vector<ConceptSpec>& concepts,
                     const std::vector<ActivationRef>& discarded = {}) {
    Naming n;
    n.annotator_id = annotator;
    n.class_id = cls;
    for (const auto& c : concepts)
        n.concepts.push_back({c.id, c.name, ActivationSet(c.members.begin(), c.members.end())});
    n.discarded = ActivationSet(discarded.begin(), discarded.end());
    return n;
}

// `count` activations with distinct image ids and the given feature.
inline std::vector<ActivationRef> acts(const std::string& prefix, int count, int feature = 0,
                                       const std::string& cls = "a") {
    std::vector<ActivationRef> out;
    for (int i = 0; i < count; ++i) out.push_back({prefix + std::to_string(i), cls, feature});
    return out;
}

inline std::vector<double> random_contributions(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> v(-20, 40);
    std::vector<double> c(static_cast<std::size_t>(n));
    bool positive = false;
    while (!positive) {
        for (auto& x : c) {
            x = v(rng) / 4.0;
            positive = positive || x > 0;
        }
    }
    return c;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto p = std::filesystem::temp_directory_path() / ("naminglab-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(p);
    return p;
}

} // namespace fx
