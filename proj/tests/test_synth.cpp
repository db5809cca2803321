#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace naminglab;

namespace {

SynthConfig base(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.image_count = 120;
    cfg.feature_count = 6;
    cfg.concept_count = 6;
    cfg.annotator_count = 3;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST(Synth, DeterministicUnderSeed) {
    auto cfg = base(1234);
    cfg.noise_rate = 0.2;
    cfg.unnamed_rate = 0.1;
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    EXPECT_EQ(a.testset, b.testset);
    EXPECT_EQ(a.namings, b.namings);
    EXPECT_EQ(a.planted, b.planted);
    cfg.seed = 1235;
    EXPECT_NE(generate(cfg).testset, a.testset);
}

TEST(Synth, ZeroNoiseIdenticalClusterings) {
    auto cfg = base(7);
    cfg.annotator_count = 2;
    const auto out = generate(cfg);
    const auto& a = out.namings[0];
    const auto& b = out.namings[1];
    // same clusters up to concept ids
    std::set<ActivationSet> ca, cb;
    for (const auto& c : a.concepts) ca.insert(c.members);
    for (const auto& c : b.concepts) cb.insert(c.members);
    EXPECT_EQ(ca, cb);
    const auto g = build_intersection_graph(a, b);
    EXPECT_DOUBLE_EQ(agreement_score(d_family_matching(g, 1), a, b), 1.0);
    EXPECT_DOUBLE_EQ(jaccard(a, b), 1.0);
}

TEST(Synth, ZeroNoisePurityAndAgreement) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto out = generate(base(seed));
        for (const auto& n : out.namings) {
            EXPECT_DOUBLE_EQ(cx_purity(n), 1.0);
            EXPECT_DOUBLE_EQ(xc_purity(n), 1.0);
        }
        for (std::size_t i = 0; i < out.namings.size(); ++i)
            for (std::size_t j = i + 1; j < out.namings.size(); ++j) {
                const auto& a = out.namings[i];
                const auto& b = out.namings[j];
                EXPECT_DOUBLE_EQ(agreement_score(d_family_matching(build_intersection_graph(a, b), 1), a, b), 1.0);
            }
    }
}

TEST(Synth, OutputsValidate) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto cfg = base(seed);
        cfg.noise_rate = 0.3;
        cfg.unnamed_rate = 0.2;
        const auto out = generate(cfg);
        EXPECT_EQ(validate_testset(to_json(out.testset)), out.testset);
        const auto cs = significant_sets(out.testset, cfg.class_id);
        EXPECT_EQ(cs.activations().size(), out.planted.size());
        for (const auto& [a, c] : out.planted) EXPECT_TRUE(cs.activations().contains(a));
        for (const auto& n : out.namings) EXPECT_NO_THROW(validate_naming(n, out.testset));
    }
}

TEST(Synth, CleaningIsNoOpWithoutNoise) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto out = generate(base(seed));
        for (const auto& n : out.namings) {
            auto c = clean_naming(n, 3);
            c.version = n.version;
            EXPECT_EQ(c, n);
        }
    }
}

TEST(Synth, ExactActivationCount) {
    auto cfg = base(3);
    cfg.image_count = 250;
    cfg.activation_count = 500;
    const auto out = generate(cfg);
    EXPECT_EQ(out.planted.size(), 500u);
    EXPECT_EQ(significant_sets(out.testset, cfg.class_id).total, 500u);
}

TEST(Synth, NoiseAndUnnamedRates) {
    auto cfg = base(5);
    cfg.image_count = 1000;
    cfg.annotator_count = 1;
    cfg.noise_rate = 0.1;
    cfg.unnamed_rate = 0.2;
    const auto out = generate(cfg);
    const auto& n = out.namings[0];
    std::size_t moved = 0, named = 0;
    for (const auto& c : n.concepts)
        for (const auto& m : c.members) {
            ++named;
            moved += out.planted.at(m) != out.concept_truth[0].at(c.concept_id);
        }
    const double total = static_cast<double>(out.planted.size());
    EXPECT_NEAR(1.0 - static_cast<double>(named) / total, 0.2, 0.03);
    EXPECT_NEAR(static_cast<double>(moved) / total, 0.1, 0.03);
}

TEST(Synth, PlantedRecoveryOnCleanData) {
    const auto out = generate(base(8));
    const auto g = build_intersection_graph(out.namings[0], out.namings[1]);
    EXPECT_DOUBLE_EQ(planted_recovery(g, d_family_matching(g, 1), out.concept_truth[0], out.concept_truth[1]), 1.0);
}

TEST(Synth, InfeasibleConfigs) {
    auto cfg = base(1);
    cfg.concept_count = 0;
    EXPECT_THROW(generate(cfg), InfeasibleConfig);
    cfg = base(1);
    cfg.noise_rate = 0.6;
    cfg.unnamed_rate = 0.5;
    EXPECT_THROW(generate(cfg), InfeasibleConfig);
    cfg = base(1);
    cfg.noise_rate = 1.0;
    EXPECT_THROW(generate(cfg), InfeasibleConfig);
    cfg = base(1);
    cfg.concept_count = 7; // more concepts than features
    EXPECT_THROW(generate(cfg), InfeasibleConfig);
    cfg = base(1);
    cfg.image_count = 2;
    EXPECT_THROW(generate(cfg), InfeasibleConfig);
    cfg = base(1);
    cfg.feature_count = 10;
    cfg.max_significant_per_image = 10;
    EXPECT_THROW(generate(cfg), InfeasibleConfig);
    cfg = base(1);
    cfg.activation_count = 10;
    EXPECT_THROW(generate(cfg), InfeasibleConfig);
}

TEST(Synth, ConfigFile) {
    const auto cfg = parse_synth_config("# demo\nimage_count = 40\nnoise_rate=0.25\nseed=99\nclass_id = birds\n"
                                        "feature_aligned = false\n");
    EXPECT_EQ(cfg.image_count, 40u);
    EXPECT_DOUBLE_EQ(cfg.noise_rate, 0.25);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_EQ(cfg.class_id, "birds");
    EXPECT_FALSE(cfg.feature_aligned);
    EXPECT_THROW(parse_synth_config("colour=red\n"), SchemaError);
    EXPECT_THROW(parse_synth_config("seed=abc\n"), SchemaError);
    EXPECT_THROW(parse_synth_config("seed\n"), SchemaError);
}
