#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace naminglab;
using fx::act;

namespace {

json two_image_doc() {
    return json::parse(R"({
        "feature_count": 5,
        "significance_threshold": 0.9,
        "categories": ["a"],
        "records": [
            {"image_id": "i1", "class_id": "a", "contributions": [5, 3, 1, -2, 0],
             "heatmap_paths": ["i1/0.png", "i1/1.png", "i1/2.png", "i1/3.png", "i1/4.png"]},
            {"image_id": "i2", "class_id": "a", "contributions": [0, 0, 7, -1, 0]}
        ]
    })");
}

} // namespace

TEST(Testset, WellFormedDocument) {
    const auto ts = validate_testset(two_image_doc());
    EXPECT_EQ(ts.records.size(), 2u);
    EXPECT_EQ(ts.feature_count, 5);
    EXPECT_EQ(ts.records[0].heatmap_paths.size(), 5u);
    EXPECT_TRUE(ts.records[1].heatmap_paths.empty());
}

TEST(Testset, ShortContributionListNamesRecord) {
    auto doc = two_image_doc();
    doc["records"][1]["contributions"] = {1, 2, 3, 4};
    try {
        validate_testset(doc);
        FAIL() << "expected ConsistencyError";
    } catch (const ConsistencyError& e) {
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_NE(e.violations()[0].find("i2"), std::string::npos);
        EXPECT_NE(e.violations()[0].find("a"), std::string::npos);
    }
}

TEST(Testset, DuplicateKeyRejected) {
    auto doc = two_image_doc();
    doc["records"][1]["image_id"] = "i1";
    EXPECT_THROW(validate_testset(doc), ConsistencyError);
}

TEST(Testset, UnknownClassRejected) {
    auto doc = two_image_doc();
    doc["records"][1]["class_id"] = "zzz";
    EXPECT_THROW(validate_testset(doc), ConsistencyError);
}

TEST(Testset, HeatmapLengthMismatch) {
    auto doc = two_image_doc();
    doc["records"][0]["heatmap_paths"] = {"x.png"};
    EXPECT_THROW(validate_testset(doc), ConsistencyError);
}

TEST(Testset, AllViolationsReported) {
    auto doc = two_image_doc();
    doc["records"][0]["contributions"] = {1};
    doc["records"][1]["class_id"] = "zzz";
    try {
        validate_testset(doc);
        FAIL();
    } catch (const ConsistencyError& e) {
        EXPECT_GE(e.violations().size(), 2u);
    }
}

TEST(Testset, SchemaErrors) {
    EXPECT_THROW(parse_testset("not json"), SchemaError);
    EXPECT_THROW(parse_testset("[]"), SchemaError);
    auto doc = two_image_doc();
    doc.erase("feature_count");
    EXPECT_THROW(validate_testset(doc), SchemaError);
    doc = two_image_doc();
    doc["feature_count"] = 0;
    EXPECT_THROW(validate_testset(doc), SchemaError);
    doc = two_image_doc();
    doc["records"][0]["contributions"][0] = "five";
    EXPECT_THROW(validate_testset(doc), SchemaError);
    doc = two_image_doc();
    doc["significance_threshold"] = 1.5;
    EXPECT_THROW(validate_testset(doc), SchemaError);
}

TEST(Testset, RoundTripProperty) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SynthConfig cfg;
        cfg.image_count = 20;
        cfg.seed = seed;
        const auto ts = generate(cfg).testset;
        const auto again = validate_testset(json::parse(to_json(ts).dump()));
        EXPECT_EQ(again, ts) << "seed " << seed;
    }
    const auto ts = validate_testset(two_image_doc());
    EXPECT_EQ(validate_testset(to_json(ts)), ts);
}

TEST(NamingDoc, RoundTrip) {
    auto n = fx::naming("ann", "a", {{"c1", "eye", {act("i1", 0), act("i2", 0)}}, {"c2", "", {act("i3", 1)}}},
                        {act("i4", 2)});
    n.version = 7;
    EXPECT_EQ(parse_naming(to_json(n).dump()), n);
}

TEST(NamingDoc, RepeatedMemberIsConsistencyError) {
    const auto doc = R"({"annotator_id": "x", "class_id": "a", "version": 0,
        "concepts": [{"concept_id": "c", "name": "n", "members": [
            {"image_id": "i", "class_id": "a", "feature_id": 0},
            {"image_id": "i", "class_id": "a", "feature_id": 0}]}], "discarded": []})";
    EXPECT_THROW(parse_naming(doc), ConsistencyError);
}

TEST(NamingDoc, OverlapsReported) {
    const auto n = fx::naming("x", "a", {{"c1", "", {act("i", 0)}}, {"c2", "", {act("i", 0)}}, {"c1", "", {}}},
                              {act("i", 0)});
    const auto v = structural_violations(n);
    EXPECT_EQ(v.size(), 3u); // shared member, duplicate id, discarded overlap
    EXPECT_THROW(parse_naming(to_json(n).dump()), ConsistencyError);
}

TEST(NamingDoc, SchemaErrors) {
    EXPECT_THROW(parse_naming(R"({"class_id": "a", "concepts": []})"), SchemaError);
    EXPECT_THROW(parse_naming(R"({"annotator_id": "x", "class_id": "a"})"), SchemaError);
    EXPECT_THROW(parse_naming(R"({"annotator_id": "x", "class_id": "a", "concepts": [
        {"concept_id": "c", "members": [{"image_id": "i", "class_id": "a", "feature_id": -1}]}]})"),
                 SchemaError);
}

TEST(Clean, DropsSmallConcepts) {
    const auto n = fx::naming("x", "a",
                              {{"big", "eye", fx::acts("b", 5)}, {"small", "wing", fx::acts("s", 2)},
                               {"mid", "tail", fx::acts("m", 3)}});
    const auto c = clean_naming(n, 3);
    ASSERT_EQ(c.concepts.size(), 2u);
    EXPECT_EQ(c.concepts[0].members.size(), 5u);
    EXPECT_EQ(c.concepts[1].members.size(), 3u);
    EXPECT_EQ(named_set(n).size() - named_set(c).size(), 2u);
    EXPECT_TRUE(c.discarded.empty());
    EXPECT_EQ(c.version, n.version + 1);
}

TEST(Clean, MinOneKeepsEverything) {
    auto n = fx::naming("x", "a", {{"c", "", fx::acts("b", 1)}, {"d", "", fx::acts("e", 2)}});
    auto c = clean_naming(n, 1);
    EXPECT_EQ(c.version, n.version + 1);
    c.version = n.version;
    EXPECT_EQ(c, n);
}

TEST(Clean, AllBelowThreshold) {
    const auto n = fx::naming("x", "a", {{"c", "", fx::acts("b", 1)}, {"d", "", fx::acts("e", 2)}},
                              {act("z", 1)});
    const auto c = clean_naming(n, 3);
    EXPECT_TRUE(c.concepts.empty());
    EXPECT_TRUE(named_set(c).empty());
    EXPECT_EQ(c.discarded, n.discarded);
}

TEST(Clean, IdempotentProperty) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> size(0, 6), k(1, 5);
        std::vector<fx::ConceptSpec> specs;
        for (int c = 0; c < 5; ++c)
            specs.push_back({"c" + std::to_string(c), "", fx::acts("t" + std::to_string(c) + "-", size(rng))});
        const auto n = fx::naming("x", "a", specs);
        const auto m = static_cast<std::size_t>(k(rng));
        auto once = clean_naming(n, m);
        auto twice = clean_naming(once, m);
        twice.version = once.version;
        EXPECT_EQ(twice, once);
        for (const auto& c : once.concepts) EXPECT_GE(c.members.size(), m);
    }
}

TEST(DisplayName, FallsBackToId) {
    EXPECT_EQ(display_name(VisualConcept{"c7", "", {}}), "c7");
    EXPECT_EQ(display_name(VisualConcept{"c7", "eye", {}}), "eye");
}
