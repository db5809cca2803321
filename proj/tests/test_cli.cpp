#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "fixtures.hpp"
#include "naminglab/cli.hpp"

using namespace naminglab;

namespace {

const std::string kData = NAMINGLAB_TEST_DATA;

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "naminglab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override { dir = fx::temp_dir("cli"); }
    void TearDown() override { std::filesystem::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    std::filesystem::path dir;
};

} // namespace

TEST_F(CliTest, UsageErrors) {
    auto r = run({});
    EXPECT_EQ(r.code, 2);
    r = run({"frobnicate"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    r = run({"significance", "--testset", "x.json", "--class", "a", "--bogus"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("significance"), std::string::npos);
    r = run({"match", "--naming", kData + "/match_p.json"});
    EXPECT_EQ(r.code, 2);
    r = run({"compat", "--naming", "a", "--naming", "b", "--mode", "fuzzy"});
    EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST_F(CliTest, Significance) {
    auto r = run({"significance", "--testset", kData + "/summary_testset.json", "--class", "a"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc["total"], 94);
    EXPECT_EQ(doc["image_count"], 60);
    EXPECT_EQ(doc["average_rendered"], "1.57");
    EXPECT_EQ(doc["images"].size(), 60u);
}

TEST_F(CliTest, Validate) {
    auto r = run({"validate", "--testset", kData + "/summary_testset.json", "--naming",
                  kData + "/summary_naming_a.json"});
    EXPECT_EQ(r.code, 0) << r.err;
    write_file(path("bad.json"), R"({"feature_count": 2, "categories": ["a"], "records": [
        {"image_id": "i", "class_id": "a", "contributions": [1]}]})");
    r = run({"validate", "--testset", path("bad.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("(i, a)"), std::string::npos);
    // naming that refers to a non-significant activation
    auto n = fx::naming("x", "a", {{"c", "", {fx::act("a00", 4)}}});
    write_file(path("n.json"), to_json(n).dump());
    r = run({"validate", "--testset", kData + "/summary_testset.json", "--naming", path("n.json")});
    EXPECT_EQ(r.code, 1);
    r = run({"validate", "--testset", path("missing.json")});
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, MatchGolden) {
    for (const char* d : {"1", "2"}) {
        auto r = run({"match", "--naming", kData + "/match_p.json", "--naming", kData + "/match_q.json", "--d", d});
        ASSERT_EQ(r.code, 0) << r.err;
        const auto golden = json::parse(read_file(kData + "/match_pq_d" + d + ".json"));
        EXPECT_EQ(json::parse(r.out), golden) << r.out;
    }
}

TEST_F(CliTest, MatchTablesForManyNamings) {
    auto r = run({"synth", "--images", "40", "--annotators", "3", "--noise", "0.1", "--seed", "4", "--out-dir",
                  path("s")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::vector<std::string> args{"match", "--d", "2", "--out-dir", path("r")};
    for (int a = 1; a <= 3; ++a)
        args.insert(args.end(), {"--naming", path("s/namings/annotator-" + std::to_string(a) + "/synth.json")});
    r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(path("r/agreement_all.csv")));
    EXPECT_TRUE(std::filesystem::exists(path("r/agreement_all.md")));
    args[0] = "compat";
    r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(path("r/compatibility_all.csv")));
}

TEST_F(CliTest, Compat) {
    auto r = run({"compat", "--naming", kData + "/match_p.json", "--naming", kData + "/match_q.json", "--d", "2",
                  "--mode", "subset"});
    ASSERT_EQ(r.code, 0) << r.err;
    // wing/open wing 3, wing/closed wing 3, eye/eye 4: all subset-compatible
    EXPECT_EQ(json::parse(r.out)["compatibility"], 1.0);
    r = run({"compat", "--naming", kData + "/match_p.json", "--naming", kData + "/match_q.json", "--d", "2",
             "--mode", "exact"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_DOUBLE_EQ(json::parse(r.out)["compatibility"].get<double>(), 0.4);
}

TEST_F(CliTest, CompatWithLexicon) {
    write_file(path("lex.txt"), "[synonyms]\nwing, closed\n[stopwords]\nopen\n");
    auto r = run({"compat", "--naming", kData + "/match_p.json", "--naming", kData + "/match_q.json", "--d", "2",
                  "--mode", "exact", "--lexicon", path("lex.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_DOUBLE_EQ(json::parse(r.out)["compatibility"].get<double>(), 1.0);
    write_file(path("bad.txt"), "nonsense\n");
    r = run({"compat", "--naming", kData + "/match_p.json", "--naming", kData + "/match_q.json", "--lexicon",
             path("bad.txt")});
    EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, SummaryFiles) {
    auto r = run({"summary", "--testset", kData + "/summary_testset.json", "--naming",
                  kData + "/summary_naming_a.json", "--naming", kData + "/summary_naming_l.json", "--out-dir",
                  path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"summary_a.csv", "summary_a.md", "summary_l.csv", "summary_l.md"})
        EXPECT_EQ(read_file(path(std::string("out/") + f)), read_file(kData + "/" + f)) << f;
}

TEST_F(CliTest, CoverageAndPurity) {
    auto r = run({"coverage", "--testset", kData + "/summary_testset.json", "--naming",
                  kData + "/summary_naming_l.json", "--out-dir", path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = read_file(path("out/coverage_l.csv"));
    EXPECT_NE(csv.find("annotator-1,0.8824,0.8824,0.8824"), std::string::npos) << csv;
    EXPECT_TRUE(std::filesystem::exists(path("out/exactly_n_l.md")));

    r = run({"purity", "--naming", kData + "/summary_naming_a.json", "--naming", kData + "/summary_naming_l.json",
             "--out-dir", path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto cx = read_file(path("out/cx_purity_all.csv"));
    EXPECT_EQ(cx, "category,annotator-1,average\na,1.00,1.00\nl,1.00,1.00\naverage,1.00,1.00\n");
}

TEST_F(CliTest, SynthOutputs) {
    write_file(path("synth.cfg"), "image_count=30\nannotator_count=2\nseed=5\n");
    auto r = run({"synth", "--config", path("synth.cfg"), "--seed", "6", "--out-dir", path("s")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ts = load_testset(path("s/testset.json"));
    EXPECT_EQ(ts.records.size(), 30u);
    EXPECT_TRUE(std::filesystem::exists(path("s/namings/annotator-2/synth.json")));
    EXPECT_FALSE(std::filesystem::exists(path("s/namings/annotator-3/synth.json")));
    const auto truth = json::parse(read_file(path("s/ground_truth.json")));
    EXPECT_EQ(truth["concepts"].size(), 2u);

    SynthConfig cfg;
    cfg.image_count = 30;
    cfg.annotator_count = 2;
    cfg.seed = 6;
    EXPECT_EQ(ts, generate(cfg).testset);

    r = run({"synth", "--noise", "0.7", "--unnamed", "0.5", "--out-dir", path("t")});
    EXPECT_EQ(r.code, 1);
}
