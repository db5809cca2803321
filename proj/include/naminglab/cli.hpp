#pragma once

// Command-line front end. Exit status: 0 success, 1 validation or input failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "naminglab/core.hpp"
#include "naminglab/http_server.hpp"
#include "naminglab/linguistics.hpp"
#include "naminglab/matching.hpp"
#include "naminglab/metrics.hpp"
#include "naminglab/reporting.hpp"
#include "naminglab/service.hpp"
#include "naminglab/significance.hpp"
#include "naminglab/synth.hpp"

namespace naminglab {

namespace fs = std::filesystem;

inline constexpr const char* kDataDirEnv = "NAMING_LAB_DATA";

namespace detail {

inline std::vector<Naming> load_namings(const std::vector<std::string>& paths, std::size_t min_cluster_size) {
    std::vector<Naming> out;
    for (const auto& p : paths) out.push_back(clean_naming(load_naming(p), min_cluster_size));
    return out;
}

inline void write_documents(const std::vector<ReportDocument>& docs, const std::string& dir, std::ostream& out) {
    fs::create_directories(dir);
    for (const auto& d : docs) {
        const auto path = fs::path(dir) / d.filename;
        write_file(path.string(), d.content);
        out << path.string() << "\n";
    }
}

inline void emit_json(const json& doc, const std::string& path, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    if (path.empty() || path == "-") out << text;
    else write_file(path, text);
}

inline std::vector<std::string> classes_of(const std::vector<Naming>& namings) {
    std::set<std::string> s;
    for (const auto& n : namings) s.insert(n.class_id);
    return {s.begin(), s.end()};
}

inline std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Significant-activation naming and annotator agreement toolkit", "naminglab"};
    app.require_subcommand(1);

    std::string testset_path, class_id, out_path, out_dir = ".", lexicon_path, config_path, mode = "subset";
    std::string token = kDefaultUnnamedToken;
    std::vector<std::string> naming_paths;
    std::optional<double> threshold;
    std::size_t min_cluster = kDefaultMinClusterSize;
    int d = 1;
    Budget budget;

    auto* validate = app.add_subcommand("validate", "Validate a dataset document and naming documents");
    validate->add_option("--testset", testset_path, "Dataset document")->required();
    validate->add_option("--naming", naming_paths, "Naming document (repeatable)");

    auto* significance = app.add_subcommand("significance", "Significant X-features per image of a class");
    significance->add_option("--testset", testset_path, "Dataset document")->required();
    significance->add_option("--class", class_id, "Class id")->required();
    significance->add_option("--threshold", threshold, "Coverage fraction, defaults to the dataset's");
    significance->add_option("--out", out_path, "Output file (stdout when omitted)");

    auto* coverage = app.add_subcommand("coverage", "Coverage statistics and exactly-n histograms");
    coverage->add_option("--testset", testset_path, "Dataset document")->required();
    coverage->add_option("--naming", naming_paths, "Naming document (repeatable)")->required();
    coverage->add_option("--out-dir", out_dir, "Report directory");
    coverage->add_option("--min-cluster-size", min_cluster, "Concepts below this size are dropped");

    auto* purity = app.add_subcommand("purity", "CX- and XC-purity tables");
    purity->add_option("--naming", naming_paths, "Naming document (repeatable)")->required();
    purity->add_option("--out-dir", out_dir, "Report directory");
    purity->add_option("--min-cluster-size", min_cluster, "Concepts below this size are dropped");

    auto* match = app.add_subcommand("match", "D-family matching between annotators");
    match->add_option("--naming", naming_paths, "Naming document (two for a partition, more for tables)")->required();
    match->add_option("--d", d, "Family diameter bound (1 or 2)");
    match->add_option("--budget-nodes", budget.max_exact_nodes, "Largest graph solved exactly for D = 2");
    match->add_option("--budget-work", budget.max_work, "Exact-search effort limit for D = 2");
    match->add_option("--out", out_path, "Partition document (two namings; stdout when omitted)");
    match->add_option("--out-dir", out_dir, "Report directory (more than two namings)");
    match->add_option("--min-cluster-size", min_cluster, "Concepts below this size are dropped");

    auto* compat = app.add_subcommand("compat", "Linguistic compatibility of matched concepts");
    compat->add_option("--naming", naming_paths, "Naming document (two for a score, more for tables)")->required();
    compat->add_option("--d", d, "Family diameter bound (1 or 2)");
    compat->add_option("--mode", mode, "exact or subset")->check(CLI::IsMember({"exact", "subset"}));
    compat->add_option("--lexicon", lexicon_path, "Lexicon file");
    compat->add_option("--out", out_path, "Output file (two namings; stdout when omitted)");
    compat->add_option("--out-dir", out_dir, "Report directory (more than two namings)");
    compat->add_option("--min-cluster-size", min_cluster, "Concepts below this size are dropped");

    auto* summary = app.add_subcommand("summary", "Explanation summaries per annotator");
    summary->add_option("--testset", testset_path, "Dataset document")->required();
    summary->add_option("--naming", naming_paths, "Naming document (repeatable)")->required();
    summary->add_option("--out-dir", out_dir, "Report directory");
    summary->add_option("--unnamed-token", token, "Name used for unnamed activations");
    summary->add_option("--min-cluster-size", min_cluster, "Concepts below this size are dropped");

    SynthConfig synth_cfg;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted namings");
    synth->add_option("--config", config_path, "key=value config file; flags override it");
    synth->add_option("--images", synth_cfg.image_count);
    synth->add_option("--features", synth_cfg.feature_count);
    synth->add_option("--concepts", synth_cfg.concept_count);
    synth->add_option("--annotators", synth_cfg.annotator_count);
    synth->add_option("--activations", synth_cfg.activation_count);
    synth->add_option("--noise", synth_cfg.noise_rate);
    synth->add_option("--unnamed", synth_cfg.unnamed_rate);
    synth->add_option("--seed", synth_cfg.seed);
    synth->add_option("--class", synth_cfg.class_id);
    synth->add_option("--out-dir", out_dir, "Output directory");

    std::string data_dir, host = "127.0.0.1", heatmap_root;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Serve activations and persist namings over HTTP");
    serve->add_option("--testset", testset_path, "Dataset document (default $NAMING_LAB_DATA/testset.json)");
    serve->add_option("--data-dir", data_dir, "Naming directory (default $NAMING_LAB_DATA)");
    serve->add_option("--heatmap-root", heatmap_root, "Directory heatmap paths are relative to");
    serve->add_option("--host", host);
    serve->add_option("--port", port);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return 0;
        err << app.help();
        return 2;
    }

    try {
        if (validate->parsed()) {
            const TestSet ts = load_testset(testset_path);
            out << testset_path << ": ok (" << ts.records.size() << " records, " << ts.categories.size()
                << " categories)\n";
            int status = 0;
            for (const auto& p : naming_paths) {
                try {
                    validate_naming(load_naming(p), ts);
                    out << p << ": ok\n";
                } catch (const ConsistencyError& e) {
                    status = 1;
                    err << p << ": invalid\n";
                    for (const auto& v : e.violations()) err << "  " << v << "\n";
                } catch (const Error& e) {
                    status = 1;
                    err << p << ": " << e.what() << "\n";
                }
            }
            return status;
        }

        if (significance->parsed()) {
            const TestSet ts = load_testset(testset_path);
            const auto cs = significant_sets(ts, class_id, threshold.value_or(ts.significance_threshold));
            json doc = to_json(cs);
            doc["average_rendered"] = format_fixed(cs.average, 2);
            if (cs.average_undefined) doc["warning"] = "class has no images; average reported as 0";
            detail::emit_json(doc, out_path, out);
            return 0;
        }

        if (coverage->parsed()) {
            const TestSet ts = load_testset(testset_path);
            const auto namings = detail::load_namings(naming_paths, min_cluster);
            std::vector<ReportDocument> docs;
            for (const auto& c : ts.categories) {
                std::vector<Naming> group;
                for (const auto& n : namings)
                    if (n.class_id == c) group.push_back(n);
                if (group.empty()) continue;
                for (auto& doc : coverage_documents(coverage_report(group, significant_sets(ts, c))))
                    docs.push_back(std::move(doc));
            }
            detail::write_documents(docs, out_dir, out);
            return 0;
        }

        if (purity->parsed()) {
            const auto namings = detail::load_namings(naming_paths, min_cluster);
            AnalysisResults r;
            r.categories = detail::classes_of(namings);
            for (const auto& n : namings) {
                r.cx_purity[n.class_id][n.annotator_id] = cx_purity(n);
                r.xc_purity[n.class_id][n.annotator_id] = xc_purity(n);
            }
            const auto docs = purity_tables(r);
            detail::write_documents(docs, out_dir, out);
            return 0;
        }

        if (match->parsed() || compat->parsed()) {
            const bool is_match = match->parsed();
            if (naming_paths.size() < 2) {
                err << "need at least two --naming documents\n";
                return 2;
            }
            const Lexicon lex = lexicon_path.empty() ? Lexicon::defaults() : load_lexicon(lexicon_path);
            const auto namings = detail::load_namings(naming_paths, min_cluster);
            if (naming_paths.size() == 2) {
                const auto& a = namings[0];
                const auto& b = namings[1];
                if (a.class_id != b.class_id)
                    throw MismatchedKeys("namings cover different classes " + a.class_id + " and " + b.class_id);
                const auto g = build_intersection_graph(a, b);
                const auto p = d_family_matching(g, d, budget);
                json doc = to_json(p, g);
                doc["class_id"] = a.class_id;
                doc["left_annotator"] = a.annotator_id;
                doc["right_annotator"] = b.annotator_id;
                if (is_match) {
                    auto ag = optional_of([&] { return agreement_score(p, a, b); });
                    auto jc = optional_of([&] { return jaccard(a, b); });
                    doc["agreement"] = ag ? json(*ag) : json(nullptr);
                    doc["jaccard"] = jc ? json(*jc) : json(nullptr);
                } else {
                    const CompatMode m = mode == "exact" ? CompatMode::exact : CompatMode::subset;
                    doc["mode"] = to_string(m);
                    doc["compatibility"] = compatibility_score(p, g, a, b, m, lex);
                }
                detail::emit_json(doc, out_path, out);
                return 0;
            }
            AnalysisOptions opt;
            opt.budget = budget;
            opt.lexicon = lex;
            AnalysisResults r;
            r.categories = detail::classes_of(namings);
            std::map<std::string, std::vector<Naming>> by_class;
            for (const auto& n : namings) by_class[n.class_id].push_back(n);
            for (auto& [c, group] : by_class) {
                std::sort(group.begin(), group.end(),
                          [](const Naming& x, const Naming& y) { return x.annotator_id < y.annotator_id; });
                for (std::size_t i = 0; i < group.size(); ++i)
                    for (std::size_t j = i + 1; j < group.size(); ++j)
                        r.pairs[c].push_back(score_pair(group[i], group[j], opt));
            }
            const auto docs = is_match ? agreement_tables(r) : compatibility_tables(r);
            detail::write_documents(docs, out_dir, out);
            return 0;
        }

        if (summary->parsed()) {
            const TestSet ts = load_testset(testset_path);
            const auto namings = detail::load_namings(naming_paths, min_cluster);
            std::map<std::string, std::map<std::string, std::vector<SummaryRow>>> rows;
            for (const auto& n : namings) rows[n.class_id][n.annotator_id] = explanation_summary(ts, n.class_id, n, token);
            std::vector<ReportDocument> docs;
            for (const auto& c : ts.categories)
                if (auto it = rows.find(c); it != rows.end())
                    for (auto& doc : summary_documents(c, it->second)) docs.push_back(std::move(doc));
            detail::write_documents(docs, out_dir, out);
            return 0;
        }

        if (synth->parsed()) {
            SynthConfig cfg = synth_cfg;
            if (!config_path.empty()) {
                // file values first, then any flag given explicitly on the command line
                cfg = parse_synth_config(read_file(config_path));
                if (synth->count("--images")) cfg.image_count = synth_cfg.image_count;
                if (synth->count("--features")) cfg.feature_count = synth_cfg.feature_count;
                if (synth->count("--concepts")) cfg.concept_count = synth_cfg.concept_count;
                if (synth->count("--annotators")) cfg.annotator_count = synth_cfg.annotator_count;
                if (synth->count("--activations")) cfg.activation_count = synth_cfg.activation_count;
                if (synth->count("--noise")) cfg.noise_rate = synth_cfg.noise_rate;
                if (synth->count("--unnamed")) cfg.unnamed_rate = synth_cfg.unnamed_rate;
                if (synth->count("--seed")) cfg.seed = synth_cfg.seed;
                if (synth->count("--class")) cfg.class_id = synth_cfg.class_id;
            }
            const auto result = generate(cfg);
            fs::create_directories(out_dir);
            const auto ts_path = fs::path(out_dir) / "testset.json";
            write_file(ts_path.string(), to_json(result.testset).dump(2) + "\n");
            out << ts_path.string() << "\n";
            json truth = json::object();
            for (std::size_t k = 0; k < result.namings.size(); ++k) {
                const auto& n = result.namings[k];
                const auto path = fs::path(out_dir) / "namings" / n.annotator_id / (n.class_id + ".json");
                fs::create_directories(path.parent_path());
                write_file(path.string(), to_json(n).dump(2) + "\n");
                out << path.string() << "\n";
                truth["concepts"][n.annotator_id] = result.concept_truth[k];
            }
            json planted = json::array();
            for (const auto& [a, c] : result.planted) {
                json j = to_json(a);
                j["planted_concept"] = c;
                planted.push_back(std::move(j));
            }
            truth["activations"] = std::move(planted);
            const auto truth_path = fs::path(out_dir) / "ground_truth.json";
            write_file(truth_path.string(), truth.dump(2) + "\n");
            out << truth_path.string() << "\n";
            return 0;
        }

        if (serve->parsed()) {
            const std::string base = detail::env_or(kDataDirEnv, ".");
            if (testset_path.empty()) testset_path = (fs::path(base) / "testset.json").string();
            if (data_dir.empty()) data_dir = (fs::path(base) / "namings").string();
            if (heatmap_root.empty()) heatmap_root = fs::absolute(testset_path).parent_path().string();
            Service service(load_testset(testset_path), data_dir);
            HttpFrontend http(service, heatmap_root);
            const int bound = http.bind(host, port);
            if (bound < 0) {
                err << "cannot bind " << host << ":" << port << "\n";
                return 1;
            }
            out << "serving " << testset_path << " on http://" << host << ":" << bound << "\n" << std::flush;
            return http.serve() ? 0 : 1;
        }
    } catch (const ConsistencyError& e) {
        err << "invalid input:\n";
        for (const auto& v : e.violations()) err << "  " << v << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace naminglab
