#pragma once

// Report tables: explanation summaries, coverage series, purity grids, pairwise agreement
// and compatibility statistics. All renderings are deterministic for identical inputs.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "naminglab/core.hpp"
#include "naminglab/format.hpp"
#include "naminglab/linguistics.hpp"
#include "naminglab/matching.hpp"
#include "naminglab/metrics.hpp"
#include "naminglab/significance.hpp"

namespace naminglab {

struct SummaryRow {
    std::vector<std::string> name_set; // sorted
    std::size_t count = 0;
    double percent = 0.0;

    bool operator==(const SummaryRow&) const = default;
};

// Groups the class's images by explanation. Images without significant activations are
// not counted. Rows run by descending share, ties by name set.
inline std::vector<SummaryRow> explanation_summary(const TestSet& ts, const std::string& class_id,
                                                   const Naming& naming,
                                                   const std::string& unnamed_token = kDefaultUnnamedToken) {
    const auto cs = significant_sets(ts, class_id);
    std::map<std::vector<std::string>, std::size_t> groups;
    for (const auto& s : cs.sets) {
        const auto e = explain(s.image_id, class_id, naming, s, unnamed_token);
        ++groups[std::vector<std::string>(e.names.begin(), e.names.end())];
    }
    std::vector<SummaryRow> rows;
    for (const auto& [names, count] : groups)
        rows.push_back({names, count,
                        100.0 * static_cast<double>(count) / static_cast<double>(cs.sets.size())});
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SummaryRow& a, const SummaryRow& b) { return a.count > b.count; });
    return rows;
}

// "('close wing', 'eye') 56.6667%"
inline std::string render_summary_row(const SummaryRow& row) {
    std::string out = "(";
    for (std::size_t i = 0; i < row.name_set.size(); ++i) {
        if (i) out += ", ";
        out += "'" + row.name_set[i] + "'";
    }
    return out + ") " + format_fixed(row.percent, 4) + "%";
}

// ---------------------------------------------------------------------------
// Aggregated analysis inputs

struct PairScores {
    std::string annotator_i;
    std::string annotator_j;
    std::optional<double> agreement_d1, agreement_d2, jaccard;
    std::optional<double> exact_d1, exact_d2, subset_d1, subset_d2;
};

struct AnalysisResults {
    std::vector<std::string> categories; // row order for cross-category tables
    std::map<std::string, CoverageReport> coverage;
    std::map<std::string, std::map<std::string, double>> cx_purity; // class -> annotator -> value
    std::map<std::string, std::map<std::string, double>> xc_purity;
    std::map<std::string, std::vector<PairScores>> pairs;
    std::map<std::string, std::map<std::string, std::vector<SummaryRow>>> summaries; // class -> annotator
    StdMode std_mode = StdMode::population;
};

struct AnalysisOptions {
    std::size_t min_cluster_size = kDefaultMinClusterSize;
    Budget budget{};
    Lexicon lexicon = Lexicon::defaults();
    std::string unnamed_token = kDefaultUnnamedToken;
    StdMode std_mode = StdMode::population;
};

template <typename F>
auto optional_of(F&& f) -> std::optional<decltype(f())> {
    try {
        return f();
    } catch (const Error&) {
        return std::nullopt;
    }
}

inline PairScores score_pair(const Naming& a, const Naming& b, const AnalysisOptions& opt) {
    PairScores s{a.annotator_id, b.annotator_id, {}, {}, {}, {}, {}, {}, {}};
    const auto g = build_intersection_graph(a, b);
    const auto p1 = d_family_matching(g, 1, opt.budget);
    const auto p2 = d_family_matching(g, 2, opt.budget);
    s.agreement_d1 = optional_of([&] { return agreement_score(p1, a, b); });
    s.agreement_d2 = optional_of([&] { return agreement_score(p2, a, b); });
    s.jaccard = optional_of([&] { return jaccard(a, b); });
    auto compat = [&](const DFamilyPartition& p, CompatMode m) {
        return optional_of([&] { return compatibility_score(p, g, a, b, m, opt.lexicon); });
    };
    s.exact_d1 = compat(p1, CompatMode::exact);
    s.exact_d2 = compat(p2, CompatMode::exact);
    s.subset_d1 = compat(p1, CompatMode::subset);
    s.subset_d2 = compat(p2, CompatMode::subset);
    return s;
}

// Cleans every naming, then computes all per-class statistics.
inline AnalysisResults collect_results(const TestSet& ts, std::span<const Naming> raw,
                                       const AnalysisOptions& opt = {}) {
    AnalysisResults r;
    r.std_mode = opt.std_mode;
    std::map<std::string, std::vector<Naming>> by_class;
    for (const auto& n : raw) by_class[n.class_id].push_back(clean_naming(n, opt.min_cluster_size));

    for (const auto& class_id : ts.categories) {
        auto it = by_class.find(class_id);
        if (it == by_class.end()) continue;
        auto& namings = it->second;
        std::sort(namings.begin(), namings.end(),
                  [](const Naming& x, const Naming& y) { return x.annotator_id < y.annotator_id; });
        r.categories.push_back(class_id);

        const auto cs = significant_sets(ts, class_id);
        if (cs.total > 0) r.coverage[class_id] = coverage_report(namings, cs);
        for (const auto& n : namings) {
            if (auto v = optional_of([&] { return cx_purity(n); })) r.cx_purity[class_id][n.annotator_id] = *v;
            if (auto v = optional_of([&] { return xc_purity(n); })) r.xc_purity[class_id][n.annotator_id] = *v;
            r.summaries[class_id][n.annotator_id] = explanation_summary(ts, class_id, n, opt.unnamed_token);
        }
        auto& pairs = r.pairs[class_id];
        for (std::size_t i = 0; i < namings.size(); ++i)
            for (std::size_t j = i + 1; j < namings.size(); ++j)
                pairs.push_back(score_pair(namings[i], namings[j], opt));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Rendering

struct ReportDocument {
    std::string filename;
    std::string content;

    bool operator==(const ReportDocument&) const = default;
};

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
    }
    return out + "\n";
}

inline std::string md_row(const std::vector<std::string>& fields) {
    std::string out = "|";
    for (const auto& f : fields) {
        std::string cell = f;
        for (std::size_t p = 0; (p = cell.find('|', p)) != std::string::npos; p += 2) cell.replace(p, 1, "\\|");
        out += " " + cell + " |";
    }
    return out + "\n";
}

inline std::string md_header(const std::vector<std::string>& fields) {
    std::string out = md_row(fields) + "|";
    for (std::size_t i = 0; i < fields.size(); ++i) out += "---|";
    return out + "\n";
}

inline std::string fmt_opt(const std::optional<double>& v, int decimals, const char* missing = "") {
    return v ? format_fixed(*v, decimals) : std::string(missing);
}

inline std::vector<double> present(const std::vector<std::optional<double>>& v) {
    std::vector<double> out;
    for (const auto& x : v)
        if (x) out.push_back(*x);
    return out;
}

// min / mean / std / max over the values that exist; empty when none do.
inline std::optional<Aggregate> aggregate_present(const std::vector<std::optional<double>>& v, StdMode mode) {
    const auto p = present(v);
    if (p.empty()) return std::nullopt;
    return aggregate(p, mode);
}

inline std::vector<std::string> annotators_of(const std::map<std::string, std::map<std::string, double>>& grid) {
    std::set<std::string> ids;
    for (const auto& [c, row] : grid)
        for (const auto& [a, v] : row) ids.insert(a);
    return {ids.begin(), ids.end()};
}

// Category x annotator grid with row and column averages.
inline void purity_documents(const std::string& table, const std::string& caption,
                             const std::vector<std::string>& categories,
                             const std::map<std::string, std::map<std::string, double>>& grid,
                             std::vector<ReportDocument>& out) {
    const auto annotators = annotators_of(grid);
    std::vector<std::string> header{"category"};
    header.insert(header.end(), annotators.begin(), annotators.end());
    header.push_back("average");

    std::string csv = csv_row(header);
    std::string md = "# " + caption + "\n\n" + md_header(header);
    std::map<std::string, std::vector<double>> columns;
    std::vector<double> all;
    for (const auto& cat : categories) {
        auto it = grid.find(cat);
        if (it == grid.end()) continue;
        std::vector<std::string> row{cat};
        std::vector<double> vals;
        for (const auto& a : annotators) {
            auto v = it->second.find(a);
            if (v == it->second.end()) {
                row.emplace_back();
                continue;
            }
            row.push_back(format_fixed(v->second, 2));
            vals.push_back(v->second);
            columns[a].push_back(v->second);
            all.push_back(v->second);
        }
        row.push_back(vals.empty() ? "" : format_fixed(aggregate(vals).mean, 2));
        csv += csv_row(row);
        md += md_row(row);
    }
    if (!all.empty()) {
        std::vector<std::string> row{"average"};
        for (const auto& a : annotators) row.push_back(format_fixed(aggregate(columns[a]).mean, 2));
        row.push_back(format_fixed(aggregate(all).mean, 2));
        csv += csv_row(row);
        md += md_row(row);
    }
    out.push_back({table + "_all.csv", csv});
    out.push_back({table + "_all.md", md});
}

// Per-category min / average±std / max block, one column per statistic.
struct StatColumn {
    std::string name;
    std::optional<double> PairScores::*field;
};

inline void pairwise_documents(const std::string& table, const std::string& caption,
                               const std::vector<StatColumn>& columns, const AnalysisResults& r,
                               std::vector<ReportDocument>& out) {
    std::vector<std::string> csv_header{"category", "statistic"};
    std::vector<std::string> md_head{"category", ""};
    for (const auto& c : columns) csv_header.push_back(c.name), md_head.push_back(c.name);

    std::string csv = csv_row(csv_header);
    std::string md = "# " + caption + "\n\n" + md_header(md_head);
    std::vector<std::vector<double>> category_means(columns.size());

    for (const auto& cat : r.categories) {
        auto it = r.pairs.find(cat);
        if (it == r.pairs.end() || it->second.empty()) continue;
        std::vector<std::optional<Aggregate>> aggs;
        for (std::size_t k = 0; k < columns.size(); ++k) {
            std::vector<std::optional<double>> vals;
            for (const auto& p : it->second) vals.push_back(p.*(columns[k].field));
            aggs.push_back(aggregate_present(vals, r.std_mode));
            if (aggs.back()) category_means[k].push_back(aggs.back()->mean);
        }
        auto stat_row = [&](const char* stat, auto pick) {
            std::vector<std::string> row{cat, stat};
            for (const auto& a : aggs) row.push_back(a ? format_fixed(pick(*a), 2) : "");
            csv += csv_row(row);
        };
        stat_row("min", [](const Aggregate& a) { return a.min; });
        stat_row("average", [](const Aggregate& a) { return a.mean; });
        stat_row("std", [](const Aggregate& a) { return a.stddev; });
        stat_row("max", [](const Aggregate& a) { return a.max; });

        std::vector<std::string> mn{"", "min"}, av{cat, "average"}, mx{"", "max"};
        for (const auto& a : aggs) {
            mn.push_back(a ? format_fixed(a->min, 2) : "n/a");
            av.push_back(a ? format_fixed(a->mean, 2) + "±" + format_fixed(a->stddev, 2) : "n/a");
            mx.push_back(a ? format_fixed(a->max, 2) : "n/a");
        }
        md += md_row(mn) + md_row(av) + md_row(mx);
    }
    bool any = false;
    for (const auto& m : category_means) any = any || !m.empty();
    if (any) {
        std::vector<std::string> row{"global", "average"};
        std::vector<std::string> mdrow{"Global Average", ""};
        for (const auto& m : category_means) {
            row.push_back(m.empty() ? "" : format_fixed(aggregate(m).mean, 2));
            mdrow.push_back(m.empty() ? "n/a" : format_fixed(aggregate(m).mean, 2));
        }
        csv += csv_row(row);
        md += md_row(mdrow);
    }
    out.push_back({table + "_all.csv", csv});
    out.push_back({table + "_all.md", md});
}

} // namespace detail

inline std::vector<ReportDocument> coverage_documents(const CoverageReport& c) {
    using detail::csv_row;
    using detail::md_row;
    const std::vector<std::string> header{"annotator", "activation_coverage", "partial_coverage",
                                          "complete_coverage"};
    std::string csv = csv_row(header);
    std::string md = "# Coverage: " + c.class_id + "\n\n" + detail::md_header(header);
    auto row = [](const std::string& who, const CoverageTriple& t) {
        return std::vector<std::string>{who, format_fixed(t.activation_coverage, 4),
                                        format_fixed(t.partial_coverage, 4),
                                        format_fixed(t.complete_coverage, 4)};
    };
    for (const auto& [a, t] : c.per_annotator) csv += csv_row(row(a, t)), md += md_row(row(a, t));
    csv += csv_row(row("any", c.any_annotator));
    md += md_row(row("any", c.any_annotator));

    std::string hcsv = csv_row({"n", "fraction"});
    std::string hmd = "# Activations named by exactly n annotators: " + c.class_id + "\n\n" +
                      detail::md_header({"n", "fraction"});
    for (std::size_t n = 0; n < c.exactly_n_histogram.size(); ++n) {
        const std::vector<std::string> r{std::to_string(n), format_fixed(c.exactly_n_histogram[n], 4)};
        hcsv += csv_row(r);
        hmd += md_row(r);
    }
    return {{"coverage_" + c.class_id + ".csv", csv},
            {"coverage_" + c.class_id + ".md", md},
            {"exactly_n_" + c.class_id + ".csv", hcsv},
            {"exactly_n_" + c.class_id + ".md", hmd}};
}

inline std::vector<ReportDocument> summary_documents(
    const std::string& class_id, const std::map<std::string, std::vector<SummaryRow>>& per_annotator) {
    std::string csv = detail::csv_row({"annotator", "name_set", "count", "percent"});
    std::string md = "# Explanation summary: " + class_id + "\n\n" +
                     detail::md_header({"annotator", "visual concept combinations"});
    for (const auto& [annotator, rows] : per_annotator) {
        std::string line;
        for (const auto& row : rows) {
            std::string names;
            for (std::size_t i = 0; i < row.name_set.size(); ++i) names += (i ? ";" : "") + row.name_set[i];
            csv += detail::csv_row({annotator, names, std::to_string(row.count), format_fixed(row.percent, 4)});
            if (!line.empty()) line += " , ";
            line += render_summary_row(row);
        }
        md += detail::md_row({annotator, line});
    }
    return {{"summary_" + class_id + ".csv", csv}, {"summary_" + class_id + ".md", md}};
}

inline std::vector<ReportDocument> purity_tables(const AnalysisResults& r) {
    std::vector<ReportDocument> out;
    detail::purity_documents("cx_purity", "CX-purity (concept to X-feature)", r.categories, r.cx_purity, out);
    detail::purity_documents("xc_purity", "XC-purity (X-feature to concept)", r.categories, r.xc_purity, out);
    return out;
}

inline std::vector<ReportDocument> agreement_tables(const AnalysisResults& r) {
    std::vector<ReportDocument> out;
    detail::pairwise_documents("agreement", "Pairwise agreement",
                               {{"agreement_d1", &PairScores::agreement_d1},
                                {"agreement_d2", &PairScores::agreement_d2},
                                {"jaccard", &PairScores::jaccard}},
                               r, out);
    return out;
}

inline std::vector<ReportDocument> compatibility_tables(const AnalysisResults& r) {
    std::vector<ReportDocument> out;
    detail::pairwise_documents("compatibility", "Linguistic compatibility of matched concepts",
                               {{"exact_d1", &PairScores::exact_d1},
                                {"exact_d2", &PairScores::exact_d2},
                                {"subset_d1", &PairScores::subset_d1},
                                {"subset_d2", &PairScores::subset_d2}},
                               r, out);
    return out;
}

inline std::vector<ReportDocument> emit_tables(const AnalysisResults& r) {
    std::vector<ReportDocument> out;
    for (const auto& cat : r.categories) {
        if (auto it = r.coverage.find(cat); it != r.coverage.end())
            for (auto& d : coverage_documents(it->second)) out.push_back(std::move(d));
        if (auto it = r.summaries.find(cat); it != r.summaries.end())
            for (auto& d : summary_documents(cat, it->second)) out.push_back(std::move(d));
    }
    for (auto* tables : {&purity_tables, &agreement_tables, &compatibility_tables})
        for (auto& d : tables(r)) out.push_back(std::move(d));
    return out;
}

} // namespace naminglab
