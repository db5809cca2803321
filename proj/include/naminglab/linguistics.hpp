#pragma once

// Concept-name normalization and exact/subset compatibility of matched concepts.

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "naminglab/core.hpp"
#include "naminglab/matching.hpp"

namespace naminglab {

using TermSet = std::set<std::string>;

enum class CompatMode { exact, subset };

inline const char* to_string(CompatMode m) { return m == CompatMode::exact ? "exact" : "subset"; }

class Lexicon {
public:
    // {beak, nose} plus the stopwords "and", "of", "the", "at".
    static Lexicon defaults() { return Lexicon({{"beak", "nose"}}, {"and", "of", "the", "at"}); }

    Lexicon() = default;

    Lexicon(std::vector<std::set<std::string>> groups, std::set<std::string> stopwords)
        : groups_(std::move(groups)), stopwords_(std::move(stopwords)) {
        for (const auto& g : groups_) {
            if (g.empty()) throw LexiconError("empty synonym group");
            for (const auto& t : g) {
                if (t.empty() || t.find_first_of(" \t/,") != std::string::npos)
                    throw LexiconError("synonym term '" + t + "' must be a single token");
                if (stopwords_.contains(t)) throw LexiconError("synonym term '" + t + "' is a stopword");
                if (!canonical_.emplace(t, *g.begin()).second)
                    throw LexiconError("term '" + t + "' appears in more than one synonym group");
            }
        }
    }

    const std::vector<std::set<std::string>>& synonym_groups() const { return groups_; }
    const std::set<std::string>& stopwords() const { return stopwords_; }

    bool is_stopword(const std::string& t) const { return stopwords_.contains(t); }

    // Lexicographically least member of the token's synonym group, or the token itself.
    const std::string& canonical(const std::string& t) const {
        auto it = canonical_.find(t);
        return it == canonical_.end() ? t : it->second;
    }

private:
    std::vector<std::set<std::string>> groups_;
    std::set<std::string> stopwords_;
    std::map<std::string, std::string> canonical_;
};

namespace detail {

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool is_separator(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == ',';
}

inline std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_separator(c)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace detail

// Lexicon file:
//   [synonyms]   one group per line, comma-separated
//   [stopwords]  comma- or whitespace-separated terms; replaces the defaults when present
// Blank lines and lines starting with '#' are ignored.
inline Lexicon parse_lexicon(const std::string& text) {
    std::vector<std::set<std::string>> groups;
    std::set<std::string> stopwords;
    bool saw_stopwords = false;
    enum class Section { none, synonyms, stopwords } section = Section::none;

    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            const std::string name = detail::lowercase(line);
            if (name == "[synonyms]") section = Section::synonyms;
            else if (name == "[stopwords]") section = Section::stopwords, saw_stopwords = true;
            else throw LexiconError("line " + std::to_string(lineno) + ": unknown section " + line);
            continue;
        }
        switch (section) {
        case Section::none:
            throw LexiconError("line " + std::to_string(lineno) + ": entry outside a section");
        case Section::synonyms: {
            std::set<std::string> group;
            std::stringstream ss(line);
            std::string term;
            while (std::getline(ss, term, ',')) {
                term = detail::lowercase(detail::trim(term));
                if (!term.empty()) group.insert(term);
            }
            if (group.size() >= 2) groups.push_back(std::move(group));
            break;
        }
        case Section::stopwords:
            for (auto& t : detail::tokenize(detail::lowercase(line))) stopwords.insert(t);
            break;
        }
    }
    if (!saw_stopwords) stopwords = Lexicon::defaults().stopwords();
    return Lexicon(std::move(groups), std::move(stopwords));
}

inline Lexicon load_lexicon(const std::string& path) { return parse_lexicon(read_file(path)); }

inline TermSet normalize_name(std::string_view name, const Lexicon& lex) {
    TermSet out;
    for (auto& tok : detail::tokenize(detail::lowercase(name)))
        if (!lex.is_stopword(tok)) out.insert(lex.canonical(tok));
    if (out.empty())
        throw EmptyAfterNormalization("name '" + std::string(name) + "' has no content words");
    return out;
}

inline bool exact_compatible(const TermSet& a, const TermSet& b) { return a == b; }

inline bool subset_compatible(const TermSet& a, const TermSet& b) {
    return std::includes(a.begin(), a.end(), b.begin(), b.end()) ||
           std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool compatible(const TermSet& a, const TermSet& b, CompatMode mode) {
    return mode == CompatMode::exact ? exact_compatible(a, b) : subset_compatible(a, b);
}

// Weight of intra-family edges whose endpoint names are compatible, over the weight of all
// intra-family edges. Edges touching a concept with no usable name count as incompatible.
inline double compatibility_score(const DFamilyPartition& p, const IntersectionGraph& g,
                                  const Naming& a, const Naming& b, CompatMode mode,
                                  const Lexicon& lex) {
    auto terms_of = [&](const Naming& n, const std::vector<std::string>& ids) {
        std::vector<std::optional<TermSet>> out;
        for (const auto& id : ids) {
            const auto* c = n.find_concept(id);
            if (!c) throw MismatchedKeys("concept " + id + " not found in naming of " + n.annotator_id);
            try {
                out.emplace_back(normalize_name(c->name, lex));
            } catch (const EmptyAfterNormalization&) {
                out.emplace_back(std::nullopt);
            }
        }
        return out;
    };
    const auto lt = terms_of(a, g.left);
    const auto rt = terms_of(b, g.right);

    std::vector<std::ptrdiff_t> fam_l(g.left.size(), -1), fam_r(g.right.size(), -1);
    for (std::size_t k = 0; k < p.families.size(); ++k) {
        for (auto i : p.families[k].left) fam_l.at(i) = static_cast<std::ptrdiff_t>(k);
        for (auto j : p.families[k].right) fam_r.at(j) = static_cast<std::ptrdiff_t>(k);
    }

    Weight total = 0, good = 0;
    for (const auto& e : g.edges) {
        if (fam_l[e.left] < 0 || fam_l[e.left] != fam_r[e.right]) continue;
        total += e.weight;
        if (lt[e.left] && rt[e.right] && compatible(*lt[e.left], *rt[e.right], mode)) good += e.weight;
    }
    if (total == 0) throw ZeroTotalWeight("partition has no intra-family edge weight");
    return static_cast<double>(good) / static_cast<double>(total);
}

inline double compatibility_score(const DFamilyPartition& p, const Naming& a, const Naming& b,
                                  CompatMode mode, const Lexicon& lex) {
    return compatibility_score(p, build_intersection_graph(a, b), a, b, mode, lex);
}

} // namespace naminglab
