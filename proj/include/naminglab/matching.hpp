#pragma once

// Intersection graphs between two namings and D-family matchings over them.
//
// A D-family matching partitions every concept node of the bipartite intersection graph
// into families whose induced subgraph has hop diameter <= D, maximising the total weight
// of edges inside families. In a bipartite graph a family of diameter <= 2 is exactly a
// complete bipartite block (or a singleton), and diameter <= 1 is a single edge, so D = 1
// is maximum-weight matching.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "naminglab/core.hpp"
#include "naminglab/hungarian.hpp"

namespace naminglab {

using Weight = std::int64_t;

struct Edge {
    std::size_t left = 0;
    std::size_t right = 0;
    Weight weight = 0;

    bool operator==(const Edge&) const = default;
};

struct IntersectionGraph {
    std::vector<std::string> left;  // concept ids of the first naming, sorted
    std::vector<std::string> right; // concept ids of the second naming, sorted
    std::vector<Edge> edges;        // weight > 0, ordered by (left, right)

    bool operator==(const IntersectionGraph&) const = default;

    std::size_t node_count() const { return left.size() + right.size(); }

    std::vector<std::vector<Weight>> weight_matrix() const {
        std::vector<std::vector<Weight>> m(left.size(), std::vector<Weight>(right.size(), 0));
        for (const auto& e : edges) m[e.left][e.right] = e.weight;
        return m;
    }

    Weight total_weight() const {
        Weight t = 0;
        for (const auto& e : edges) t += e.weight;
        return t;
    }
};

// Builds a graph directly from a dense weight matrix; zero entries produce no edge.
inline IntersectionGraph graph_from_matrix(const std::vector<std::vector<Weight>>& w,
                                           std::size_t right_count) {
    IntersectionGraph g;
    for (std::size_t i = 0; i < w.size(); ++i) g.left.push_back("L" + std::to_string(i));
    for (std::size_t j = 0; j < right_count; ++j) g.right.push_back("R" + std::to_string(j));
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w[i].size() && j < right_count; ++j)
            if (w[i][j] > 0) g.edges.push_back({i, j, w[i][j]});
    return g;
}

inline IntersectionGraph build_intersection_graph(const Naming& a, const Naming& b) {
    auto sorted = [](const Naming& n) {
        std::vector<const VisualConcept*> v;
        for (const auto& c : n.concepts) v.push_back(&c);
        std::sort(v.begin(), v.end(),
                  [](const auto* x, const auto* y) { return x->concept_id < y->concept_id; });
        return v;
    };
    const auto lc = sorted(a);
    const auto rc = sorted(b);
    IntersectionGraph g;
    for (const auto* c : lc) g.left.push_back(c->concept_id);
    for (const auto* c : rc) g.right.push_back(c->concept_id);
    for (std::size_t i = 0; i < lc.size(); ++i) {
        for (std::size_t j = 0; j < rc.size(); ++j) {
            Weight w = 0;
            for (const auto& m : lc[i]->members) w += rc[j]->members.contains(m) ? 1 : 0;
            if (w > 0) g.edges.push_back({i, j, w});
        }
    }
    return g;
}

inline IntersectionGraph transpose(const IntersectionGraph& g) {
    IntersectionGraph t{g.right, g.left, {}};
    for (const auto& e : g.edges) t.edges.push_back({e.right, e.left, e.weight});
    std::sort(t.edges.begin(), t.edges.end(), [](const Edge& x, const Edge& y) {
        return std::pair(x.left, x.right) < std::pair(y.left, y.right);
    });
    return t;
}

struct Family {
    std::vector<std::size_t> left;  // indices into IntersectionGraph::left, ascending
    std::vector<std::size_t> right; // indices into IntersectionGraph::right, ascending

    bool operator==(const Family&) const = default;
    std::size_t size() const { return left.size() + right.size(); }
};

struct DFamilyPartition {
    int D = 1;
    std::vector<Family> families;
    Weight score = 0;
    bool exact = true;

    bool operator==(const DFamilyPartition&) const = default;
};

inline DFamilyPartition transpose(const DFamilyPartition& p) {
    DFamilyPartition t = p;
    for (auto& f : t.families) std::swap(f.left, f.right);
    return t;
}

// Sum of edge weights with both endpoints inside the family.
inline Weight family_weight(const IntersectionGraph& g, const Family& f) {
    Weight w = 0;
    for (const auto& e : g.edges)
        if (std::binary_search(f.left.begin(), f.left.end(), e.left) &&
            std::binary_search(f.right.begin(), f.right.end(), e.right))
            w += e.weight;
    return w;
}

inline Weight partition_score(const IntersectionGraph& g, const std::vector<Family>& families) {
    Weight s = 0;
    for (const auto& f : families) s += family_weight(g, f);
    return s;
}

// Hop diameter of the subgraph induced by the family; nullopt when it is disconnected.
inline std::optional<int> family_diameter(const IntersectionGraph& g, const Family& f) {
    const std::size_t n = f.size();
    if (n <= 1) return 0;
    // local ids: left members first, then right members
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : g.edges) {
        auto li = std::lower_bound(f.left.begin(), f.left.end(), e.left);
        auto ri = std::lower_bound(f.right.begin(), f.right.end(), e.right);
        if (li == f.left.end() || *li != e.left || ri == f.right.end() || *ri != e.right) continue;
        const std::size_t a = static_cast<std::size_t>(li - f.left.begin());
        const std::size_t b = f.left.size() + static_cast<std::size_t>(ri - f.right.begin());
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    int diameter = 0;
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<int> dist(n, -1);
        std::queue<std::size_t> q;
        dist[s] = 0;
        q.push(s);
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (auto v : adj[u])
                if (dist[v] < 0) dist[v] = dist[u] + 1, q.push(v);
        }
        for (int d : dist) {
            if (d < 0) return std::nullopt;
            diameter = std::max(diameter, d);
        }
    }
    return diameter;
}

// Families cover every node exactly once and each has diameter <= D.
inline std::vector<std::string> partition_violations(const IntersectionGraph& g,
                                                     const DFamilyPartition& p) {
    std::vector<std::string> out;
    std::vector<int> seen_l(g.left.size(), 0), seen_r(g.right.size(), 0);
    for (std::size_t k = 0; k < p.families.size(); ++k) {
        const auto& f = p.families[k];
        if (f.size() == 0) out.push_back("family " + std::to_string(k) + " is empty");
        for (auto i : f.left) {
            if (i >= g.left.size()) out.push_back("family " + std::to_string(k) + ": bad left index");
            else ++seen_l[i];
        }
        for (auto j : f.right) {
            if (j >= g.right.size()) out.push_back("family " + std::to_string(k) + ": bad right index");
            else ++seen_r[j];
        }
        if (!std::is_sorted(f.left.begin(), f.left.end()) || !std::is_sorted(f.right.begin(), f.right.end()))
            out.push_back("family " + std::to_string(k) + ": indices not sorted");
        else if (auto d = family_diameter(g, f); !d || *d > p.D)
            out.push_back("family " + std::to_string(k) + ": diameter exceeds " + std::to_string(p.D));
    }
    for (std::size_t i = 0; i < seen_l.size(); ++i)
        if (seen_l[i] != 1) out.push_back("left node " + g.left[i] + " covered " + std::to_string(seen_l[i]) + " times");
    for (std::size_t j = 0; j < seen_r.size(); ++j)
        if (seen_r[j] != 1) out.push_back("right node " + g.right[j] + " covered " + std::to_string(seen_r[j]) + " times");
    if (out.empty() && partition_score(g, p.families) != p.score) out.push_back("score does not match families");
    return out;
}

namespace detail {

inline void canonicalize(std::vector<Family>& families, std::size_t left_count) {
    for (auto& f : families) {
        std::sort(f.left.begin(), f.left.end());
        std::sort(f.right.begin(), f.right.end());
    }
    std::erase_if(families, [](const Family& f) { return f.size() == 0; });
    auto key = [&](const Family& f) {
        return f.left.empty() ? left_count + f.right.front() : f.left.front();
    };
    std::sort(families.begin(), families.end(),
              [&](const Family& a, const Family& b) { return key(a) < key(b); });
}

// Every node not placed in `families` becomes a singleton.
inline void add_singletons(const IntersectionGraph& g, std::vector<Family>& families) {
    std::vector<char> ul(g.left.size(), 0), ur(g.right.size(), 0);
    for (const auto& f : families) {
        for (auto i : f.left) ul[i] = 1;
        for (auto j : f.right) ur[j] = 1;
    }
    for (std::size_t i = 0; i < ul.size(); ++i)
        if (!ul[i]) families.push_back({{i}, {}});
    for (std::size_t j = 0; j < ur.size(); ++j)
        if (!ur[j]) families.push_back({{}, {j}});
}

} // namespace detail

namespace detail {

inline Weight assignment_value(const std::vector<std::vector<Weight>>& w) {
    const auto a = max_weight_assignment(w);
    Weight s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] >= 0) s += std::max<Weight>(0, w[i][static_cast<std::size_t>(a[i])]);
    return s;
}

// Among maximum-weight matchings, the one that gives each left node in turn the smallest
// right node still compatible with the optimum (unmatched last).
inline std::vector<int> lexicographic_assignment(std::vector<std::vector<Weight>> w) {
    const std::size_t rows = w.size();
    const std::size_t cols = rows ? w[0].size() : 0;
    const Weight best = assignment_value(w);
    Weight big = 1;
    for (const auto& r : w)
        for (auto x : r) big += std::max<Weight>(0, x);

    auto pin = [&](std::vector<std::vector<Weight>>& m, std::size_t i, std::size_t j) {
        for (std::size_t k = 0; k < cols; ++k)
            if (k != j) m[i][k] = 0;
        for (std::size_t k = 0; k < rows; ++k)
            if (k != i) m[k][j] = 0;
    };
    std::vector<int> out(rows, -1);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols && out[i] < 0; ++j) {
            if (w[i][j] <= 0) continue;
            auto trial = w;
            pin(trial, i, j);
            trial[i][j] += big;
            if (assignment_value(trial) - big == best) {
                pin(w, i, j);
                out[i] = static_cast<int>(j);
            }
        }
        if (out[i] < 0) std::fill(w[i].begin(), w[i].end(), 0);
    }
    return out;
}

} // namespace detail

// D = 1: maximum-weight bipartite matching via the Hungarian method. Always exact. Ties go
// lexicographically by (left index, right index).
inline DFamilyPartition max_weight_matching(const IntersectionGraph& g) {
    const auto w = g.weight_matrix();
    const auto assignment = detail::lexicographic_assignment(w);
    DFamilyPartition p;
    p.D = 1;
    p.exact = true;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const int j = assignment[i];
        if (j >= 0 && w[i][static_cast<std::size_t>(j)] > 0) {
            p.families.push_back({{i}, {static_cast<std::size_t>(j)}});
            p.score += w[i][static_cast<std::size_t>(j)];
        }
    }
    detail::add_singletons(g, p.families);
    detail::canonicalize(p.families, g.left.size());
    return p;
}

struct Budget {
    std::size_t max_exact_nodes = 40;     // larger graphs go straight to the heuristic
    std::size_t max_work = 20'000'000;    // candidate families examined before giving up
};

namespace detail {

struct BudgetExceeded {};

// Exact D = 2 search over complete bipartite families, memoised on the set of remaining
// nodes. Nodes are numbered left first (0..L-1) then right (L..L+R-1).
class ExactFamilySolver {
public:
    ExactFamilySolver(const IntersectionGraph& g, std::size_t max_work)
        : g_(g), n_(g.node_count()), max_work_(max_work), adj_(n_, 0),
          w_(n_, std::vector<Weight>(n_, 0)) {
        for (const auto& e : g.edges) {
            const std::size_t a = e.left, b = g.left.size() + e.right;
            adj_[a] |= bit(b);
            adj_[b] |= bit(a);
            w_[a][b] = w_[b][a] = e.weight;
        }
    }

    std::vector<Family> solve() {
        std::vector<Family> families;
        std::uint64_t unvisited = n_ == 64 ? ~0ULL : (bit(n_) - 1);
        while (unvisited) {
            const std::uint64_t comp = component(static_cast<std::size_t>(std::countr_zero(unvisited)));
            unvisited &= ~comp;
            best(comp);
            for (std::uint64_t mask = comp; mask;) {
                const std::uint64_t fam = memo_.at(mask).family;
                families.push_back(to_family(fam));
                mask &= ~fam;
            }
        }
        return families;
    }

private:
    struct Entry {
        Weight value;
        std::uint64_t family;
    };

    static std::uint64_t bit(std::size_t i) { return 1ULL << i; }
    bool is_left(std::size_t v) const { return v < g_.left.size(); }

    std::uint64_t component(std::size_t start) const {
        std::uint64_t seen = bit(start), frontier = bit(start);
        while (frontier) {
            const auto v = static_cast<std::size_t>(std::countr_zero(frontier));
            frontier &= frontier - 1;
            const std::uint64_t fresh = adj_[v] & ~seen;
            seen |= fresh;
            frontier |= fresh;
        }
        return seen;
    }

    Family to_family(std::uint64_t fam) const {
        Family f;
        for (; fam; fam &= fam - 1) {
            const auto v = static_cast<std::size_t>(std::countr_zero(fam));
            if (is_left(v)) f.left.push_back(v);
            else f.right.push_back(v - g_.left.size());
        }
        return f;
    }

    Weight cross_weight(std::uint64_t a, std::uint64_t b) const {
        Weight w = 0;
        for (; a; a &= a - 1) {
            const auto u = static_cast<std::size_t>(std::countr_zero(a));
            for (std::uint64_t c = b; c; c &= c - 1) w += w_[u][static_cast<std::size_t>(std::countr_zero(c))];
        }
        return w;
    }

    Weight best(std::uint64_t mask) {
        if (mask == 0) return 0;
        if (auto it = memo_.find(mask); it != memo_.end()) return it->second.value;

        const auto v = static_cast<std::size_t>(std::countr_zero(mask));
        const std::uint64_t vb = bit(v);
        Entry e{best(mask & ~vb), vb};

        // Families {v} + same-side companions + a non-empty set of opposite-side nodes,
        // with every cross pair adjacent.
        const std::uint64_t opposite = adj_[v] & mask;
        for (std::uint64_t other = opposite; other; other = (other - 1) & opposite) {
            std::uint64_t same = mask;
            for (std::uint64_t o = other; o; o &= o - 1)
                same &= adj_[static_cast<std::size_t>(std::countr_zero(o))];
            same &= ~vb;
            for (std::uint64_t extra = same;; extra = (extra - 1) & same) {
                if (++work_ > max_work_) throw BudgetExceeded{};
                const std::uint64_t side = extra | vb;
                const std::uint64_t fam = side | other;
                const Weight value = cross_weight(side, other) + best(mask & ~fam);
                if (value > e.value) e = {value, fam};
                if (extra == 0) break;
            }
        }
        memo_.emplace(mask, e);
        return e.value;
    }

    const IntersectionGraph& g_;
    std::size_t n_;
    std::size_t max_work_;
    std::size_t work_ = 0;
    std::vector<std::uint64_t> adj_;
    std::vector<std::vector<Weight>> w_;
    std::unordered_map<std::uint64_t, Entry> memo_;
};

// Diameter <= 2 validity for the heuristic: a star (or a single edge or singleton) whose
// centre is adjacent to every leaf.
inline bool is_star(const std::vector<std::vector<Weight>>& w, const Family& f) {
    if (f.size() <= 1) return true;
    if (f.left.empty() || f.right.empty()) return false;
    if (f.left.size() > 1 && f.right.size() > 1) return false;
    for (auto i : f.left)
        for (auto j : f.right)
            if (w[i][j] <= 0) return false;
    return true;
}

inline Weight weight_to(const std::vector<std::vector<Weight>>& w, bool node_left, std::size_t node,
                        const Family& f) {
    Weight s = 0;
    if (node_left) for (auto j : f.right) s += w[node][j];
    else for (auto i : f.left) s += w[i][node];
    return s;
}

inline Family with_node(Family f, bool node_left, std::size_t node) {
    auto& side = node_left ? f.left : f.right;
    side.insert(std::upper_bound(side.begin(), side.end(), node), node);
    return f;
}

inline Family without_node(Family f, bool node_left, std::size_t node) {
    auto& side = node_left ? f.left : f.right;
    side.erase(std::find(side.begin(), side.end(), node));
    return f;
}

inline Family merged(const Family& a, const Family& b) {
    Family f = a;
    f.left.insert(f.left.end(), b.left.begin(), b.left.end());
    f.right.insert(f.right.end(), b.right.begin(), b.right.end());
    std::sort(f.left.begin(), f.left.end());
    std::sort(f.right.begin(), f.right.end());
    return f;
}

} // namespace detail

// D = 2 heuristic: start from the D = 1 optimum, greedily attach singletons to the
// neighbouring family with the largest gain, then apply the best improving move
// (one node to another family, or merge two families) until none improves the score.
// Families are kept as stars. Never scores below the D = 1 optimum it is seeded with.
inline DFamilyPartition d2_heuristic(const IntersectionGraph& g) {
    const auto w = g.weight_matrix();
    auto families = max_weight_matching(g).families;

    // Greedy attachment of singletons.
    for (;;) {
        Weight best_gain = 0;
        std::size_t best_from = 0, best_to = 0;
        for (std::size_t s = 0; s < families.size(); ++s) {
            if (families[s].size() != 1) continue;
            const bool nl = !families[s].left.empty();
            const std::size_t node = nl ? families[s].left[0] : families[s].right[0];
            for (std::size_t k = 0; k < families.size(); ++k) {
                if (k == s || families[k].size() < 2) continue;
                const Weight gain = detail::weight_to(w, nl, node, families[k]);
                if (gain > best_gain && detail::is_star(w, detail::with_node(families[k], nl, node)))
                    best_gain = gain, best_from = s, best_to = k;
            }
        }
        if (best_gain <= 0) break;
        families[best_to] = detail::merged(families[best_to], families[best_from]);
        families.erase(families.begin() + static_cast<std::ptrdiff_t>(best_from));
    }

    // Steepest-ascent local search.
    for (;;) {
        Weight best_delta = 0;
        enum class Kind { None, Move, Merge } kind = Kind::None;
        std::size_t a = 0, b = 0, node = 0;
        bool node_left = false;

        for (std::size_t k = 0; k < families.size(); ++k) {
            for (int side = 0; side < 2; ++side) {
                const bool nl = side == 0;
                for (auto u : nl ? families[k].left : families[k].right) {
                    const Family rest = detail::without_node(families[k], nl, u);
                    if (!detail::is_star(w, rest)) continue;
                    const Weight loss = detail::weight_to(w, nl, u, families[k]);
                    for (std::size_t t = 0; t < families.size(); ++t) {
                        if (t == k) continue;
                        const Weight gain = detail::weight_to(w, nl, u, families[t]);
                        if (!detail::is_star(w, detail::with_node(families[t], nl, u))) continue;
                        if (gain - loss > best_delta)
                            best_delta = gain - loss, kind = Kind::Move, a = k, b = t, node = u, node_left = nl;
                    }
                }
            }
        }
        for (std::size_t k = 0; k < families.size(); ++k) {
            for (std::size_t t = k + 1; t < families.size(); ++t) {
                const Family m = detail::merged(families[k], families[t]);
                if (!detail::is_star(w, m)) continue;
                const Weight delta = family_weight(g, m) - family_weight(g, families[k]) -
                                     family_weight(g, families[t]);
                if (delta > best_delta) best_delta = delta, kind = Kind::Merge, a = k, b = t;
            }
        }
        if (kind == Kind::None) break;
        if (kind == Kind::Move) {
            families[a] = detail::without_node(families[a], node_left, node);
            families[b] = detail::with_node(families[b], node_left, node);
        } else {
            families[a] = detail::merged(families[a], families[b]);
            families.erase(families.begin() + static_cast<std::ptrdiff_t>(b));
        }
        std::erase_if(families, [](const Family& f) { return f.size() == 0; });
    }
    DFamilyPartition p;
    p.D = 2;
    p.exact = false;
    detail::canonicalize(families, g.left.size());
    p.families = std::move(families);
    p.score = partition_score(g, p.families);
    return p;
}

// Exact D = 2 optimum, or nullopt when the search exceeds the budget.
inline std::optional<DFamilyPartition> d2_exact(const IntersectionGraph& g, const Budget& budget = {}) {
    if (g.node_count() > std::min<std::size_t>(budget.max_exact_nodes, 64)) return std::nullopt;
    try {
        DFamilyPartition p;
        p.D = 2;
        p.exact = true;
        p.families = detail::ExactFamilySolver(g, budget.max_work).solve();
        detail::canonicalize(p.families, g.left.size());
        p.score = partition_score(g, p.families);
        return p;
    } catch (const detail::BudgetExceeded&) {
        return std::nullopt;
    }
}

inline DFamilyPartition d_family_matching(const IntersectionGraph& g, int D, const Budget& budget = {}) {
    if (D == 1) return max_weight_matching(g);
    if (D != 2) throw UnsupportedD("D-family matching supports D = 1 or 2, got " + std::to_string(D));
    if (auto exact = d2_exact(g, budget)) return *exact;
    return d2_heuristic(g);
}

// Fraction of activations named by both annotators that the matching translates.
inline double agreement_score(const DFamilyPartition& p, const Naming& a, const Naming& b) {
    const auto na = named_set(a);
    std::size_t common = 0;
    for (const auto& c : b.concepts)
        for (const auto& m : c.members) common += na.contains(m) ? 1 : 0;
    if (common == 0)
        throw NoCommonActivations("annotators " + a.annotator_id + " and " + b.annotator_id +
                                  " share no named activation");
    return static_cast<double>(p.score) / static_cast<double>(common);
}

// Partition result document with the per-edge breakdown.
inline json to_json(const DFamilyPartition& p, const IntersectionGraph& g) {
    std::vector<std::ptrdiff_t> fam_l(g.left.size(), -1), fam_r(g.right.size(), -1);
    json families = json::array();
    for (std::size_t k = 0; k < p.families.size(); ++k) {
        const auto& f = p.families[k];
        json left = json::array(), right = json::array();
        for (auto i : f.left) left.push_back(g.left[i]), fam_l[i] = static_cast<std::ptrdiff_t>(k);
        for (auto j : f.right) right.push_back(g.right[j]), fam_r[j] = static_cast<std::ptrdiff_t>(k);
        families.push_back({{"left", left}, {"right", right}, {"weight", family_weight(g, f)}});
    }
    json edges = json::array();
    for (const auto& e : g.edges) {
        const bool internal = fam_l[e.left] >= 0 && fam_l[e.left] == fam_r[e.right];
        json je = {{"left", g.left[e.left]}, {"right", g.right[e.right]}, {"weight", e.weight},
                   {"internal", internal}};
        je["family"] = internal ? json(fam_l[e.left]) : json(nullptr);
        edges.push_back(std::move(je));
    }
    return {{"D", p.D}, {"score", p.score}, {"exact", p.exact}, {"families", std::move(families)},
            {"edges", std::move(edges)}};
}

} // namespace naminglab
