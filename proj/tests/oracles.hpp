#pragma once

// Brute-force reference solutions. Deliberately independent of the library's algorithms:
// plain enumeration over subsets, matchings and set partitions.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

// Minimal-cardinality subset of feature indices with sum >= threshold * positive total.
// Among minimal subsets: largest sum, then lexicographically smallest index list.
inline std::vector<int> minimal_subset(const std::vector<double>& c, double threshold) {
    const int n = static_cast<int>(c.size());
    double total = 0.0;
    for (double v : c)
        if (v > 0) total += v;
    std::vector<int> best;
    int best_card = n + 1;
    double best_sum = -1e300;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> ids;
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) ids.push_back(i), sum += c[static_cast<std::size_t>(i)];
        if (sum < threshold * total - 1e-12 * total) continue;
        const int card = static_cast<int>(ids.size());
        if (card < best_card || (card == best_card && (sum > best_sum || (sum == best_sum && ids < best))))
            best = ids, best_card = card, best_sum = sum;
    }
    return best;
}

using Matrix = std::vector<std::vector<std::int64_t>>;

// Maximum total weight over all matchings, by recursion over left rows.
inline std::int64_t max_matching(const Matrix& w, std::size_t cols) {
    std::vector<char> used(cols, 0);
    std::function<std::int64_t(std::size_t)> rec = [&](std::size_t i) -> std::int64_t {
        if (i == w.size()) return 0;
        std::int64_t best = rec(i + 1); // row i unmatched
        for (std::size_t j = 0; j < cols; ++j) {
            if (used[j] || w[i][j] <= 0) continue;
            used[j] = 1;
            best = std::max(best, w[i][j] + rec(i + 1));
            used[j] = 0;
        }
        return best;
    };
    return rec(0);
}

// Nodes 0..L-1 are left, L..L+R-1 right. Returns hop diameter of the induced subgraph,
// or -1 when it is disconnected.
inline int block_diameter(const Matrix& w, std::size_t L, const std::vector<std::size_t>& block) {
    auto adjacent = [&](std::size_t a, std::size_t b) {
        if (a < L && b >= L) return w[a][b - L] > 0;
        if (b < L && a >= L) return w[b][a - L] > 0;
        return false;
    };
    int diameter = 0;
    for (std::size_t s = 0; s < block.size(); ++s) {
        std::vector<int> dist(block.size(), -1);
        std::queue<std::size_t> q;
        dist[s] = 0;
        q.push(s);
        while (!q.empty()) {
            auto u = q.front();
            q.pop();
            for (std::size_t v = 0; v < block.size(); ++v)
                if (dist[v] < 0 && adjacent(block[u], block[v])) dist[v] = dist[u] + 1, q.push(v);
        }
        for (int d : dist) {
            if (d < 0) return -1;
            diameter = std::max(diameter, d);
        }
    }
    return diameter;
}

// Best D-family score by enumerating every set partition (restricted growth strings).
inline std::int64_t best_family_partition(const Matrix& w, std::size_t cols, int D) {
    const std::size_t L = w.size();
    const std::size_t n = L + cols;
    if (n == 0) return 0;
    std::vector<std::size_t> label(n, 0);
    std::int64_t best = 0;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t blocks) {
        if (i == n) {
            std::vector<std::vector<std::size_t>> parts(blocks);
            for (std::size_t v = 0; v < n; ++v) parts[label[v]].push_back(v);
            std::int64_t score = 0;
            for (const auto& p : parts) {
                const int d = block_diameter(w, L, p);
                if (d < 0 || d > D) return;
                for (auto a : p)
                    for (auto b : p)
                        if (a < L && b >= L) score += w[a][b - L];
            }
            best = std::max(best, score);
            return;
        }
        for (std::size_t k = 0; k <= blocks; ++k) {
            label[i] = k;
            rec(i + 1, std::max(blocks, k + 1));
        }
    };
    rec(0, 0);
    return best;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int max_w,
                            double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> wd(1, max_w);
    Matrix m(rows, std::vector<std::int64_t>(cols, 0));
    for (auto& r : m)
        for (auto& x : r)
            if (u(rng) < density) x = wd(rng);
    return m;
}

} // namespace oracle
