#pragma once

// Kuhn-Munkres (Hungarian) assignment with row/column potentials, O(n^3).

#include <algorithm>
#include <cassert>
#include <concepts>
#include <cstddef>
#include <limits>
#include <vector>

namespace naminglab {

// Maximum-weight assignment on a rows x cols weight matrix (rows need not equal cols).
// Returns, for every row, the assigned column or -1. Missing entries are padded with zero
// weight, so callers that only want positive edges drop zero-weight pairs afterwards.
template <typename W>
    requires std::is_arithmetic_v<W>
std::vector<int> max_weight_assignment(const std::vector<std::vector<W>>& weight) {
    const std::size_t rows = weight.size();
    std::size_t cols = 0;
    for (const auto& r : weight) cols = std::max(cols, r.size());
    const std::size_t n = std::max(rows, cols);
    std::vector<int> result(rows, -1);
    if (n == 0) return result;

    // Minimise cost = -weight over an n x n padded square, 1-based with a virtual column 0.
    auto cost = [&](std::size_t i, std::size_t j) -> W {
        if (i >= rows || j >= weight[i].size()) return W{0};
        return -weight[i][j];
    };

    const W inf = std::numeric_limits<W>::max() / 4;
    std::vector<W> u(n + 1, W{0}), v(n + 1, W{0}), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            W delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const W cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) minv[j] = cur, way[j] = j0;
                if (minv[j] < delta) delta = minv[j], j1 = j;
            }
            assert(j1 != 0);
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) u[p[j]] += delta, v[j] -= delta;
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = p[j];
        if (i >= 1 && i <= rows && j <= cols) result[i - 1] = static_cast<int>(j - 1);
    }
    return result;
}

} // namespace naminglab
