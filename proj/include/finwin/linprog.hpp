#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace finwin::lp {

struct Result {
    double value = 0.0;
    std::vector<double> x;
};

/// Dense primal simplex for: maximize c.x subject to A x <= b, x >= 0, with
/// b >= 0 so the all-slack basis is feasible. Dantzig pricing with a switch
/// to Bland's rule after a stall budget, which guarantees termination on the
/// highly degenerate problems produced by the metric encodings (most right
/// hand sides are zero).
inline Result simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                          const std::vector<double>& c) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    constexpr double kEps = 1e-11;

    // Tableau rows: m constraint rows + objective row. Columns: n structural
    // variables, m slacks, RHS.
    const std::size_t cols = n + m + 1;
    std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (A[i].size() != n) throw std::invalid_argument("simplex_max: ragged constraint matrix");
        if (b[i] < 0.0) throw std::invalid_argument("simplex_max: negative right hand side");
        for (std::size_t j = 0; j < n; ++j) t[i][j] = A[i][j];
        t[i][n + i] = 1.0;
        t[i][cols - 1] = b[i];
        basis[i] = n + i;
    }
    for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

    const std::size_t max_iter = 200 * (m + n) + 1000;
    const std::size_t bland_after = 20 * (m + n) + 200;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // entering column
        std::size_t enter = cols - 1;
        if (iter < bland_after) {
            double best = -kEps;
            for (std::size_t j = 0; j + 1 < cols; ++j)
                if (t[m][j] < best) {
                    best = t[m][j];
                    enter = j;
                }
        } else {
            for (std::size_t j = 0; j + 1 < cols; ++j)
                if (t[m][j] < -kEps) {
                    enter = j;
                    break;
                }
        }
        if (enter == cols - 1) break;  // optimal

        // ratio test; ties to the smallest basis label (anti-cycling)
        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] <= kEps) continue;
            const double ratio = t[i][cols - 1] / t[i][enter];
            if (leave == m || ratio < best_ratio - kEps ||
                (ratio < best_ratio + kEps && basis[i] < basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave == m) throw std::runtime_error("simplex_max: unbounded program");

        // pivot
        const double pivot = t[leave][enter];
        for (std::size_t j = 0; j < cols; ++j) t[leave][j] /= pivot;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double factor = t[i][enter];
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[i][j] -= factor * t[leave][j];
        }
        basis[leave] = enter;
    }

    Result r;
    r.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) r.x[basis[i]] = t[i][cols - 1];
    for (std::size_t j = 0; j < n; ++j) r.value += c[j] * r.x[j];
    return r;
}

}  // namespace finwin::lp
