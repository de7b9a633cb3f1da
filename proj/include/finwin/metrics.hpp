#pragma once

#include <cstddef>
#include <vector>

#include "finwin/belief.hpp"
#include "finwin/linprog.hpp"
#include "finwin/model.hpp"

namespace finwin {

/// Bounded-Lipschitz distance between two beliefs under the given state
/// metric, computed as the exact value of the linear program
///
///   maximize   sum_x f[x] (a[x] - b[x])
///   subject to |f[x]|        <= s            for all x
///              |f[x] - f[y]| <= l * d(x, y)  for all x != y
///              s + l <= 1,  s, l >= 0
///
/// which splits ||f||_BL = ||f||_inf + Lip(f) into the budget s + l. Ranges
/// over [0, 2] and never exceeds the total variation distance.
inline double bl_distance(const Belief& a, const Belief& b, const Matrix& metric) {
    const std::size_t n = a.size();
    std::vector<double> w(n);
    bool all_zero = true;
    for (std::size_t x = 0; x < n; ++x) {
        w[x] = a[x] - b[x];
        if (w[x] != 0.0) all_zero = false;
    }
    if (all_zero) return 0.0;

    // Variables: f+ (n), f- (n), s, l. The signed value is f = f+ - f-.
    const std::size_t nv = 2 * n + 2;
    const std::size_t s_col = 2 * n;
    const std::size_t l_col = 2 * n + 1;
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    A.reserve(2 * n + n * (n - 1) + 1);

    for (std::size_t x = 0; x < n; ++x) {
        std::vector<double> row(nv, 0.0);
        row[x] = 1.0;
        row[n + x] = -1.0;
        row[s_col] = -1.0;
        A.push_back(row);          //  f[x] - s <= 0
        rhs.push_back(0.0);
        row[x] = -1.0;
        row[n + x] = 1.0;
        A.push_back(std::move(row));  // -f[x] - s <= 0
        rhs.push_back(0.0);
    }
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = x + 1; y < n; ++y) {
            std::vector<double> row(nv, 0.0);
            row[x] = 1.0;
            row[n + x] = -1.0;
            row[y] = -1.0;
            row[n + y] = 1.0;
            row[l_col] = -metric[x][y];
            A.push_back(row);          //  f[x] - f[y] - l d <= 0
            rhs.push_back(0.0);
            row[x] = -1.0;
            row[n + x] = 1.0;
            row[y] = 1.0;
            row[n + y] = -1.0;
            A.push_back(std::move(row));  //  f[y] - f[x] - l d <= 0
            rhs.push_back(0.0);
        }
    }
    {
        std::vector<double> row(nv, 0.0);
        row[s_col] = 1.0;
        row[l_col] = 1.0;
        A.push_back(std::move(row));  // s + l <= 1
        rhs.push_back(1.0);
    }

    std::vector<double> c(nv, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        c[x] = w[x];
        c[n + x] = -w[x];
    }

    const double value = lp::simplex_max(A, rhs, c).value;
    return value < 0.0 ? 0.0 : value;
}

}  // namespace finwin
