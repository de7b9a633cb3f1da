#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here must stay independent of the library's own computation paths: the BL
// oracles do their own optimization, and expected values are produced by
// plain enumeration.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "finwin/belief.hpp"
#include "finwin/model.hpp"

namespace testutil {

inline std::vector<double> random_prob_vector(std::mt19937& gen, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) {
        x = unit(gen);
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

/// Metric from random points on the plane; the triangle inequality is
/// inherited from the Euclidean distance.
inline finwin::Matrix random_metric(std::mt19937& gen, std::size_t n) {
    std::uniform_real_distribution<double> coord(0.0, 2.0);
    std::vector<std::pair<double, double>> pts(n);
    for (auto& p : pts) p = {coord(gen), coord(gen)};
    finwin::Matrix d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = pts[i].first - pts[j].first;
            const double dy = pts[i].second - pts[j].second;
            d[i][j] = std::sqrt(dx * dx + dy * dy);
            if (i != j && d[i][j] < 1e-3) d[i][j] = 1e-3;  // keep strictly positive
        }
    // re-symmetrize after the floor
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[j][i] = d[i][j];
    return d;
}

inline double bl_norm(const std::vector<double>& f, const finwin::Matrix& d) {
    double sup = 0.0;
    for (double v : f) sup = std::max(sup, std::abs(v));
    double lip = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j)
            lip = std::max(lip, std::abs(f[i] - f[j]) / d[i][j]);
    return sup + lip;
}

/// Grid oracle for the BL distance: coarse-to-fine search over test function
/// values f in [-1,1]^n, each candidate projected to feasibility by scaling
/// with its own BL norm, refined down to resolution 1e-3.
inline double bl_distance_grid(const finwin::Belief& a, const finwin::Belief& b,
                               const finwin::Matrix& d) {
    const std::size_t n = a.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = a[i] - b[i];

    auto objective = [&](const std::vector<double>& f) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += w[i] * f[i];
        const double norm = bl_norm(f, d);
        return norm > 0.0 ? dot / norm : 0.0;
    };

    std::vector<double> best_f(n, 0.0);
    double best = 0.0;
    {
        // coarse pass, step 0.2 over [-1, 1]^n
        const double h = 0.2;
        std::vector<int> digits(n, 0);
        const int levels = static_cast<int>(std::lround(2.0 / h)) + 1;
        std::vector<double> f(n);
        while (true) {
            for (std::size_t i = 0; i < n; ++i) f[i] = -1.0 + h * digits[i];
            const double val = objective(f);
            if (val > best) {
                best = val;
                best_f = f;
            }
            std::size_t k = 0;
            while (k < n && ++digits[k] == levels) digits[k++] = 0;
            if (k == n) break;
        }
    }
    double h = 0.2;
    while (h > 1e-3 / 5.0) {
        const double step = h / 5.0;
        std::vector<int> digits(n, 0);
        std::vector<double> f(n);
        std::vector<double> center = best_f;
        while (true) {
            for (std::size_t i = 0; i < n; ++i) f[i] = center[i] + step * (digits[i] - 10);
            const double val = objective(f);
            if (val > best) {
                best = val;
                best_f = f;
            }
            std::size_t k = 0;
            while (k < n && ++digits[k] == 21) digits[k++] = 0;
            if (k == n) break;
        }
        h = step;
    }
    return best;
}

/// Exact oracle for the BL distance by vertex enumeration of the feasible
/// polytope in the (f, s, l) variables: every vertex is the solution of n+2
/// active constraints; feasible vertices are scored directly.
inline double bl_distance_vertices(const finwin::Belief& a, const finwin::Belief& b,
                                   const finwin::Matrix& d) {
    const std::size_t n = a.size();
    const std::size_t nv = n + 2;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = a[i] - b[i];

    // constraint rows: coef . v <= rhs over v = (f_0..f_{n-1}, s, l)
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(nv, 0.0);
        r[i] = 1.0;
        r[n] = -1.0;
        rows.push_back(r);
        rhs.push_back(0.0);
        r[i] = -1.0;
        rows.push_back(r);
        rhs.push_back(0.0);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            std::vector<double> r(nv, 0.0);
            r[i] = 1.0;
            r[j] = -1.0;
            r[n + 1] = -d[i][j];
            rows.push_back(r);
            rhs.push_back(0.0);
            r[i] = -1.0;
            r[j] = 1.0;
            rows.push_back(r);
            rhs.push_back(0.0);
        }
    {
        std::vector<double> r(nv, 0.0);
        r[n] = 1.0;
        r[n + 1] = 1.0;
        rows.push_back(r);
        rhs.push_back(1.0);
        std::fill(r.begin(), r.end(), 0.0);
        r[n] = -1.0;
        rows.push_back(r);
        rhs.push_back(0.0);
        std::fill(r.begin(), r.end(), 0.0);
        r[n + 1] = -1.0;
        rows.push_back(r);
        rhs.push_back(0.0);
    }

    const std::size_t m = rows.size();
    double best = 0.0;

    // iterate over all size-(n+2) subsets of constraints
    std::vector<std::size_t> idx(nv);
    for (std::size_t i = 0; i < nv; ++i) idx[i] = i;
    auto advance = [&]() {
        std::size_t k = nv;
        while (k > 0) {
            --k;
            if (idx[k] + (nv - k) < m) {
                ++idx[k];
                for (std::size_t j = k + 1; j < nv; ++j) idx[j] = idx[j - 1] + 1;
                return true;
            }
        }
        return false;
    };

    std::vector<std::vector<double>> mat(nv, std::vector<double>(nv + 1, 0.0));
    do {
        for (std::size_t r = 0; r < nv; ++r) {
            for (std::size_t c = 0; c < nv; ++c) mat[r][c] = rows[idx[r]][c];
            mat[r][nv] = rhs[idx[r]];
        }
        // Gaussian elimination with partial pivoting
        bool singular = false;
        for (std::size_t col = 0; col < nv && !singular; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < nv; ++r)
                if (std::abs(mat[r][col]) > std::abs(mat[piv][col])) piv = r;
            if (std::abs(mat[piv][col]) < 1e-9) {
                singular = true;
                break;
            }
            std::swap(mat[piv], mat[col]);
            for (std::size_t r = 0; r < nv; ++r) {
                if (r == col) continue;
                const double factor = mat[r][col] / mat[col][col];
                if (factor == 0.0) continue;
                for (std::size_t c = col; c <= nv; ++c) mat[r][c] -= factor * mat[col][c];
            }
        }
        if (singular) continue;
        std::vector<double> v(nv);
        for (std::size_t r = 0; r < nv; ++r) v[r] = mat[r][nv] / mat[r][r];

        bool feasible = true;
        for (std::size_t r = 0; r < m && feasible; ++r) {
            double lhs = 0.0;
            for (std::size_t c = 0; c < nv; ++c) lhs += rows[r][c] * v[c];
            feasible = lhs <= rhs[r] + 1e-9;
        }
        if (!feasible) continue;
        double val = 0.0;
        for (std::size_t i = 0; i < n; ++i) val += w[i] * v[i];
        best = std::max(best, val);
    } while (advance());
    return best;
}

}  // namespace testutil
