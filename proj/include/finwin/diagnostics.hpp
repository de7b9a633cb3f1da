#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finwin/belief.hpp"
#include "finwin/errors.hpp"
#include "finwin/model.hpp"

namespace finwin {

/// Dobrushin ergodicity coefficient of a row-stochastic matrix: the minimum
/// over row pairs of the summed elementwise row minima (on a finite space the
/// singleton partition attains the defining infimum). A single-row kernel has
/// coefficient 1.
inline double dobrushin(const Matrix& kernel) {
    if (kernel.empty()) throw MalformedKernel("empty kernel");
    const std::size_t cols = kernel[0].size();
    for (const auto& row : kernel) {
        if (row.size() != cols || cols == 0) throw MalformedKernel("ragged kernel");
        double sum = 0.0;
        for (double v : row) {
            if (v < -1e-12 || !std::isfinite(v)) throw MalformedKernel("kernel entry out of range");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw MalformedKernel("kernel row is not normalized");
    }
    if (kernel.size() == 1) return 1.0;

    double best = 1.0;
    for (std::size_t x = 0; x < kernel.size(); ++x)
        for (std::size_t y = x + 1; y < kernel.size(); ++y) {
            double overlap = 0.0;
            for (std::size_t j = 0; j < cols; ++j) overlap += std::min(kernel[x][j], kernel[y][j]);
            best = std::min(best, overlap);
        }
    return best;
}

/// min over actions of the transition kernel's Dobrushin coefficient.
inline double dobrushin_transition_min(const PomdpModel& m) {
    double best = 1.0;
    for (const auto& t : m.transition) best = std::min(best, dobrushin(t));
    return best;
}

/// Filter contraction constant (1 - delta_min(T)) * (2 - delta(Q)); values
/// below 1 give the exponential stability envelope 2 alpha^n.
inline double alpha(const PomdpModel& m) {
    return (1.0 - dobrushin_transition_min(m)) * (2.0 - dobrushin(m.channel));
}

namespace detail {
inline double max_row_ratio(const PomdpModel& m, bool cost_rows) {
    const std::size_t nx = static_cast<std::size_t>(m.n_states);
    double best = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = x + 1; y < nx; ++y) {
            const double d = m.state_metric[x][y];
            if (d <= 0.0) throw DegenerateMetric(x, y);
            for (std::size_t u = 0; u < static_cast<std::size_t>(m.n_actions); ++u) {
                double diff = 0.0;
                if (cost_rows) {
                    diff = std::abs(m.cost[x][u] - m.cost[y][u]);
                } else {
                    for (std::size_t xp = 0; xp < nx; ++xp)
                        diff += std::abs(m.transition[u][x][xp] - m.transition[u][y][xp]);
                }
                best = std::max(best, diff / d);
            }
        }
    return best;
}
}  // namespace detail

/// TV-Lipschitz constant of the transition kernel w.r.t. the state metric:
/// max over actions and state pairs of ||T(.|x,u) - T(.|x',u)||_TV / d(x,x').
inline double alpha_X(const PomdpModel& m) { return detail::max_row_ratio(m, false); }

/// Lipschitz constant of the stage cost w.r.t. the state metric.
inline double alpha_c(const PomdpModel& m) { return detail::max_row_ratio(m, true); }

/// Four interchangeable Lipschitz constants for the belief kernel. The first
/// two bound rho_BL(eta, eta') by a multiple of rho_BL(z, z'); the last two by
/// a multiple of ||z - z'||_TV.
struct AlphaZOptions {
    double bl_plain = 0.0;        // 3 (1 + alpha_X)
    double bl_channel = 0.0;      // (3 - 2 delta(Q)) (1 + alpha_X)
    double tv_plain = 3.0;        // 3
    double tv_channel = 0.0;      // (3 - 2 delta(Q)) (1 - delta_min(T))

    std::array<double, 4> as_array() const { return {bl_plain, bl_channel, tv_plain, tv_channel}; }
    /// Default pick for the discounted bound constants: the tighter of the
    /// two BL-Lipschitz options.
    double selected() const { return std::min(bl_plain, bl_channel); }
};

inline AlphaZOptions alpha_Z_options(const PomdpModel& m) {
    const double ax = alpha_X(m);
    const double dq = dobrushin(m.channel);
    const double dt = dobrushin_transition_min(m);
    AlphaZOptions o;
    o.bl_plain = 3.0 * (1.0 + ax);
    o.bl_channel = (3.0 - 2.0 * dq) * (1.0 + ax);
    o.tv_plain = 3.0;
    o.tv_channel = (3.0 - 2.0 * dq) * (1.0 - dt);
    return o;
}

/// The discounted-bound constants. J_BL_bound dominates the BL norm of the
/// optimal value function; K0 and K0_hat are intermediate constants; K is the
/// multiplier in front of the filter-stability term.
struct BoundConstants {
    double J_BL_bound = 0.0;
    double K0 = 0.0;
    double K0_hat = 0.0;
    double K = 0.0;
};

/// Evaluates the explicit bound constants at (beta, alpha_Z, alpha_c,
/// cost_sup). The value-function bound uses the cost constant
/// alpha_ctilde = alpha_c + cost_sup; the leading terms use alpha_c itself.
/// Requires beta < 1/(4 alpha_Z + 1) and beta * alpha_Z < 1; throws
/// PreconditionViolated naming the failed inequality and its margin.
inline BoundConstants bound_constant_K(double beta, double alpha_Z, double alpha_c_value,
                                       double cost_sup) {
    const double beta_threshold = 1.0 / (4.0 * alpha_Z + 1.0);
    if (!(beta < beta_threshold))
        throw PreconditionViolated("beta < 1/(4 alpha_Z + 1)", beta - beta_threshold);
    if (!(beta * alpha_Z < 1.0))
        throw PreconditionViolated("beta * alpha_Z < 1", beta * alpha_Z - 1.0);

    const double alpha_ctilde = alpha_c_value + cost_sup;
    BoundConstants b;
    b.J_BL_bound = (cost_sup / (1.0 - beta) + alpha_ctilde) / (1.0 - beta * alpha_Z);
    const double core = alpha_c_value + beta * alpha_Z * b.J_BL_bound;
    const double gap = 1.0 - beta * (4.0 * alpha_Z + 1.0);
    b.K0 = core / gap;
    b.K0_hat = core * (2.0 / gap + 3.0 * alpha_Z / (1.0 - beta * alpha_Z) +
                       9.0 * alpha_Z * alpha_Z / (gap * gap));
    b.K = (core + (beta + 1.0) * b.K0 + b.K0_hat * beta * alpha_Z) / (1.0 - beta);
    return b;
}

/// Alternative discount threshold from the uniform-loss refinement,
/// 1 / ((2 + L_inf) alpha_Z + 1); informational only.
inline double alt_beta_threshold(double alpha_Z, double L_inf = 2.0) {
    return 1.0 / ((2.0 + L_inf) * alpha_Z + 1.0);
}

/// Per-window-size value and realized-cost bounds K alpha^N and
/// K alpha^N beta^N for N over [0, n_max].
inline std::vector<std::array<double, 3>> theorem_bounds(const PomdpModel& m, int n_max) {
    const double a = alpha(m);
    const double az = alpha_Z_options(m).selected();
    const BoundConstants b = bound_constant_K(m.discount, az, alpha_c(m), m.cost_sup());
    std::vector<std::array<double, 3>> out;
    double a_pow = 1.0, ab_pow = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        out.push_back({static_cast<double>(n), b.K * a_pow, b.K * ab_pow});
        a_pow *= a;
        ab_pow *= a * m.discount;
    }
    return out;
}

/// Uniform (worst-case history) bounds: value approximation error and
/// robustness error as multiples of cost_sup * L_TV. Requires
/// beta * alpha_Z < 1 and L_TV in [0, 2].
inline std::pair<double, double> uniform_bounds(double beta, double cost_sup, double alpha_Z,
                                                double L_TV) {
    if (!(beta * alpha_Z < 1.0))
        throw PreconditionViolated("beta * alpha_Z < 1", beta * alpha_Z - 1.0);
    if (!(L_TV >= 0.0 && L_TV <= 2.0))
        throw PreconditionViolated("L_TV in [0,2]", L_TV);
    const double one_m_b = 1.0 - beta;
    const double shared = (1.0 + (alpha_Z - 1.0) * beta) * cost_sup * L_TV / (1.0 - alpha_Z * beta);
    const double value_bound = shared / (one_m_b * one_m_b);
    const double robustness_bound = 2.0 * shared / (one_m_b * one_m_b * one_m_b);
    return {value_bound, robustness_bound};
}

inline std::pair<double, double> uniform_bounds(const PomdpModel& m, double alpha_Z, double L_TV) {
    return uniform_bounds(m.discount, m.cost_sup(), alpha_Z, L_TV);
}

/// Standard normal CDF through erfc; absolute error is at machine precision.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Dobrushin coefficients of the additive-Gaussian model with a bounded drift
/// and a 2- or 3-level nearest-neighbor discretized channel, parameterized by
/// the noise-to-range ratios sigma_t/t and sigma_q/q.
struct GaussianDobrushin {
    double delta_T = 0.0;
    double delta_Q_hat = 0.0;
    bool alpha_condition_holds = false;  // (1 - delta_T)(2 - delta_Q_hat) < 1
};

inline GaussianDobrushin gaussian_dobrushin(double ratio_t, double ratio_q, int obs_levels) {
    if (!(ratio_t > 0.0) || !(ratio_q > 0.0))
        throw std::invalid_argument("gaussian_dobrushin: ratios must be positive");
    if (obs_levels != 2 && obs_levels != 3)
        throw std::invalid_argument("gaussian_dobrushin: obs_levels must be 2 or 3");
    GaussianDobrushin g;
    g.delta_T = 2.0 * normal_cdf(-1.0 / ratio_t);
    g.delta_Q_hat = obs_levels == 2
                        ? 2.0 * normal_cdf(-1.0 / ratio_q)
                        : normal_cdf(-0.5 / ratio_q) + normal_cdf(-1.5 / ratio_q);
    g.alpha_condition_holds = (1.0 - g.delta_T) * (2.0 - g.delta_Q_hat) < 1.0;
    return g;
}

/// One column of the Gaussian stability table: the transition ratio, the
/// smallest channel ratio with exponential stability (absent when any channel
/// works), and the two coefficients at those ratios.
struct GaussianTableRow {
    double ratio_t = 0.0;
    std::optional<double> ratio_q_min;  // nullopt: any channel suffices
    double delta_T = 0.0;
    std::optional<double> delta_Q_hat;
};

/// Channel ratios at the published grid. With delta_T >= 0.5 the contraction
/// condition holds regardless of the channel.
inline std::vector<GaussianTableRow> gaussian_table(int obs_levels) {
    static constexpr std::array<double, 13> ratio_t = {1.5, 1.4, 1.3, 1.2, 1.1, 1.0, 0.9,
                                                       0.8, 0.7, 0.6, 0.5, 0.4, 0.3};
    static constexpr std::array<double, 13> two_level = {0.0,  0.6, 0.8,  1.01, 1.3,  1.65, 2.13,
                                                         3.25, 5.5, 8.0,  20.0, 70.0, 1000.0};
    static constexpr std::array<double, 13> three_level = {0.0, 0.39, 0.6,  0.85, 1.2,  1.54, 2.1,
                                                           3.2, 5.9,  8.0,  20.0, 80.0, 1000.0};
    const auto& ratios = obs_levels == 2 ? two_level : three_level;
    std::vector<GaussianTableRow> rows;
    for (std::size_t i = 0; i < ratio_t.size(); ++i) {
        GaussianTableRow row;
        row.ratio_t = ratio_t[i];
        row.delta_T = 2.0 * normal_cdf(-1.0 / ratio_t[i]);
        if (ratios[i] > 0.0) {
            row.ratio_q_min = ratios[i];
            row.delta_Q_hat = gaussian_dobrushin(ratio_t[i], ratios[i], obs_levels).delta_Q_hat;
        }
        rows.push_back(row);
    }
    return rows;
}

/// Everything the `diagnose` command reports: the contraction coefficients,
/// the Lipschitz constants, the bound constants when the discount admits
/// them, and the per-window theoretical envelopes.
struct DiagnosticsReport {
    std::vector<double> delta_T_per_action;
    double delta_T_min = 0.0;
    double delta_Q = 0.0;
    double alpha = 0.0;
    double alpha_X = 0.0;
    double alpha_c = 0.0;
    double alpha_ctilde = 0.0;  // alpha_c + ||c||_inf
    AlphaZOptions alpha_Z_options;
    double alpha_Z_selected = 0.0;
    double beta = 0.0;
    double beta_threshold = 0.0;       // 1/(4 alpha_Z + 1)
    double beta_threshold_alt = 0.0;   // informational, with the loss diameter 2
    std::optional<BoundConstants> constants;  // absent when beta is out of range
    std::string constants_unavailable_reason;
    std::vector<std::array<double, 3>> per_N_bounds;  // (N, K alpha^N, K alpha^N beta^N)
    std::optional<double> asserted_alpha;
    bool alpha_assertion_mismatch = false;
};

struct DiagnosticsOptions {
    std::optional<double> beta_override;
    std::optional<double> alpha_Z_override;
    std::optional<double> asserted_alpha;
    int n_max = 10;
};

inline DiagnosticsReport make_diagnostics(const PomdpModel& m,
                                          const DiagnosticsOptions& options = {}) {
    DiagnosticsReport r;
    for (const auto& t : m.transition) r.delta_T_per_action.push_back(dobrushin(t));
    r.delta_T_min = dobrushin_transition_min(m);
    r.delta_Q = dobrushin(m.channel);
    r.alpha = alpha(m);
    r.alpha_X = alpha_X(m);
    r.alpha_c = alpha_c(m);
    r.alpha_ctilde = r.alpha_c + m.cost_sup();
    r.alpha_Z_options = alpha_Z_options(m);
    r.alpha_Z_selected = options.alpha_Z_override.value_or(r.alpha_Z_options.selected());
    r.beta = options.beta_override.value_or(m.discount);
    r.beta_threshold = 1.0 / (4.0 * r.alpha_Z_selected + 1.0);
    r.beta_threshold_alt = alt_beta_threshold(r.alpha_Z_selected);
    try {
        r.constants = bound_constant_K(r.beta, r.alpha_Z_selected, r.alpha_c, m.cost_sup());
        double a_pow = 1.0, ab_pow = 1.0;
        for (int n = 0; n <= options.n_max; ++n) {
            r.per_N_bounds.push_back(
                {static_cast<double>(n), r.constants->K * a_pow, r.constants->K * ab_pow});
            a_pow *= r.alpha;
            ab_pow *= r.alpha * r.beta;
        }
    } catch (const PreconditionViolated& e) {
        r.constants_unavailable_reason = e.what();
    }
    if (options.asserted_alpha) {
        r.asserted_alpha = options.asserted_alpha;
        r.alpha_assertion_mismatch = std::abs(r.alpha - *options.asserted_alpha) > 1e-6;
    }
    return r;
}

}  // namespace finwin
