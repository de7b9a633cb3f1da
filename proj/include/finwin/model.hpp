#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace finwin {

using Matrix = std::vector<std::vector<double>>;

/// Finite POMDP: controlled transition kernel, control-free observation
/// channel, stage cost, discount, and a metric on the state space. All
/// probabilities are 64-bit doubles; immutable value type after construction.
struct PomdpModel {
    int n_states = 0;
    int n_obs = 0;
    int n_actions = 0;
    std::vector<Matrix> transition;  // transition[u][x][x'] = T(x'|x,u)
    Matrix channel;                  // channel[x][y]        = Q(y|x)
    Matrix cost;                     // cost[x][u]           = c(x,u)
    double discount = 0.0;           // beta in (0,1)
    Matrix state_metric;             // d[x][x'], metric on the state space
    std::vector<double> prior;             // mu
    std::vector<double> reference_prior;   // pi_hat, quantization anchor

    double cost_sup() const {
        double m = 0.0;
        for (const auto& row : cost)
            for (double v : row) m = std::max(m, v);
        return m;
    }
};

/// One failed model invariant: which field, at which indices, and how far off.
struct Violation {
    std::string field;
    std::vector<std::size_t> index;
    double magnitude = 0.0;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

namespace detail {

constexpr double kRowSumTol = 1e-12;

inline std::string index_string(const std::vector<std::size_t>& idx) {
    std::string s = "(";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i > 0) s += ",";
        s += std::to_string(idx[i]);
    }
    return s + ")";
}

inline void check_stochastic_row(const std::vector<double>& row, const std::string& field,
                                 std::vector<std::size_t> idx, ValidationReport& out) {
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (!(row[j] >= 0.0 && row[j] <= 1.0) || !std::isfinite(row[j])) {
            auto cell = idx;
            cell.push_back(j);
            out.push_back({field, cell, row[j],
                           field + index_string(cell) + " = " + std::to_string(row[j]) +
                               " outside [0,1]"});
        }
        sum += row[j];
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
        out.push_back({field, idx, sum - 1.0,
                       field + " row " + index_string(idx) + " sums to " + std::to_string(sum) +
                           " (deficit " + std::to_string(1.0 - sum) + ")"});
    }
}

}  // namespace detail

/// Checks every model invariant; returns an empty report iff the model is
/// well formed. Never throws: each violation names the field, index, and
/// magnitude of the defect.
inline ValidationReport validate_model(const PomdpModel& m) {
    ValidationReport report;
    const std::size_t nx = static_cast<std::size_t>(m.n_states);
    const std::size_t ny = static_cast<std::size_t>(m.n_obs);
    const std::size_t nu = static_cast<std::size_t>(m.n_actions);

    if (m.n_states <= 0) report.push_back({"n_states", {}, double(m.n_states), "n_states must be positive"});
    if (m.n_obs <= 0) report.push_back({"n_obs", {}, double(m.n_obs), "n_obs must be positive"});
    if (m.n_actions <= 0) report.push_back({"n_actions", {}, double(m.n_actions), "n_actions must be positive"});
    if (!report.empty()) return report;

    auto shape_ok = [&](const Matrix& mat, std::size_t rows, std::size_t cols) {
        if (mat.size() != rows) return false;
        for (const auto& r : mat)
            if (r.size() != cols) return false;
        return true;
    };

    if (m.transition.size() != nu) {
        report.push_back({"transition", {}, double(m.transition.size()),
                          "transition must have one matrix per action"});
    } else {
        for (std::size_t u = 0; u < nu; ++u) {
            if (!shape_ok(m.transition[u], nx, nx)) {
                report.push_back({"transition", {u}, 0.0,
                                  "transition[" + std::to_string(u) + "] is not " +
                                      std::to_string(nx) + "x" + std::to_string(nx)});
                continue;
            }
            for (std::size_t x = 0; x < nx; ++x)
                detail::check_stochastic_row(m.transition[u][x], "transition", {u, x}, report);
        }
    }

    if (!shape_ok(m.channel, nx, ny)) {
        report.push_back({"channel", {}, 0.0, "channel is not |X| x |Y|"});
    } else {
        for (std::size_t x = 0; x < nx; ++x)
            detail::check_stochastic_row(m.channel[x], "channel", {x}, report);
    }

    if (!shape_ok(m.cost, nx, nu)) {
        report.push_back({"cost", {}, 0.0, "cost is not |X| x |U|"});
    } else {
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t u = 0; u < nu; ++u)
                if (!(m.cost[x][u] >= 0.0) || !std::isfinite(m.cost[x][u]))
                    report.push_back({"cost", {x, u}, m.cost[x][u],
                                      "cost(" + std::to_string(x) + "," + std::to_string(u) +
                                          ") = " + std::to_string(m.cost[x][u]) +
                                          " is not a nonnegative finite real"});
    }

    if (!(m.discount > 0.0 && m.discount < 1.0))
        report.push_back({"discount", {}, m.discount, "discount must lie in (0,1)"});

    if (!shape_ok(m.state_metric, nx, nx)) {
        report.push_back({"state_metric", {}, 0.0, "state_metric is not |X| x |X|"});
    } else if (nx <= 64) {
        const auto& d = m.state_metric;
        for (std::size_t x = 0; x < nx; ++x) {
            if (d[x][x] != 0.0)
                report.push_back({"state_metric", {x, x}, d[x][x], "metric diagonal must be zero"});
            for (std::size_t y = 0; y < nx; ++y) {
                if (d[x][y] < 0.0 || !std::isfinite(d[x][y]))
                    report.push_back({"state_metric", {x, y}, d[x][y], "metric entries must be finite and nonnegative"});
                if (x != y && d[x][y] == 0.0)
                    report.push_back({"state_metric", {x, y}, 0.0, "distinct states at zero distance"});
                if (d[x][y] != d[y][x])
                    report.push_back({"state_metric", {x, y}, d[x][y] - d[y][x], "metric must be symmetric"});
                for (std::size_t z = 0; z < nx; ++z)
                    if (d[x][y] > d[x][z] + d[z][y] + 1e-12) {
                        report.push_back({"state_metric", {x, y, z}, d[x][y] - d[x][z] - d[z][y],
                                          "triangle inequality fails"});
                        break;
                    }
            }
        }
    }

    auto check_prob_vector = [&](const std::vector<double>& p, const std::string& field) {
        if (p.size() != nx) {
            report.push_back({field, {}, double(p.size()), field + " must have |X| entries"});
            return;
        }
        detail::check_stochastic_row(p, field, {}, report);
    };
    check_prob_vector(m.prior, "prior");
    check_prob_vector(m.reference_prior, "reference_prior");

    return report;
}

/// Two-state machine repair benchmark. State 0 is broken, 1 working; action 1
/// repairs. A successful repair happens with probability kappa, a working
/// machine breaks with probability theta while unattended, and the channel
/// flips the reading with probability epsilon. Rows the benchmark leaves open
/// are fixed as: a broken machine never self-repairs, a machine under repair
/// never breaks. The cost is repair_cost for repairing plus broken_cost while
/// the machine is down.
inline PomdpModel build_machine_repair(double epsilon, double kappa, double theta,
                                       double repair_cost, double broken_cost, double beta) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(epsilon) || !in_unit(kappa) || !in_unit(theta))
        throw std::invalid_argument("machine repair: probability parameters must lie in [0,1]");
    if (!(repair_cost >= 0.0) || !(broken_cost >= 0.0))
        throw std::invalid_argument("machine repair: costs must be nonnegative");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("machine repair: discount must lie in (0,1)");

    PomdpModel m;
    m.n_states = 2;
    m.n_obs = 2;
    m.n_actions = 2;
    m.transition = {
        // u = 0: broken stays broken; working breaks w.p. theta
        {{1.0, 0.0}, {theta, 1.0 - theta}},
        // u = 1: repair succeeds w.p. kappa; a machine under repair keeps working
        {{1.0 - kappa, kappa}, {0.0, 1.0}},
    };
    m.channel = {{1.0 - epsilon, epsilon}, {epsilon, 1.0 - epsilon}};
    m.cost = {{broken_cost, repair_cost + broken_cost}, {0.0, repair_cost}};
    m.discount = beta;
    m.state_metric = {{0.0, 1.0}, {1.0, 0.0}};
    m.prior = {0.5, 0.5};
    m.reference_prior = {0.1, 0.9};
    return m;
}

/// Quantization anchor used by the machine repair study.
inline std::vector<double> default_reference_prior_machine_repair() { return {0.1, 0.9}; }

}  // namespace finwin
