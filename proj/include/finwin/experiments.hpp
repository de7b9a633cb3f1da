#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "finwin/belief.hpp"
#include "finwin/diagnostics.hpp"
#include "finwin/errors.hpp"
#include "finwin/finite_mdp.hpp"
#include "finwin/model.hpp"
#include "finwin/quantizer.hpp"
#include "finwin/rng.hpp"
#include "finwin/stability.hpp"

namespace finwin {

/// Stationary control law driven by the sliding (y, u) window.
struct WindowPolicy {
    int window_size = 0;
    std::function<int(const HistoryWindow&)> action;
};

inline WindowPolicy make_window_policy(const FiniteBeliefMdp& mdp, const SolvedPolicy& solved,
                                       const PomdpModel& model) {
    WindowPolicy p;
    p.window_size = mdp.states.window_size;
    p.action = [&mdp, &solved, &model](const HistoryWindow& w) {
        return finite_window_action(solved, mdp, w, model);
    };
    return p;
}

enum class EvalMode { ExactTruncated, MonteCarlo };

/// Discounted cost of running a window policy from a hidden-state
/// distribution and a concrete starting window, truncated at horizon H.
///
/// Exact mode collapses the reachable (window, belief) evaluation tree onto
/// the equivalent finite chain over (hidden state, window) pairs — the window
/// is the only part of the history the policy reads, so the joint chain is
/// Markov and the truncated expectation is a finite dynamic program over it.
/// The second return value is the geometric tail bound beta^H ||c|| / (1-beta)
/// in exact mode and the standard error in Monte Carlo mode.
inline std::pair<double, double> evaluate_policy_cost(
    const PomdpModel& model, const WindowPolicy& policy, const Belief& initial_belief,
    const HistoryWindow& initial_window, int horizon, EvalMode mode = EvalMode::ExactTruncated,
    std::uint64_t samples = 10000, std::uint64_t seed = 0,
    std::uint64_t capacity = 10'000'000) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (!initial_window.well_formed(model) ||
        initial_window.window_size() != policy.window_size)
        throw std::invalid_argument("initial window does not match the policy window size");
    const int N = policy.window_size;
    const double beta = model.discount;
    const std::size_t nx = static_cast<std::size_t>(model.n_states);

    if (mode == EvalMode::MonteCarlo) {
        std::vector<double> costs(samples, 0.0);
        parallel_for(samples, [&](std::size_t s) {
            Rng rng = Rng::for_sample(seed, s);
            int x = rng.categorical(initial_belief.weights);
            HistoryWindow w = initial_window;
            double discounted = 0.0, scale = 1.0;
            for (int t = 0; t < horizon; ++t) {
                const int u = policy.action(w);
                discounted += scale * model.cost[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)];
                scale *= beta;
                x = rng.categorical(model.transition[static_cast<std::size_t>(u)][static_cast<std::size_t>(x)]);
                const int y = rng.categorical(model.channel[static_cast<std::size_t>(x)]);
                w.observations.erase(w.observations.begin());
                w.observations.push_back(y);
                if (N > 0) {
                    w.actions.erase(w.actions.begin());
                    w.actions.push_back(u);
                }
            }
            costs[s] = discounted;
        });
        double mean = 0.0;
        for (double c : costs) mean += c;
        mean /= static_cast<double>(samples);
        double var = 0.0;
        for (double c : costs) var += (c - mean) * (c - mean);
        const double se = samples > 1 ? std::sqrt(var / static_cast<double>(samples - 1) /
                                                  static_cast<double>(samples))
                                      : 0.0;
        return {mean, se};
    }

    // Reachable closure of window ranks under the policy.
    const std::uint64_t start_rank = window_rank(initial_window, model);
    std::unordered_map<std::uint64_t, std::size_t> index_of;
    std::vector<std::uint64_t> ranks;
    std::vector<int> actions;
    std::vector<std::vector<std::size_t>> succ;  // [window][observation]
    ranks.push_back(start_rank);
    index_of.emplace(start_rank, 0);
    for (std::size_t head = 0; head < ranks.size(); ++head) {
        const HistoryWindow w = window_from_rank(ranks[head], N, model);
        const int u = policy.action(w);
        actions.push_back(u);
        succ.emplace_back(static_cast<std::size_t>(model.n_obs));
        for (int y = 0; y < model.n_obs; ++y) {
            const std::uint64_t next = shift_window_rank(ranks[head], N, y, u, model);
            auto [it, inserted] = index_of.emplace(next, ranks.size());
            if (inserted) ranks.push_back(next);
            succ[head][static_cast<std::size_t>(y)] = it->second;
            if (ranks.size() * nx > capacity) throw CapacityExceeded(ranks.size() * nx, capacity);
        }
    }

    // Remaining-horizon dynamic program over (hidden state, window).
    const std::size_t nw = ranks.size();
    std::vector<double> v(nx * nw, 0.0), next_v(nx * nw, 0.0);
    for (int h = 0; h < horizon; ++h) {
        for (std::size_t wi = 0; wi < nw; ++wi) {
            const int u = actions[wi];
            for (std::size_t x = 0; x < nx; ++x) {
                double future = 0.0;
                for (std::size_t xp = 0; xp < nx; ++xp) {
                    const double pt = model.transition[static_cast<std::size_t>(u)][x][xp];
                    if (pt == 0.0) continue;
                    double over_obs = 0.0;
                    for (int y = 0; y < model.n_obs; ++y)
                        over_obs += model.channel[xp][static_cast<std::size_t>(y)] *
                                    v[xp * nw + succ[wi][static_cast<std::size_t>(y)]];
                    future += pt * over_obs;
                }
                next_v[x * nw + wi] =
                    model.cost[x][static_cast<std::size_t>(u)] + beta * future;
            }
        }
        v.swap(next_v);
    }
    double cost = 0.0;
    for (std::size_t x = 0; x < nx; ++x) cost += initial_belief[x] * v[x * nw + 0];
    const double tail = std::pow(beta, horizon) * model.cost_sup() / (1.0 - beta);
    return {cost, tail};
}

struct EvalConfig {
    EvalMode mode = EvalMode::ExactTruncated;
    int horizon = 60;
    std::uint64_t samples = 10000;
    double vi_tolerance = 1e-9;
    int vi_max_iter = 200000;
    double prune_threshold = 0.0;
    int warmup_steps = 5;
};

struct PerWindowRecord {
    int N = 0;
    double approx_value = 0.0;      // E[ J^N at the time-5 window state ]
    double realized_cost = 0.0;     // E[ discounted cost of the window policy from time 5 ]
    double value_error = 0.0;
    double robustness_error = 0.0;
    double filter_stability_term = 0.0;  // exact E[rho_BL] between the two filters
    double alpha_pow_N = 0.0;
    double eval_error = 0.0;        // tail bound (exact mode) or std error (MC mode)
};

struct ExperimentResult {
    int case_id = 0;
    std::vector<PerWindowRecord> records;
    EvalMode mode = EvalMode::ExactTruncated;
    int horizon = 60;
    double cost_tail_bound = 0.0;
    double alpha = 0.0;
};

/// Parameters of the three published machine-repair cases. All share
/// beta = 0.8, R = 5, E = 1 and the anchor (0.1, 0.9).
inline PomdpModel machine_repair_case(int case_id) {
    switch (case_id) {
        case 1: return build_machine_repair(0.3, 0.2, 0.1, 5.0, 1.0, 0.8);
        case 2: return build_machine_repair(0.01, 0.3, 0.1, 5.0, 1.0, 0.8);
        case 3: return build_machine_repair(0.3, 0.4, 0.3, 5.0, 1.0, 0.8);
        default: throw std::invalid_argument("machine repair case must be 1, 2 or 3");
    }
}

/// Runs the machine-repair study for one case: per window size, build the
/// quantized model, solve it, then average over the exactly enumerated
/// warm-up histories (all observation sequences under the idle policy u = 0)
/// the approximate value at the resulting window state and the true
/// discounted cost of running the window policy from the true warm-up
/// posterior. Errors are absolute distances from the largest-window values,
/// which stand in for the unavailable optimum.
inline ExperimentResult run_machine_repair(int case_id, const std::vector<int>& N_range,
                                           const EvalConfig& config = {}, std::uint64_t seed = 0) {
    const PomdpModel model = machine_repair_case(case_id);
    ExperimentResult result;
    result.case_id = case_id;
    result.mode = config.mode;
    result.horizon = config.horizon;
    result.cost_tail_bound =
        std::pow(model.discount, config.horizon) * model.cost_sup() / (1.0 - model.discount);
    result.alpha = alpha(model);

    const int warmup = config.warmup_steps;
    for (int N : N_range)
        if (N < 0 || N > warmup)
            throw std::invalid_argument("window size must lie in [0, warmup_steps]");

    // Warm-up enumeration: every observation sequence y_0..y_warmup under u = 0.
    struct WarmupPath {
        std::vector<int> obs;
        double probability = 0.0;
        Belief posterior;  // true belief at the end of the warm-up
    };
    std::vector<WarmupPath> paths;
    std::uint64_t total = 1;
    for (int k = 0; k <= warmup; ++k) total *= static_cast<std::uint64_t>(model.n_obs);
    const Belief prior(model.prior);
    for (std::uint64_t r = 0; r < total; ++r) {
        WarmupPath path;
        path.obs.assign(static_cast<std::size_t>(warmup) + 1, 0);
        std::uint64_t rest = r;
        for (int k = warmup; k >= 0; --k) {
            path.obs[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::uint64_t>(model.n_obs));
            rest /= static_cast<std::uint64_t>(model.n_obs);
        }
        HistoryWindow full{path.obs, std::vector<int>(static_cast<std::size_t>(warmup), 0)};
        try {
            auto [belief, probability] = filter_from_history(prior, full, model);
            path.posterior = std::move(belief);
            path.probability = probability;
            paths.push_back(std::move(path));
        } catch (const ZeroLikelihood&) {
            // impossible under the true prior: zero weight
        }
    }

    for (int N : N_range) {
        PerWindowRecord rec;
        rec.N = N;
        rec.alpha_pow_N = std::pow(result.alpha, N);

        QuantizerOptions qopt;
        qopt.prune_threshold = config.prune_threshold;
        const QuantizedBeliefSet set = build_quantized_set(model, N, qopt);
        const FiniteBeliefMdp mdp = build_finite_mdp(set, model);
        const SolvedPolicy solved = value_iteration(mdp, config.vi_tolerance, config.vi_max_iter);
        const WindowPolicy policy = make_window_policy(mdp, solved, model);

        for (std::size_t h = 0; h < paths.size(); ++h) {
            const WarmupPath& path = paths[h];
            HistoryWindow window;
            window.observations.assign(path.obs.end() - (N + 1), path.obs.end());
            window.actions.assign(static_cast<std::size_t>(N), 0);

            const std::uint64_t rank = window_rank(window, model);
            double state_value = 0.0;
            if (auto idx = set.index_of_rank(rank)) {
                state_value = solved.values[*idx];
            } else {
                auto [belief, p_] = filter_from_history(set.anchor, window, model);
                (void)p_;
                state_value = solved.values[nearest_neighbor(belief, set, model.state_metric)];
            }
            rec.approx_value += path.probability * state_value;

            const std::uint64_t path_seed =
                splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(N)) ^ h);
            auto [cost, err] =
                evaluate_policy_cost(model, policy, path.posterior, window, config.horizon,
                                     config.mode, config.samples, path_seed);
            rec.realized_cost += path.probability * cost;
            rec.eval_error = std::max(rec.eval_error, err);
        }

        rec.filter_stability_term =
            exact_filter_stability(model, prior, Belief(model.reference_prior),
                                   fixed_action_policy(0), N)
                .mean_bl;
        result.records.push_back(rec);
    }

    // The largest window stands in for the unavailable optimum; errors are
    // absolute distances from its values.
    const PerWindowRecord* widest = &result.records.front();
    for (const auto& rec : result.records)
        if (rec.N > widest->N) widest = &rec;
    const double proxy_value = widest->approx_value;
    const double proxy_realized = widest->realized_cost;
    for (auto& rec : result.records) {
        rec.value_error = std::abs(rec.approx_value - proxy_value);
        rec.robustness_error = std::abs(rec.realized_cost - proxy_realized);
    }
    return result;
}

struct NormalizedCurves {
    std::vector<int> N;
    std::vector<double> value_error;
    std::vector<double> robustness_error;
    std::vector<double> stability_term;
    std::vector<double> alpha_pow_N;
};

/// Rescales each curve by stability_term(0) / curve(0) so all four share the
/// N = 0 value; the decay rates then compare directly.
inline NormalizedCurves error_curves(const ExperimentResult& result) {
    if (result.records.empty()) throw std::invalid_argument("empty experiment result");
    const PerWindowRecord* first = nullptr;
    for (const auto& rec : result.records)
        if (rec.N == 0) first = &rec;
    if (first == nullptr) throw std::invalid_argument("error_curves needs the N = 0 record");

    const double anchor = first->filter_stability_term;
    auto scale_for = [&](double at_zero, const char* name) {
        if (at_zero == 0.0) throw DegenerateNormalization(name);
        return anchor / at_zero;
    };
    const double s_value = scale_for(first->value_error, "value_error");
    const double s_robust = scale_for(first->robustness_error, "robustness_error");
    const double s_stability = scale_for(first->filter_stability_term, "stability_term");
    const double s_alpha = scale_for(first->alpha_pow_N, "alpha_pow_N");

    NormalizedCurves curves;
    for (const auto& rec : result.records) {
        curves.N.push_back(rec.N);
        curves.value_error.push_back(rec.value_error * s_value);
        curves.robustness_error.push_back(rec.robustness_error * s_robust);
        curves.stability_term.push_back(rec.filter_stability_term * s_stability);
        curves.alpha_pow_N.push_back(rec.alpha_pow_N * s_alpha);
    }
    return curves;
}

}  // namespace finwin
