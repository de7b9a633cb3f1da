#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "finwin/belief.hpp"
#include "finwin/errors.hpp"
#include "finwin/model.hpp"
#include "finwin/parallel.hpp"
#include "finwin/quantizer.hpp"

namespace finwin {

/// Finite approximation of the belief MDP on the quantized set: expected
/// stage costs and, per (state, action), one successor branch per reachable
/// observation, mapped through the nearest-neighbor quantizer.
struct FiniteBeliefMdp {
    struct Branch {
        double probability = 0.0;
        std::size_t successor = 0;
    };

    QuantizedBeliefSet states;
    std::vector<std::vector<double>> costs;                     // [state][action]
    std::vector<std::vector<std::vector<Branch>>> transitions;  // [state][action][branch]
    double discount = 0.0;

    std::size_t state_count() const { return states.size(); }
    int action_count() const { return costs.empty() ? 0 : static_cast<int>(costs[0].size()); }
};

inline FiniteBeliefMdp build_finite_mdp(const QuantizedBeliefSet& set, const PomdpModel& model) {
    if (set.empty()) throw EmptySet();
    FiniteBeliefMdp mdp;
    mdp.states = set;
    mdp.discount = model.discount;
    const std::size_t ns = set.size();
    const std::size_t nu = static_cast<std::size_t>(model.n_actions);
    mdp.costs.assign(ns, std::vector<double>(nu, 0.0));
    mdp.transitions.assign(ns, std::vector<std::vector<FiniteBeliefMdp::Branch>>(nu));

    parallel_for(ns, [&](std::size_t i) {
        const Belief& z = set.entries[i].belief;
        for (std::size_t u = 0; u < nu; ++u) {
            mdp.costs[i][u] = expected_cost(z, static_cast<int>(u), model);
            const auto likes = obs_likelihoods(z, static_cast<int>(u), model);
            for (int y = 0; y < model.n_obs; ++y) {
                const double p = likes[static_cast<std::size_t>(y)];
                if (p < kZeroLikelihood) continue;  // impossible observation: no branch
                auto [next, like] = bayes_update(z, static_cast<int>(u), y, model);
                (void)like;
                const std::size_t succ = nearest_neighbor(next, set, model.state_metric);
                mdp.transitions[i][u].push_back({p, succ});
            }
        }
    });
    return mdp;
}

/// Solved values and the stationary finite-window policy extracted from them.
struct SolvedPolicy {
    std::vector<double> values;  // J^N per state
    std::vector<int> policy;     // argmin action per state, ties to lowest index
    int iteration_count = 0;
    double residual = 0.0;       // sup-norm of the last Bellman update
};

/// Value iteration from v = 0 with double-buffered sweeps. Stops once the
/// sup-norm change guarantees ||v - J|| <= tolerance through the contraction
/// bound beta * delta / (1 - beta), and also once the raw change is below the
/// tolerance itself. Throws NotConverged past max_iter.
inline SolvedPolicy value_iteration(const FiniteBeliefMdp& mdp, double tolerance = 1e-9,
                                    int max_iter = 100000) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const std::size_t ns = mdp.state_count();
    const std::size_t nu = static_cast<std::size_t>(mdp.action_count());
    const double beta = mdp.discount;
    const double threshold = std::min(tolerance, tolerance * (1.0 - beta) / beta);

    std::vector<double> v(ns, 0.0), next(ns, 0.0);
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    while (iterations < max_iter) {
        parallel_for(ns, [&](std::size_t i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t u = 0; u < nu; ++u) {
                double q = mdp.costs[i][u];
                for (const auto& br : mdp.transitions[i][u])
                    q += beta * br.probability * v[br.successor];
                if (q < best) best = q;
            }
            next[i] = best;
        });
        residual = 0.0;
        for (std::size_t i = 0; i < ns; ++i) residual = std::max(residual, std::abs(next[i] - v[i]));
        v.swap(next);
        ++iterations;
        if (residual <= threshold) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NotConverged(iterations, residual);

    SolvedPolicy solved;
    solved.values = std::move(v);
    solved.policy.assign(ns, 0);
    solved.iteration_count = iterations;
    solved.residual = residual;
    for (std::size_t i = 0; i < ns; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_u = 0;
        for (std::size_t u = 0; u < nu; ++u) {
            double q = mdp.costs[i][u];
            for (const auto& br : mdp.transitions[i][u])
                q += beta * br.probability * solved.values[br.successor];
            if (q < best) {
                best = q;
                best_u = static_cast<int>(u);
            }
        }
        solved.policy[i] = best_u;
    }
    return solved;
}

/// Action the solved policy takes for a concrete window. Resolves the window
/// by rank arithmetic over the lexicographic enumeration; a pruned or merged
/// history falls back to the BL-nearest surviving state of the belief
/// filtered from the anchor along the window.
inline int finite_window_action(const SolvedPolicy& solved, const FiniteBeliefMdp& mdp,
                                const HistoryWindow& window, const PomdpModel& model) {
    if (window.window_size() != mdp.states.window_size ||
        window.observations.size() != window.actions.size() + 1)
        throw std::invalid_argument("window length does not match the solved model");
    const std::uint64_t rank = window_rank(window, model);
    if (auto idx = mdp.states.index_of_rank(rank)) return solved.policy[*idx];
    auto [belief, p] = filter_from_history(mdp.states.anchor, window, model);
    (void)p;
    return solved.policy[nearest_neighbor(belief, mdp.states, model.state_metric)];
}

}  // namespace finwin
