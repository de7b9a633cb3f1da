#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "finwin/errors.hpp"
#include "finwin/model.hpp"

namespace finwin {

/// Likelihoods below this are treated as structurally impossible histories
/// rather than underflow.
constexpr double kZeroLikelihood = 1e-300;

/// Posterior distribution over the hidden state.
struct Belief {
    std::vector<double> weights;

    Belief() = default;
    explicit Belief(std::vector<double> w) : weights(std::move(w)) {}

    std::size_t size() const { return weights.size(); }
    double operator[](std::size_t i) const { return weights[i]; }

    static Belief point_mass(std::size_t n, std::size_t x) {
        std::vector<double> w(n, 0.0);
        w[x] = 1.0;
        return Belief(std::move(w));
    }
};

/// Sliding information window: observations y_0..y_N and the actions
/// u_0..u_{N-1} taken between them. Observations are always one longer.
struct HistoryWindow {
    std::vector<int> observations;
    std::vector<int> actions;

    int window_size() const { return static_cast<int>(actions.size()); }

    bool well_formed(const PomdpModel& m) const {
        if (observations.size() != actions.size() + 1) return false;
        for (int y : observations)
            if (y < 0 || y >= m.n_obs) return false;
        for (int u : actions)
            if (u < 0 || u >= m.n_actions) return false;
        return true;
    }
};

namespace detail {
inline void require_action(int action, const PomdpModel& m) {
    if (action < 0 || action >= m.n_actions) throw std::invalid_argument("action index out of range");
}
inline void require_observation(int y, const PomdpModel& m) {
    if (y < 0 || y >= m.n_obs) throw std::invalid_argument("observation index out of range");
}
}  // namespace detail

/// One-step predictor: pushes the belief through the transition kernel.
inline Belief predict(const Belief& belief, int action, const PomdpModel& model) {
    detail::require_action(action, model);
    const std::size_t n = belief.size();
    const Matrix& t = model.transition[static_cast<std::size_t>(action)];
    std::vector<double> out(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        const double w = belief[x];
        if (w == 0.0) continue;
        for (std::size_t xp = 0; xp < n; ++xp) out[xp] += t[x][xp] * w;
    }
    double sum = 0.0;
    for (double v : out) sum += v;
    if (sum > 0.0)
        for (double& v : out) v /= sum;
    return Belief(std::move(out));
}

/// Predict with `action`, then correct by observing `observation`. Returns the
/// normalized posterior and the observation likelihood P(y|z,u). Throws
/// ZeroLikelihood when the observation is impossible from this belief.
inline std::pair<Belief, double> bayes_update(const Belief& belief, int action, int observation,
                                              const PomdpModel& model) {
    detail::require_observation(observation, model);
    const std::size_t n = belief.size();
    Belief predicted = predict(belief, action, model);
    std::vector<double> unnormalized(n, 0.0);
    double likelihood = 0.0;
    for (std::size_t xp = 0; xp < n; ++xp) {
        unnormalized[xp] = model.channel[xp][static_cast<std::size_t>(observation)] * predicted[xp];
        likelihood += unnormalized[xp];
    }
    if (likelihood < kZeroLikelihood) throw ZeroLikelihood(0);
    for (double& v : unnormalized) v /= likelihood;
    return {Belief(std::move(unnormalized)), likelihood};
}

/// Distribution of the next observation given the current belief and action.
inline std::vector<double> obs_likelihoods(const Belief& belief, int action,
                                           const PomdpModel& model) {
    const std::size_t n = belief.size();
    Belief predicted = predict(belief, action, model);
    std::vector<double> out(static_cast<std::size_t>(model.n_obs), 0.0);
    for (std::size_t xp = 0; xp < n; ++xp) {
        const double w = predicted[xp];
        if (w == 0.0) continue;
        for (std::size_t y = 0; y < out.size(); ++y) out[y] += model.channel[xp][y] * w;
    }
    return out;
}

/// Folds a full window through the filter: the first observation corrects the
/// prior through the channel alone, then predict/correct steps alternate. The
/// returned path probability is the product of the per-step observation
/// likelihoods. ZeroLikelihood carries the index of the offending observation.
inline std::pair<Belief, double> filter_from_history(const Belief& prior,
                                                     const HistoryWindow& window,
                                                     const PomdpModel& model) {
    if (!window.well_formed(model)) throw std::invalid_argument("malformed history window");
    const std::size_t n = prior.size();

    std::vector<double> w(n, 0.0);
    double likelihood = 0.0;
    const std::size_t y0 = static_cast<std::size_t>(window.observations[0]);
    for (std::size_t x = 0; x < n; ++x) {
        w[x] = model.channel[x][y0] * prior[x];
        likelihood += w[x];
    }
    if (likelihood < kZeroLikelihood) throw ZeroLikelihood(0);
    for (double& v : w) v /= likelihood;

    Belief belief(std::move(w));
    double path_probability = likelihood;
    for (std::size_t k = 0; k < window.actions.size(); ++k) {
        try {
            auto [next, like] = bayes_update(belief, window.actions[k],
                                             window.observations[k + 1], model);
            belief = std::move(next);
            path_probability *= like;
        } catch (const ZeroLikelihood&) {
            throw ZeroLikelihood(k + 1);
        }
    }
    return {std::move(belief), path_probability};
}

/// Expected stage cost of `action` under the belief.
inline double expected_cost(const Belief& belief, int action, const PomdpModel& model) {
    detail::require_action(action, model);
    double total = 0.0;
    for (std::size_t x = 0; x < belief.size(); ++x)
        total += model.cost[x][static_cast<std::size_t>(action)] * belief[x];
    return total;
}

/// Total variation distance (factor-2 convention): the L1 distance between
/// the weight vectors. Ranges over [0, 2].
inline double tv_distance(const Belief& a, const Belief& b) {
    double total = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x) total += std::abs(a[x] - b[x]);
    return total;
}

}  // namespace finwin
