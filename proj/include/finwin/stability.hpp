#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "finwin/belief.hpp"
#include "finwin/diagnostics.hpp"
#include "finwin/errors.hpp"
#include "finwin/finite_mdp.hpp"
#include "finwin/metrics.hpp"
#include "finwin/model.hpp"
#include "finwin/parallel.hpp"
#include "finwin/quantizer.hpp"
#include "finwin/rng.hpp"

namespace finwin {

/// Decides the action at step k from the realized history so far:
/// observations y_0..y_k and actions u_0..u_{k-1}.
using HistoryPolicy = std::function<int(const std::vector<int>& obs, const std::vector<int>& acts)>;

inline HistoryPolicy fixed_action_policy(int action) {
    return [action](const std::vector<int>&, const std::vector<int>&) { return action; };
}

/// Drives a solved finite-window policy from the realized history: once N+1
/// observations are available the sliding window is looked up directly; the
/// shorter prefixes are resolved by filtering the anchor through the partial
/// history and taking the nearest quantized state's action.
inline HistoryPolicy solved_window_policy(const FiniteBeliefMdp& mdp, const SolvedPolicy& solved,
                                          const PomdpModel& model) {
    const int n = mdp.states.window_size;
    return [&mdp, &solved, &model, n](const std::vector<int>& obs, const std::vector<int>& acts) {
        const int t = static_cast<int>(obs.size()) - 1;
        if (t >= n) {
            HistoryWindow w;
            w.observations.assign(obs.end() - (n + 1), obs.end());
            w.actions.assign(acts.end() - n, acts.end());
            return finite_window_action(solved, mdp, w, model);
        }
        HistoryWindow partial{obs, acts};
        auto [belief, p] = filter_from_history(mdp.states.anchor, partial, model);
        (void)p;
        return solved.policy[nearest_neighbor(belief, mdp.states, model.state_metric)];
    };
}

/// Expected distance at time N between the correctly initialized filter and
/// the one started from the anchor, both fed the same realizations.
struct StabilityEstimate {
    int N = 0;
    double mean_tv = 0.0;
    double mean_bl = 0.0;
    double std_error_tv = 0.0;  // zero in exact mode
    double std_error_bl = 0.0;
    enum class Mode { Exact, MonteCarlo } mode = Mode::Exact;
    std::uint64_t samples = 0;
};

namespace detail {

struct HistoryLeg {
    double weight = 0.0;  // true path probability under the prior and policy
    double tv = 0.0;
    double bl = 0.0;
};

/// Walks every observation sequence of length N+1, with actions chosen by the
/// policy along the way, carrying both filters and the true path probability.
template <class Visit>
inline void enumerate_filter_pairs(const PomdpModel& model, const Belief& prior,
                                   const Belief& anchor, const HistoryPolicy& policy, int N,
                                   std::uint64_t capacity, Visit&& visit) {
    std::uint64_t total = 1;
    for (int k = 0; k <= N; ++k) {
        if (total > capacity / static_cast<std::uint64_t>(model.n_obs))
            throw CapacityExceeded(0, capacity);
        total *= static_cast<std::uint64_t>(model.n_obs);
    }

    struct Frame {
        Belief from_prior;
        Belief from_anchor;
        double weight;
    };
    std::function<void(Frame&, std::vector<int>&, std::vector<int>&)> descend =
        [&](Frame& frame, std::vector<int>& obs, std::vector<int>& acts) {
            if (static_cast<int>(obs.size()) == N + 1) {
                visit(frame.from_prior, frame.from_anchor, frame.weight);
                return;
            }
            const int u = policy(obs, acts);
            const auto prior_likes = obs_likelihoods(frame.from_prior, u, model);
            for (int y = 0; y < model.n_obs; ++y) {
                const double py = prior_likes[static_cast<std::size_t>(y)];
                if (py < kZeroLikelihood) continue;  // zero true probability
                auto [next_prior, lp_] = bayes_update(frame.from_prior, u, y, model);
                (void)lp_;
                auto [next_anchor, la_] = bayes_update(frame.from_anchor, u, y, model);
                (void)la_;
                Frame child{std::move(next_prior), std::move(next_anchor), frame.weight * py};
                obs.push_back(y);
                acts.push_back(u);
                descend(child, obs, acts);
                obs.pop_back();
                acts.pop_back();
            }
        };

    // time 0: both filters correct their start measure through the channel
    for (int y0 = 0; y0 < model.n_obs; ++y0) {
        double w_prior = 0.0;
        for (std::size_t x = 0; x < prior.size(); ++x)
            w_prior += model.channel[x][static_cast<std::size_t>(y0)] * prior[x];
        if (w_prior < kZeroLikelihood) continue;
        HistoryWindow head{{y0}, {}};
        auto [b_prior, p0] = filter_from_history(prior, head, model);
        (void)p0;
        auto [b_anchor, a0] = filter_from_history(anchor, head, model);
        (void)a0;
        Frame frame{std::move(b_prior), std::move(b_anchor), w_prior};
        std::vector<int> obs{y0};
        std::vector<int> acts;
        descend(frame, obs, acts);
    }
}

}  // namespace detail

/// Exact expectation by enumerating all |Y|^(N+1) observation sequences,
/// weighting each by its true probability under the prior and policy.
inline StabilityEstimate exact_filter_stability(const PomdpModel& model, const Belief& prior,
                                                const Belief& anchor, const HistoryPolicy& policy,
                                                int N, std::uint64_t capacity = 10'000'000) {
    std::vector<detail::HistoryLeg> legs;
    detail::enumerate_filter_pairs(
        model, prior, anchor, policy, N, capacity,
        [&](const Belief& from_prior, const Belief& from_anchor, double weight) {
            legs.push_back({weight, tv_distance(from_prior, from_anchor),
                            bl_distance(from_prior, from_anchor, model.state_metric)});
        });

    StabilityEstimate est;
    est.N = N;
    est.mode = StabilityEstimate::Mode::Exact;
    est.samples = legs.size();
    for (const auto& leg : legs) {
        est.mean_tv += leg.weight * leg.tv;
        est.mean_bl += leg.weight * leg.bl;
    }
    return est;
}

/// Total probability mass the exact enumeration covers (diagnostic; equals 1
/// up to round-off by the law of total probability).
inline double exact_enumeration_mass(const PomdpModel& model, const Belief& prior,
                                     const Belief& anchor, const HistoryPolicy& policy, int N,
                                     std::uint64_t capacity = 10'000'000) {
    double mass = 0.0;
    detail::enumerate_filter_pairs(model, prior, anchor, policy, N, capacity,
                                   [&](const Belief&, const Belief&, double w) { mass += w; });
    return mass;
}

/// Monte Carlo estimate of the same expectation: simulates the hidden chain
/// from the prior under the policy, runs both filters on the realized
/// (y, u) sequence, and averages the distances at time N. Per-sample RNG
/// streams are seeded with splitmix64(seed ^ index), so the estimate is
/// independent of sampling parallelism.
inline StabilityEstimate mc_filter_stability(const PomdpModel& model, const Belief& prior,
                                             const Belief& anchor, const HistoryPolicy& policy,
                                             int N, std::uint64_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("samples must be at least 1");
    std::vector<double> tv(samples, 0.0), bl(samples, 0.0);
    parallel_for(samples, [&](std::size_t s) {
        Rng rng = Rng::for_sample(seed, s);
        std::vector<int> obs, acts;
        int x = rng.categorical(prior.weights);
        obs.push_back(rng.categorical(model.channel[static_cast<std::size_t>(x)]));
        for (int k = 0; k < N; ++k) {
            const int u = policy(obs, acts);
            x = rng.categorical(model.transition[static_cast<std::size_t>(u)][static_cast<std::size_t>(x)]);
            acts.push_back(u);
            obs.push_back(rng.categorical(model.channel[static_cast<std::size_t>(x)]));
        }
        HistoryWindow w{obs, acts};
        auto [from_prior, p_] = filter_from_history(prior, w, model);
        (void)p_;
        auto [from_anchor, a_] = filter_from_history(anchor, w, model);
        (void)a_;
        tv[s] = tv_distance(from_prior, from_anchor);
        bl[s] = bl_distance(from_prior, from_anchor, model.state_metric);
    });

    StabilityEstimate est;
    est.N = N;
    est.mode = StabilityEstimate::Mode::MonteCarlo;
    est.samples = samples;
    double sum_tv = 0.0, sum_bl = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        sum_tv += tv[s];
        sum_bl += bl[s];
    }
    est.mean_tv = sum_tv / static_cast<double>(samples);
    est.mean_bl = sum_bl / static_cast<double>(samples);
    if (samples > 1) {
        double var_tv = 0.0, var_bl = 0.0;
        for (std::uint64_t s = 0; s < samples; ++s) {
            var_tv += (tv[s] - est.mean_tv) * (tv[s] - est.mean_tv);
            var_bl += (bl[s] - est.mean_bl) * (bl[s] - est.mean_bl);
        }
        var_tv /= static_cast<double>(samples - 1);
        var_bl /= static_cast<double>(samples - 1);
        est.std_error_tv = std::sqrt(var_tv / static_cast<double>(samples));
        est.std_error_bl = std::sqrt(var_bl / static_cast<double>(samples));
    }
    return est;
}

/// Requires every anchor-null state to be prior-null (exact zero-support
/// comparison); throws AbsoluteContinuityViolated naming the first offender.
inline void require_absolutely_continuous(const Belief& prior, const Belief& anchor) {
    for (std::size_t x = 0; x < anchor.size(); ++x)
        if (anchor[x] == 0.0 && prior[x] != 0.0) throw AbsoluteContinuityViolated(x);
}

struct DecayCurvePoint {
    int N = 0;
    StabilityEstimate estimate;
    double envelope = 0.0;  // 2 alpha^N
};

/// Per-N stability estimates next to the theoretical envelope 2 alpha^N.
inline std::vector<DecayCurvePoint> stability_decay_curve(
    const PomdpModel& model, const Belief& prior, const Belief& anchor,
    const HistoryPolicy& policy, int n_max, StabilityEstimate::Mode mode,
    std::uint64_t samples = 10000, std::uint64_t seed = 0) {
    require_absolutely_continuous(prior, anchor);
    const double a = alpha(model);
    std::vector<DecayCurvePoint> curve;
    double envelope = 2.0;
    for (int n = 0; n <= n_max; ++n) {
        DecayCurvePoint point;
        point.N = n;
        point.estimate = mode == StabilityEstimate::Mode::Exact
                             ? exact_filter_stability(model, prior, anchor, policy, n)
                             : mc_filter_stability(model, prior, anchor, policy, n, samples,
                                                   splitmix64(seed ^ static_cast<std::uint64_t>(n)));
        point.envelope = envelope;
        curve.push_back(point);
        envelope *= a;
    }
    return curve;
}

/// Finite under-approximation of the uniform filter-mismatch bound: the max,
/// over the supplied priors, every action sequence, and every observation
/// sequence consistent with the prior, of the TV distance between the two
/// filters. The genuine bound takes a supremum over all of P(X); restricting
/// to a finite prior set can only underestimate it.
inline double approx_uniform_L_TV(const PomdpModel& model, const Belief& anchor, int N,
                                  const std::vector<Belief>& prior_set,
                                  std::uint64_t capacity = 10'000'000) {
    if (prior_set.empty()) throw std::invalid_argument("prior_set must be non-empty");
    std::uint64_t action_seqs = 1;
    for (int k = 0; k < N; ++k) {
        if (action_seqs > capacity / static_cast<std::uint64_t>(model.n_actions))
            throw CapacityExceeded(0, capacity);
        action_seqs *= static_cast<std::uint64_t>(model.n_actions);
    }

    double worst = 0.0;
    for (const Belief& prior : prior_set) {
        require_absolutely_continuous(prior, anchor);
        for (std::uint64_t a_rank = 0; a_rank < action_seqs; ++a_rank) {
            std::vector<int> acts(static_cast<std::size_t>(N), 0);
            std::uint64_t rest = a_rank;
            for (int k = N - 1; k >= 0; --k) {
                acts[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::uint64_t>(model.n_actions));
                rest /= static_cast<std::uint64_t>(model.n_actions);
            }
            std::size_t pos = 0;
            HistoryPolicy fixed_sequence = [&acts, &pos](const std::vector<int>&,
                                                         const std::vector<int>& taken) {
                pos = taken.size();
                return acts[pos];
            };
            detail::enumerate_filter_pairs(
                model, prior, anchor, fixed_sequence, N, capacity,
                [&](const Belief& from_prior, const Belief& from_anchor, double) {
                    worst = std::max(worst, tv_distance(from_prior, from_anchor));
                });
        }
    }
    return worst;
}

}  // namespace finwin
