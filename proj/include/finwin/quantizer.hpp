#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "finwin/belief.hpp"
#include "finwin/errors.hpp"
#include "finwin/metrics.hpp"
#include "finwin/model.hpp"
#include "finwin/parallel.hpp"

namespace finwin {

/// Number of length-N histories: |Y|^(N+1) * |U|^N. Returns nullopt on
/// overflow past `limit`.
inline std::optional<std::uint64_t> history_count(const PomdpModel& m, int window_size,
                                                  std::uint64_t limit) {
    std::uint64_t total = 1;
    auto mul = [&](std::uint64_t f) {
        if (f != 0 && total > limit / f) return false;
        total *= f;
        return true;
    };
    for (int k = 0; k <= window_size; ++k)
        if (!mul(static_cast<std::uint64_t>(m.n_obs))) return std::nullopt;
    for (int k = 0; k < window_size; ++k)
        if (!mul(static_cast<std::uint64_t>(m.n_actions))) return std::nullopt;
    return total;
}

/// Histories are enumerated lexicographically with the observation digits
/// outer (most significant) and the action digits inner, both ascending and
/// earliest digit most significant. These helpers convert between a window
/// and its rank in that enumeration.
inline std::uint64_t window_rank(const HistoryWindow& w, const PomdpModel& m) {
    std::uint64_t obs_rank = 0;
    for (int y : w.observations) obs_rank = obs_rank * static_cast<std::uint64_t>(m.n_obs) + static_cast<std::uint64_t>(y);
    std::uint64_t act_rank = 0;
    std::uint64_t act_span = 1;
    for (int u : w.actions) {
        act_rank = act_rank * static_cast<std::uint64_t>(m.n_actions) + static_cast<std::uint64_t>(u);
        act_span *= static_cast<std::uint64_t>(m.n_actions);
    }
    return obs_rank * act_span + act_rank;
}

inline HistoryWindow window_from_rank(std::uint64_t rank, int window_size, const PomdpModel& m) {
    std::uint64_t act_span = 1;
    for (int k = 0; k < window_size; ++k) act_span *= static_cast<std::uint64_t>(m.n_actions);
    std::uint64_t obs_rank = rank / act_span;
    std::uint64_t act_rank = rank % act_span;

    HistoryWindow w;
    w.observations.assign(static_cast<std::size_t>(window_size) + 1, 0);
    w.actions.assign(static_cast<std::size_t>(window_size), 0);
    for (int k = window_size; k >= 0; --k) {
        w.observations[static_cast<std::size_t>(k)] = static_cast<int>(obs_rank % static_cast<std::uint64_t>(m.n_obs));
        obs_rank /= static_cast<std::uint64_t>(m.n_obs);
    }
    for (int k = window_size - 1; k >= 0; --k) {
        w.actions[static_cast<std::size_t>(k)] = static_cast<int>(act_rank % static_cast<std::uint64_t>(m.n_actions));
        act_rank /= static_cast<std::uint64_t>(m.n_actions);
    }
    return w;
}

/// Rank of the window obtained by sliding: drop the oldest (y,u) pair, append
/// the action just taken and the new observation.
inline std::uint64_t shift_window_rank(std::uint64_t rank, int window_size, int new_obs,
                                       int taken_action, const PomdpModel& m) {
    std::uint64_t act_span = 1;
    for (int k = 0; k < window_size; ++k) act_span *= static_cast<std::uint64_t>(m.n_actions);
    std::uint64_t obs_span = 1;
    for (int k = 0; k < window_size; ++k) obs_span *= static_cast<std::uint64_t>(m.n_obs);

    std::uint64_t obs_rank = rank / act_span;
    std::uint64_t act_rank = rank % act_span;
    obs_rank = (obs_rank % obs_span) * static_cast<std::uint64_t>(m.n_obs) + static_cast<std::uint64_t>(new_obs);
    if (window_size > 0) {
        const std::uint64_t act_tail = act_span / static_cast<std::uint64_t>(m.n_actions);
        act_rank = (act_rank % act_tail) * static_cast<std::uint64_t>(m.n_actions) + static_cast<std::uint64_t>(taken_action);
    }
    return obs_rank * act_span + act_rank;
}

/// The finite belief set obtained by Bayes-updating the anchor along every
/// consistent length-N history.
struct QuantizedBeliefSet {
    struct Entry {
        HistoryWindow history;
        Belief belief;
        double reach_probability = 0.0;  // observation-likelihood product from the anchor
        std::uint64_t rank = 0;          // position in the full lexicographic enumeration
    };

    int window_size = 0;
    std::vector<Entry> entries;
    Belief anchor;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }

    /// Entry index for a full-enumeration rank, if that history survived.
    std::optional<std::size_t> index_of_rank(std::uint64_t rank) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), rank,
                                   [](const Entry& e, std::uint64_t r) { return e.rank < r; });
        if (it == entries.end() || it->rank != rank) return std::nullopt;
        return static_cast<std::size_t>(it - entries.begin());
    }
};

struct QuantizerOptions {
    double prune_threshold = 0.0;      // keep histories with likelihood product strictly above
    std::uint64_t capacity = 10'000'000;
    bool dedup = false;                // merge entries closer than 1e-10 in BL distance
};

/// Enumerates every length-N history, folds the anchor through the filter,
/// and keeps the consistent ones. The actions in a history are free
/// variables, so the pruning weight is the observation-likelihood product
/// alone. Entry order always equals the sequential lexicographic order.
inline QuantizedBeliefSet build_quantized_set(const PomdpModel& model, int window_size,
                                              const QuantizerOptions& options = {}) {
    if (window_size < 0) throw std::invalid_argument("window size must be nonnegative");
    const auto total = history_count(model, window_size, options.capacity);
    if (!total) throw CapacityExceeded(0, options.capacity);
    if (*total > options.capacity) throw CapacityExceeded(*total, options.capacity);

    const Belief anchor(model.reference_prior);
    std::vector<std::optional<QuantizedBeliefSet::Entry>> slots(*total);
    parallel_for(*total, [&](std::size_t r) {
        HistoryWindow w = window_from_rank(r, window_size, model);
        try {
            auto [belief, path_probability] = filter_from_history(anchor, w, model);
            if (path_probability > options.prune_threshold)
                slots[r] = QuantizedBeliefSet::Entry{std::move(w), std::move(belief),
                                                     path_probability, r};
        } catch (const ZeroLikelihood&) {
            // inconsistent history: dropped
        }
    });

    QuantizedBeliefSet set;
    set.window_size = window_size;
    set.anchor = anchor;
    for (auto& slot : slots)
        if (slot) set.entries.push_back(std::move(*slot));

    if (options.dedup) {
        std::vector<QuantizedBeliefSet::Entry> unique;
        for (auto& e : set.entries) {
            bool merged = false;
            for (auto& kept : unique)
                if (bl_distance(e.belief, kept.belief, model.state_metric) < 1e-10) {
                    kept.reach_probability += e.reach_probability;
                    merged = true;
                    break;
                }
            if (!merged) unique.push_back(std::move(e));
        }
        set.entries = std::move(unique);
    }
    return set;
}

/// Index of the BL-nearest entry; exact ties go to the lowest index.
inline std::size_t nearest_neighbor(const Belief& z, const QuantizedBeliefSet& set,
                                    const Matrix& metric) {
    if (set.empty()) throw EmptySet();
    std::size_t best = 0;
    double best_distance = bl_distance(z, set.entries[0].belief, metric);
    for (std::size_t i = 1; i < set.entries.size(); ++i) {
        const double d = bl_distance(z, set.entries[i].belief, metric);
        if (d < best_distance) {
            best_distance = d;
            best = i;
        }
    }
    return best;
}

/// BL distance from z to its nearest entry.
inline double quantization_loss(const Belief& z, const QuantizedBeliefSet& set,
                                const Matrix& metric) {
    if (set.empty()) throw EmptySet();
    return bl_distance(z, set.entries[nearest_neighbor(z, set, metric)].belief, metric);
}

}  // namespace finwin
