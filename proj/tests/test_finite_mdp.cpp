#include "doctest.h"

#include <random>

#include "finwin/finite_mdp.hpp"

#include "helpers.hpp"

using namespace finwin;

namespace {

const PomdpModel kCase1 = build_machine_repair(0.3, 0.2, 0.1, 5.0, 1.0, 0.8);

/// One-state one-action model with unit cost: the discounted value is the
/// plain geometric series.
FiniteBeliefMdp trivial_mdp(double cost, double beta) {
    FiniteBeliefMdp mdp;
    mdp.states.window_size = 0;
    mdp.states.anchor = Belief({1.0});
    mdp.states.entries.push_back({{{0}, {}}, Belief({1.0}), 1.0, 0});
    mdp.costs = {{cost}};
    mdp.transitions = {{{{1.0, 0}}}};
    mdp.discount = beta;
    return mdp;
}

void check_fixed_point(const FiniteBeliefMdp& mdp, const SolvedPolicy& solved, double tolerance) {
    for (std::size_t i = 0; i < mdp.state_count(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int u = 0; u < mdp.action_count(); ++u) {
            double q = mdp.costs[i][static_cast<std::size_t>(u)];
            for (const auto& br : mdp.transitions[i][static_cast<std::size_t>(u)])
                q += mdp.discount * br.probability * solved.values[br.successor];
            best = std::min(best, q);
        }
        CHECK(std::abs(solved.values[i] - best) <= tolerance);
    }
}

}  // namespace

TEST_CASE("every state has one branch per observation when the channel is positive") {
    const auto set = build_quantized_set(kCase1, 1);
    const auto mdp = build_finite_mdp(set, kCase1);
    for (std::size_t i = 0; i < mdp.state_count(); ++i)
        for (int u = 0; u < 2; ++u) {
            const auto& branches = mdp.transitions[i][static_cast<std::size_t>(u)];
            CHECK(branches.size() == 2);
            double total = 0.0;
            for (const auto& br : branches) {
                CHECK(br.successor < mdp.state_count());
                CHECK(br.probability >= 0.0);
                total += br.probability;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
}

TEST_CASE("costs are the expected stage costs of the quantized beliefs") {
    const auto set = build_quantized_set(kCase1, 1);
    const auto mdp = build_finite_mdp(set, kCase1);
    for (std::size_t i = 0; i < mdp.state_count(); ++i)
        for (int u = 0; u < 2; ++u)
            CHECK(mdp.costs[i][static_cast<std::size_t>(u)] ==
                  doctest::Approx(expected_cost(set.entries[i].belief, u, kCase1)).epsilon(1e-12));
}

TEST_CASE("noiseless point-mass states transition to matching point masses") {
    // epsilon = 0, theta = 0: u=0 keeps the state put, so the N=0 point-mass
    // states map straight back onto themselves
    const auto m = build_machine_repair(0.0, 0.2, 0.0, 5.0, 1.0, 0.8);
    const auto set = build_quantized_set(m, 0);
    REQUIRE(set.size() == 2);  // point masses at 0 and 1
    const auto mdp = build_finite_mdp(set, m);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& branches = mdp.transitions[i][0];
        REQUIRE(branches.size() == 1);
        CHECK(branches[0].probability == doctest::Approx(1.0));
        CHECK(branches[0].successor == i);
    }
}

TEST_CASE("value iteration solves the geometric series") {
    const auto solved = value_iteration(trivial_mdp(1.0, 0.8), 1e-10);
    CHECK(solved.values[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(solved.residual <= 1e-10);
}

TEST_CASE("zero cost model has zero values") {
    const auto solved = value_iteration(trivial_mdp(0.0, 0.8), 1e-12);
    CHECK(solved.values[0] == 0.0);
    CHECK(solved.iteration_count >= 1);
}

TEST_CASE("two absorbing states against the closed form") {
    FiniteBeliefMdp mdp;
    mdp.states.window_size = 0;
    mdp.states.anchor = Belief({0.5, 0.5});
    mdp.states.entries.push_back({{{0}, {}}, Belief({1.0, 0.0}), 0.5, 0});
    mdp.states.entries.push_back({{{1}, {}}, Belief({0.0, 1.0}), 0.5, 1});
    mdp.costs = {{0.0}, {1.0}};
    mdp.transitions = {{{{1.0, 0}}}, {{{1.0, 1}}}};
    mdp.discount = 0.5;
    const auto solved = value_iteration(mdp, 1e-10);
    CHECK(solved.values[0] == doctest::Approx(0.0));
    CHECK(solved.values[1] == doctest::Approx(2.0).epsilon(1e-9));  // 1/(1-0.5)
}

TEST_CASE("residuals contract geometrically and the solution is a fixed point") {
    const auto set = build_quantized_set(kCase1, 2);
    const auto mdp = build_finite_mdp(set, kCase1);

    // replicate the sweep to watch the residual sequence
    std::vector<double> v(mdp.state_count(), 0.0), next(mdp.state_count(), 0.0);
    double previous_residual = -1.0;
    for (int it = 0; it < 60; ++it) {
        double residual = 0.0;
        for (std::size_t i = 0; i < mdp.state_count(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int u = 0; u < mdp.action_count(); ++u) {
                double q = mdp.costs[i][static_cast<std::size_t>(u)];
                for (const auto& br : mdp.transitions[i][static_cast<std::size_t>(u)])
                    q += mdp.discount * br.probability * v[br.successor];
                best = std::min(best, q);
            }
            next[i] = best;
            residual = std::max(residual, std::abs(next[i] - v[i]));
        }
        v.swap(next);
        if (previous_residual >= 0.0)
            CHECK(residual <= mdp.discount * previous_residual + 1e-12);
        previous_residual = residual;
    }

    const double tolerance = 1e-9;
    const auto solved = value_iteration(mdp, tolerance);
    check_fixed_point(mdp, solved, tolerance);
    for (double value : solved.values) {
        CHECK(value >= 0.0);
        CHECK(value <= kCase1.cost_sup() / (1.0 - kCase1.discount) + tolerance);
    }
}

TEST_CASE("scaling all costs scales values and keeps the policy") {
    const auto set = build_quantized_set(kCase1, 1);
    auto mdp = build_finite_mdp(set, kCase1);
    const auto base = value_iteration(mdp, 1e-11);
    const double lambda = 3.7;
    for (auto& row : mdp.costs)
        for (double& c : row) c *= lambda;
    const auto scaled = value_iteration(mdp, 1e-11);
    CHECK(scaled.policy == base.policy);
    for (std::size_t i = 0; i < base.values.size(); ++i)
        CHECK(scaled.values[i] == doctest::Approx(lambda * base.values[i]).epsilon(1e-7));
}

TEST_CASE("iteration cap raises NotConverged with the residual attached") {
    try {
        value_iteration(trivial_mdp(1.0, 0.999), 1e-12, 3);
        FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
        CHECK(e.iterations == 3);
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("window lookup matches the enumerated policy") {
    const auto set = build_quantized_set(kCase1, 1);
    const auto mdp = build_finite_mdp(set, kCase1);
    const auto solved = value_iteration(mdp, 1e-9);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const int a = finite_window_action(solved, mdp, set.entries[i].history, kCase1);
        CHECK(a == solved.policy[i]);
        // deterministic on repeat
        CHECK(finite_window_action(solved, mdp, set.entries[i].history, kCase1) == a);
    }
}

TEST_CASE("pruned window falls back to the nearest surviving state") {
    QuantizerOptions opt;
    opt.prune_threshold = 0.2;
    const auto set = build_quantized_set(kCase1, 1, opt);
    const auto full = build_quantized_set(kCase1, 1);
    REQUIRE(set.size() < full.size());
    const auto mdp = build_finite_mdp(set, kCase1);
    const auto solved = value_iteration(mdp, 1e-9);

    for (const auto& entry : full.entries) {
        if (set.index_of_rank(entry.rank)) continue;  // survived, not a fallback case
        const int a = finite_window_action(solved, mdp, entry.history, kCase1);
        // hand-rolled fallback: filter from the anchor, then nearest neighbor
        const auto [belief, p] = filter_from_history(set.anchor, entry.history, kCase1);
        (void)p;
        const std::size_t idx = nearest_neighbor(belief, set, kCase1.state_metric);
        CHECK(a == solved.policy[idx]);
    }
}

TEST_CASE("window of the wrong length is rejected") {
    const auto set = build_quantized_set(kCase1, 1);
    const auto mdp = build_finite_mdp(set, kCase1);
    const auto solved = value_iteration(mdp, 1e-9);
    CHECK_THROWS_AS(finite_window_action(solved, mdp, HistoryWindow{{0}, {}}, kCase1),
                    std::invalid_argument);
}
