#include "doctest.h"

#include <random>

#include "finwin/belief.hpp"
#include "finwin/model.hpp"

#include "helpers.hpp"

using namespace finwin;

namespace {
const PomdpModel kCase1 = build_machine_repair(0.3, 0.2, 0.1, 5.0, 1.0, 0.8);
}

TEST_CASE("predict pushes the belief through the kernel") {
    const Belief b({0.1, 0.9});
    const Belief out = predict(b, 0, kCase1);
    CHECK(out[0] == doctest::Approx(0.19).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.81).epsilon(1e-12));
}

TEST_CASE("identity kernel leaves any belief unchanged") {
    auto m = kCase1;
    m.transition[0] = {{1.0, 0.0}, {0.0, 1.0}};
    std::mt19937 gen(3);
    for (int i = 0; i < 100; ++i) {
        const Belief b(testutil::random_prob_vector(gen, 2));
        const Belief out = predict(b, 0, m);
        CHECK(out[0] == doctest::Approx(b[0]).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(b[1]).epsilon(1e-12));
    }
}

TEST_CASE("point mass prediction reads a kernel row") {
    const Belief b = Belief::point_mass(2, 1);
    const Belief out = predict(b, 0, kCase1);  // theta = 0.1
    CHECK(out[0] == doctest::Approx(0.1));
    CHECK(out[1] == doctest::Approx(0.9));
}

TEST_CASE("bayes update against hand-computed posterior") {
    const Belief b({0.1, 0.9});
    const auto [posterior, likelihood] = bayes_update(b, 0, 1, kCase1);
    // predicted (0.19, 0.81); unnormalized (0.19*0.3, 0.81*0.7) = (0.057, 0.567)
    CHECK(likelihood == doctest::Approx(0.624).epsilon(1e-12));
    CHECK(posterior[0] == doctest::Approx(0.057 / 0.624).epsilon(1e-12));
    CHECK(posterior[1] == doctest::Approx(0.567 / 0.624).epsilon(1e-12));
}

TEST_CASE("noiseless observation collapses to a point mass") {
    const auto m = build_machine_repair(0.0, 0.2, 0.1, 5.0, 1.0, 0.8);
    const Belief b({0.5, 0.5});
    const auto [posterior, likelihood] = bayes_update(b, 0, 1, m);
    (void)likelihood;
    CHECK(posterior[0] == 0.0);
    CHECK(posterior[1] == 1.0);
}

TEST_CASE("impossible observation raises ZeroLikelihood") {
    const auto m = build_machine_repair(0.0, 0.2, 0.1, 5.0, 1.0, 0.8);
    // (x=0, u=0) is absorbing and the channel is noiseless, so y=1 cannot occur
    const Belief b = Belief::point_mass(2, 0);
    CHECK_THROWS_AS(bayes_update(b, 0, 1, m), ZeroLikelihood);
}

TEST_CASE("bayes posterior stays a probability vector") {
    std::mt19937 gen(11);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const Belief b(testutil::random_prob_vector(gen, 2));
        const auto [posterior, likelihood] = bayes_update(b, coin(gen), coin(gen), kCase1);
        (void)likelihood;
        double sum = 0.0;
        for (double v : posterior.weights) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("observation likelihoods for the benchmark belief") {
    const Belief b({0.1, 0.9});
    const auto likes = obs_likelihoods(b, 0, kCase1);
    CHECK(likes[0] == doctest::Approx(0.376).epsilon(1e-12));
    CHECK(likes[1] == doctest::Approx(0.624).epsilon(1e-12));
}

TEST_CASE("uninformative channel gives uniform likelihoods") {
    const auto m = build_machine_repair(0.5, 0.2, 0.1, 5.0, 1.0, 0.8);
    std::mt19937 gen(5);
    for (int i = 0; i < 100; ++i) {
        const Belief b(testutil::random_prob_vector(gen, 2));
        const auto likes = obs_likelihoods(b, 0, m);
        CHECK(likes[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(likes[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("observation likelihoods sum to one") {
    std::mt19937 gen(13);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const Belief b(testutil::random_prob_vector(gen, 2));
        const auto likes = obs_likelihoods(b, coin(gen), kCase1);
        CHECK(likes[0] + likes[1] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("single-observation window corrects the prior through the channel") {
    const Belief prior({0.1, 0.9});
    for (int y0 = 0; y0 < 2; ++y0) {
        const auto [belief, p] = filter_from_history(prior, {{y0}, {}}, kCase1);
        const double w0 = 0.1 * kCase1.channel[0][static_cast<std::size_t>(y0)];
        const double w1 = 0.9 * kCase1.channel[1][static_cast<std::size_t>(y0)];
        CHECK(p == doctest::Approx(w0 + w1).epsilon(1e-12));
        CHECK(belief[0] == doctest::Approx(w0 / (w0 + w1)).epsilon(1e-12));
        CHECK(belief[1] == doctest::Approx(w1 / (w0 + w1)).epsilon(1e-12));
    }
}

TEST_CASE("two-observation filter equals bayes update of the one-observation filter") {
    const Belief prior({0.1, 0.9});
    for (int y0 = 0; y0 < 2; ++y0)
        for (int u0 = 0; u0 < 2; ++u0)
            for (int y1 = 0; y1 < 2; ++y1) {
                const auto [long_belief, long_p] =
                    filter_from_history(prior, {{y0, y1}, {u0}}, kCase1);
                const auto [short_belief, short_p] = filter_from_history(prior, {{y0}, {}}, kCase1);
                const auto [step_belief, like] = bayes_update(short_belief, u0, y1, kCase1);
                CHECK(long_p == doctest::Approx(short_p * like).epsilon(1e-12));
                CHECK(long_belief[0] == doctest::Approx(step_belief[0]).epsilon(1e-12));
                CHECK(long_belief[1] == doctest::Approx(step_belief[1]).epsilon(1e-12));
            }
}

TEST_CASE("path probabilities sum to one over all observation sequences") {
    const Belief prior({0.1, 0.9});
    const int N = 3;
    // actions fixed by an arbitrary deterministic rule; the observation
    // marginals then integrate to one
    double total = 0.0;
    for (int rank = 0; rank < (1 << (N + 1)); ++rank) {
        HistoryWindow w;
        for (int k = N; k >= 0; --k) w.observations.push_back((rank >> k) & 1);
        for (int k = 0; k < N; ++k) w.actions.push_back(w.observations[static_cast<std::size_t>(k)]);
        total += filter_from_history(prior, w, kCase1).second;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("expected cost is the cost-weighted belief") {
    const Belief half({0.5, 0.5});
    CHECK(expected_cost(half, 1, kCase1) == doctest::Approx(5.5));
    CHECK(expected_cost(Belief::point_mass(2, 0), 1, kCase1) == 6.0);
    CHECK(expected_cost(Belief::point_mass(2, 1), 0, kCase1) == 0.0);
    std::mt19937 gen(17);
    for (int i = 0; i < 100; ++i) {
        const Belief b(testutil::random_prob_vector(gen, 2));
        CHECK(expected_cost(b, 0, kCase1) == doctest::Approx(b[0]).epsilon(1e-12));
    }
}

TEST_CASE("total variation distance on two-point beliefs") {
    CHECK(tv_distance(Belief({1.0, 0.0}), Belief({0.0, 1.0})) == 2.0);
    CHECK(tv_distance(Belief({0.1, 0.9}), Belief({0.19, 0.81})) == doctest::Approx(0.18).epsilon(1e-12));
    const Belief b({0.3, 0.7});
    CHECK(tv_distance(b, b) == 0.0);
}
