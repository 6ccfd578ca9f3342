#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support/helpers.hpp"

#include "bigbatch/batching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace bigbatch;

namespace {

bool all_distinct(const std::vector<Index>& v) {
    std::set<Index> s(v.begin(), v.end());
    return s.size() == v.size();
}

}  // namespace

TEST_CASE("draw_batch: full draw is a permutation, draws are sorted and distinct") {
    Rng rng(1);
    std::vector<Index> full = draw_batch(rng, 200, 200);
    std::vector<Index> expect(200);
    std::iota(expect.begin(), expect.end(), Index{0});
    CHECK(full == expect);  // ascending by contract, so equality with iota

    for (int round = 0; round < 50; ++round) {
        const Index n = 3 + static_cast<Index>(uniform_index(rng, 400));
        const Index k = 1 + static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        std::vector<Index> batch = draw_batch(rng, n, k);
        REQUIRE(static_cast<Index>(batch.size()) == k);
        CHECK(std::is_sorted(batch.begin(), batch.end()));
        CHECK(all_distinct(batch));
        CHECK(batch.front() >= 0);
        CHECK(batch.back() < n);
    }
    CHECK_THROWS_AS(draw_batch(rng, 5, 6), std::invalid_argument);
}

TEST_CASE("draw_batch: identical seeds give identical draws") {
    Rng a(42), b(42);
    for (int i = 0; i < 10; ++i) CHECK(draw_batch(a, 1000, 37) == draw_batch(b, 1000, 37));
}

TEST_CASE("draw_batch: per-index frequency is uniform over many draws") {
    const Index n = 10000;
    const Index k = 100;
    const int draws = 10000;
    Rng rng(2024);
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    for (int r = 0; r < draws; ++r)
        for (Index i : draw_batch(rng, n, k)) ++counts[static_cast<std::size_t>(i)];

    // Each index lands in a draw with probability K/n = 0.01, so counts are
    // Binomial(draws, 0.01): mean 100, sd ~ 9.95. A literal 3-sigma band per
    // index would flag ~27 of the 10^4 indices by chance alone, so the
    // per-index band is widened to 5 sigma (simultaneous over 10^4 tests)
    // and the 3-sigma claim is checked in aggregate.
    const double p = static_cast<double>(k) / static_cast<double>(n);
    const double mean = draws * p;
    const double sd = std::sqrt(draws * p * (1.0 - p));
    int within3 = 0;
    double chi2 = 0.0;
    for (int c : counts) {
        const double z = (c - mean) / sd;
        CHECK(std::abs(z) < 5.0);
        if (std::abs(z) < 3.0) ++within3;
        chi2 += z * z;
    }
    CHECK(within3 > 0.99 * static_cast<double>(n));
    CHECK(std::abs(chi2 / static_cast<double>(n) - 1.0) < 0.06);

    // Total mass is exact: every draw contributes exactly k indices.
    CHECK(std::accumulate(counts.begin(), counts.end(), 0LL) ==
          static_cast<long long>(draws) * k);
}

TEST_CASE("extend_batch: cardinality, prefix preservation, complement errors") {
    Rng rng(3);
    BatchState state;
    state.indices = draw_batch(rng, 100, 20);
    const std::vector<Index> prefix = state.indices;

    extend_batch(rng, state, 0, 100);
    CHECK(state.indices == prefix);

    for (int round = 0; round < 3; ++round) extend_batch(rng, state, 10, 100);
    CHECK(state.indices.size() == 50);
    CHECK(all_distinct(state.indices));
    CHECK(std::equal(prefix.begin(), prefix.end(), state.indices.begin()));

    BatchState nearly;
    nearly.indices.resize(99);
    std::iota(nearly.indices.begin(), nearly.indices.end(), Index{0});
    extend_batch(rng, nearly, 1, 100);
    CHECK(nearly.indices.size() == 100);
    CHECK(nearly.indices.back() == 99);

    CHECK_THROWS_AS(extend_batch(rng, nearly, 1, 100), std::invalid_argument);
}

TEST_CASE("extend_batch: new members are uniform over the complement") {
    const Index n = 100;
    const int trials = 20000;
    Rng rng(505);
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    for (int r = 0; r < trials; ++r) {
        BatchState state;
        state.indices.resize(50);
        std::iota(state.indices.begin(), state.indices.end(), Index{0});
        extend_batch(rng, state, 1, n);
        ++counts[static_cast<std::size_t>(state.indices.back())];
    }
    for (Index i = 0; i < 50; ++i) CHECK(counts[static_cast<std::size_t>(i)] == 0);
    const double mean = trials / 50.0;
    const double sd = std::sqrt(trials * (1.0 / 50.0) * (49.0 / 50.0));
    for (Index i = 50; i < n; ++i)
        CHECK(std::abs(counts[static_cast<std::size_t>(i)] - mean) < 5.0 * sd);
}

TEST_CASE("estimate_variance: exact small cases and the two-sample rule") {
    const Vec g1 = (Vec(1) << 1.0).finished();
    const Vec g2 = (Vec(1) << 2.0).finished();
    const Vec g3 = (Vec(1) << 3.0).finished();
    const Vec mean = (Vec(1) << 2.0).finished();
    CHECK(estimate_variance({g1, g2, g3}, mean) == 1.0);

    const Vec z = Vec::Zero(3);
    Rng rng(9);
    const Vec g = testsupport::random_vec(rng, 3);
    CHECK(estimate_variance({g, g, g}, g) == 0.0);
    CHECK(estimate_variance({g, -g}, z) == doctest::Approx(2.0 * g.squaredNorm()).epsilon(1e-14));

    CHECK_THROWS_AS(estimate_variance({g1}, mean), std::invalid_argument);
}

TEST_CASE("estimate_variance is unbiased for the corpus gradient variance") {
    // Sampling without replacement: E[s^2] equals the corpus variance taken
    // with the N-1 divisor.
    Problem p = generate_quadratic(500, 3, 1.0, 0.3, Vec::Zero(3), 31);
    Rng rng(32);
    const Vec x = testsupport::random_vec(rng, 3);

    Vec corpus_mean = Vec::Zero(3);
    std::vector<Vec> grads;
    for (Index i = 0; i < p.n(); ++i) {
        grads.push_back(sample_loss(p, x, i).gradient);
        corpus_mean += grads.back();
    }
    corpus_mean /= static_cast<double>(p.n());
    const double corpus_var = estimate_variance(grads, corpus_mean);

    const int reps = 4000;
    std::vector<double> estimates;
    estimates.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        BatchState b = make_batch_state(p, x, draw_batch(rng, p.n(), 10));
        estimates.push_back(b.var_est);
    }
    double mean_est = 0.0;
    for (double v : estimates) mean_est += v;
    mean_est /= reps;
    double sd = 0.0;
    for (double v : estimates) sd += (v - mean_est) * (v - mean_est);
    sd = std::sqrt(sd / (reps - 1));
    const double se = sd / std::sqrt(static_cast<double>(reps));
    CHECK(std::abs(mean_est - corpus_var) < 3.0 * se);
}

TEST_CASE("make_batch_state assembles sums, mean, and variance consistently") {
    Problem p = testsupport::make_random_logistic(60, 4, 61);
    Rng rng(6);
    const Vec x = testsupport::random_vec(rng, 4);
    BatchState state = make_batch_state(p, x, draw_batch(rng, p.n(), 12));
    REQUIRE(state.size() == 12);
    REQUIRE(state.grads.size() == 12);

    Vec sum = Vec::Zero(4);
    for (const Vec& g : state.grads) sum += g;
    CHECK((state.grad_sum - sum).norm() == 0.0);
    CHECK((state.mean_grad - state.grad_sum / 12.0).norm() == 0.0);
    CHECK(state.var_est == doctest::Approx(estimate_variance(state.grads, state.mean_grad))
                               .epsilon(1e-15));
    CHECK_THROWS_AS(make_batch_state(p, x, {Index{3}}), std::invalid_argument);
}

TEST_CASE("growth: noiseless gradients exit immediately, zero gradients cap at n") {
    const Vec center = Vec::Zero(3);
    Problem sharp = generate_quadratic(80, 3, 1.0, 0.0, center, 5);
    Rng rng(7);
    const Vec away = (Vec(3) << 2.0, 0.0, 0.0).finished();
    BatchState state = make_batch_state(sharp, away, draw_batch(rng, 80, 10));
    GrowthPolicy policy;
    const GrowResult r = grow_until_condition(sharp, away, state, policy, rng);
    CHECK(state.size() == 10);
    CHECK(r.added_evals == 0);
    CHECK_FALSE(r.grew);
    CHECK_FALSE(r.cap_reached);

    // At the exact minimizer of a noiseless problem every gradient vanishes;
    // no batch can certify signal, so growth runs to the cap.
    BatchState flat = make_batch_state(sharp, center, draw_batch(rng, 80, 10));
    const GrowResult cap = grow_until_condition(sharp, center, flat, policy, rng);
    CHECK(flat.size() == 80);
    CHECK(cap.cap_reached);
    CHECK(cap.added_evals == 70);
}

TEST_CASE("growth: exit state is internally consistent and satisfies the test") {
    Problem p = testsupport::make_random_logistic(400, 5, 71);
    Rng rng(8);
    GrowthPolicy policy;
    policy.theta = 0.6;
    Rng xrng(9);
    for (int round = 0; round < 5; ++round) {
        const Vec x = testsupport::random_vec(xrng, 5);
        BatchState state = make_batch_state(p, x, draw_batch(rng, p.n(), 10));
        const GrowResult r = grow_until_condition(p, x, state, policy, rng);
        CHECK(all_distinct(state.indices));
        REQUIRE(state.grads.size() == state.indices.size());

        BatchState fresh = make_batch_state(p, x, state.indices);
        CHECK((state.mean_grad - fresh.mean_grad).norm() < 1e-12);
        CHECK(state.var_est == doctest::Approx(fresh.var_est).epsilon(1e-9));

        const double k = static_cast<double>(state.size());
        const double signal = policy.theta * policy.theta * state.mean_grad.squaredNorm();
        if (!r.cap_reached) {
            CHECK(signal > state.var_est / k);
            // The weaker published form follows because theta <= 1.
            CHECK(state.mean_grad.squaredNorm() >
                  policy.theta * policy.theta * state.var_est / k);
        } else {
            CHECK(state.size() == p.n());
        }
    }
}

TEST_CASE("growth: smaller theta and weaker signal both demand larger batches") {
    const Index n = 2000;
    Problem p = generate_quadratic(n, 5, 1.0, 0.5, Vec::Zero(5), 77);
    const auto median_k = [&](double theta, double distance) {
        GrowthPolicy policy;
        policy.theta = theta;
        std::vector<double> ks;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(seed);
            Vec x = Vec::Zero(5);
            x[0] = distance;
            BatchState state = make_batch_state(p, x, draw_batch(rng, n, 10));
            grow_until_condition(p, x, state, policy, rng);
            ks.push_back(static_cast<double>(state.size()));
        }
        return testsupport::median(ks);
    };

    // Distance sweep: closer to the optimum the gradient signal shrinks, so
    // the noise test needs more samples.
    const double far = median_k(1.0, 10.0);
    const double mid = median_k(1.0, 1.0);
    const double near = median_k(1.0, 0.1);
    CHECK(far <= mid);
    CHECK(mid <= near);

    // Tightening theta at a fixed iterate also grows the batch.
    CHECK(median_k(0.3, 1.0) >= median_k(1.0, 1.0));
}

TEST_CASE("growth increments scale with the batch and clamp at n") {
    GrowthPolicy policy;
    policy.increment_fraction = 0.1;
    CHECK(policy.increment(5) == 1);
    CHECK(policy.increment(10) == 1);
    CHECK(policy.increment(11) == 2);
    CHECK(policy.increment(100) == 10);
    policy.increment_fraction = 1.0;
    CHECK(policy.increment(64) == 64);

    GrowthPolicy bad;
    bad.theta = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.theta = 0.5;
    bad.increment_fraction = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
