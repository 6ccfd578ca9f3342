#pragma once

#include "bigbatch/problem.hpp"
#include "bigbatch/rng.hpp"
#include "bigbatch/types.hpp"

#include <vector>

namespace bigbatch {

// Batch growth control: starting size, relative increment, and the signal
// threshold theta. The batch stops growing once
//   theta^2 ||G_B||^2 > V_B / K
// i.e. the gradient estimate dominates its own sampling noise.
struct GrowthPolicy {
    double increment_fraction = 0.1;  // in (0, 1]
    double theta = 1.0;               // in (0, 1]

    Index increment(Index k) const;
    void validate() const;
};

// A sampled batch at a fixed iterate: member indices, their per-sample
// gradients, the running gradient sum in list order, the mean gradient G_B,
// and the sample variance estimate
//   V_B = (1/(K-1)) * sum_i ||g_i - G_B||^2.
struct BatchState {
    std::vector<Index> indices;
    std::vector<Vec> grads;
    Vec grad_sum;
    Vec mean_grad;
    double var_est = 0.0;

    Index size() const { return static_cast<Index>(indices.size()); }
};

// k distinct indices sampled uniformly from {0..n-1}, returned ascending.
std::vector<Index> draw_batch(Rng& rng, Index n, Index k);

// Appends delta new distinct indices drawn uniformly from the complement of
// the current batch. Existing entries are untouched; gradients for the new
// tail are the caller's responsibility. Throws if delta exceeds the
// complement.
void extend_batch(Rng& rng, BatchState& state, Index delta, Index n);

// Unbiased sample variance of the gradient cloud around `mean`; requires at
// least 2 gradients.
double estimate_variance(const std::vector<Vec>& grads, const Vec& mean);

// Evaluates every index of `indices` at x and assembles a consistent state.
BatchState make_batch_state(const Problem& problem, const Vec& x, std::vector<Index> indices);

struct GrowResult {
    long long added_evals = 0;  // gradient evaluations beyond the entry state
    bool cap_reached = false;   // K hit n without meeting the exit condition
    bool grew = false;
};

// Extends `state` until theta^2 ||G_B||^2 > V_B / K or K = n, evaluating
// only the newly added samples at x. Step size per extension is
// max(1, ceil(increment_fraction * K)), clamped at n - K.
GrowResult grow_until_condition(const Problem& problem, const Vec& x, BatchState& state,
                                const GrowthPolicy& policy, Rng& rng);

}  // namespace bigbatch
