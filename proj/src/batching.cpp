#include "bigbatch/batching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bigbatch {

Index GrowthPolicy::increment(Index k) const {
    const auto step = static_cast<Index>(std::ceil(increment_fraction * static_cast<double>(k)));
    return std::max<Index>(Index{1}, step);
}

void GrowthPolicy::validate() const {
    if (!(increment_fraction > 0.0) || !(increment_fraction <= 1.0))
        throw ConfigError("increment_fraction must be in (0, 1]");
    if (!(theta > 0.0) || !(theta <= 1.0)) throw ConfigError("theta must be in (0, 1]");
}

std::vector<Index> draw_batch(Rng& rng, Index n, Index k) {
    if (k < 0 || k > n) throw std::invalid_argument("batch size must be in [0, n]");
    // Floyd's sampling: uniform without replacement in k draws, no rejection.
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(k));
    for (Index t = n - k; t < n; ++t) {
        const auto j = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(t) + 1));
        if (chosen[static_cast<std::size_t>(j)]) {
            chosen[static_cast<std::size_t>(t)] = 1;
            out.push_back(t);
        } else {
            chosen[static_cast<std::size_t>(j)] = 1;
            out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void extend_batch(Rng& rng, BatchState& state, Index delta, Index n) {
    if (delta < 0) throw std::invalid_argument("negative extension");
    const Index k = state.size();
    if (k + delta > n) throw std::invalid_argument("extension exceeds the index complement");
    if (delta == 0) return;

    std::vector<char> member(static_cast<std::size_t>(n), 0);
    for (Index i : state.indices) member[static_cast<std::size_t>(i)] = 1;

    std::vector<Index> added;
    added.reserve(static_cast<std::size_t>(delta));
    const Index free = n - k;
    if (3 * delta >= free) {
        // Dense request: partial Fisher-Yates over the materialized complement.
        std::vector<Index> comp;
        comp.reserve(static_cast<std::size_t>(free));
        for (Index i = 0; i < n; ++i)
            if (!member[static_cast<std::size_t>(i)]) comp.push_back(i);
        for (Index i = 0; i < delta; ++i) {
            const auto j = i + static_cast<Index>(
                                   uniform_index(rng, static_cast<std::uint64_t>(free - i)));
            std::swap(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
            added.push_back(comp[static_cast<std::size_t>(i)]);
        }
    } else {
        // Sparse request: rejection sampling terminates quickly while the
        // complement holds at least two thirds of the indices.
        while (static_cast<Index>(added.size()) < delta) {
            const auto i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
            if (!member[static_cast<std::size_t>(i)]) {
                member[static_cast<std::size_t>(i)] = 1;
                added.push_back(i);
            }
        }
    }
    std::sort(added.begin(), added.end());
    state.indices.insert(state.indices.end(), added.begin(), added.end());
}

double estimate_variance(const std::vector<Vec>& grads, const Vec& mean) {
    if (grads.size() < 2) throw std::invalid_argument("variance estimate needs at least 2 gradients");
    double acc = 0.0;
    for (const Vec& g : grads) acc += (g - mean).squaredNorm();
    return acc / static_cast<double>(grads.size() - 1);
}

BatchState make_batch_state(const Problem& problem, const Vec& x, std::vector<Index> indices) {
    if (indices.size() < 2) throw std::invalid_argument("batch state needs at least 2 samples");
    BatchState state;
    state.indices = std::move(indices);
    state.grads.reserve(state.indices.size());
    state.grad_sum = Vec::Zero(problem.dim());
    for (Index i : state.indices) {
        state.grads.push_back(sample_loss(problem, x, i).gradient);
        state.grad_sum += state.grads.back();
    }
    state.mean_grad = state.grad_sum / static_cast<double>(state.size());
    state.var_est = estimate_variance(state.grads, state.mean_grad);
    return state;
}

GrowResult grow_until_condition(const Problem& problem, const Vec& x, BatchState& state,
                                const GrowthPolicy& policy, Rng& rng) {
    policy.validate();
    const Index n = problem.n();
    GrowResult result;
    while (true) {
        const Index k = state.size();
        const double signal = policy.theta * policy.theta * state.mean_grad.squaredNorm();
        const double noise = state.var_est / static_cast<double>(k);
        if (signal > noise) break;
        if (k >= n) {
            result.cap_reached = true;
            break;
        }
        const Index delta = std::min(policy.increment(k), n - k);
        extend_batch(rng, state, delta, n);
        for (Index pos = k; pos < state.size(); ++pos) {
            state.grads.push_back(sample_loss(problem, x, state.indices[static_cast<std::size_t>(pos)]).gradient);
            state.grad_sum += state.grads.back();
        }
        state.mean_grad = state.grad_sum / static_cast<double>(state.size());
        state.var_est = estimate_variance(state.grads, state.mean_grad);
        result.added_evals += delta;
        result.grew = true;
    }
    return result;
}

}  // namespace bigbatch
