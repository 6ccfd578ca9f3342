#pragma once

#include "bigbatch/harness.hpp"
#include "bigbatch/problem.hpp"
#include "bigbatch/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <vector>

namespace testsupport {

using bigbatch::Index;
using bigbatch::Mat;
using bigbatch::Problem;
using bigbatch::Vec;

// Central finite differences on the full objective; the reference all
// analytic gradients are judged against.
inline Vec fd_full_gradient(const Problem& problem, const Vec& x, double h = 1e-5) {
    Vec g(problem.dim());
    for (Index j = 0; j < problem.dim(); ++j) {
        Vec lo = x, hi = x;
        lo[j] -= h;
        hi[j] += h;
        g[j] = (bigbatch::full_value(problem, hi) - bigbatch::full_value(problem, lo)) / (2.0 * h);
    }
    return g;
}

inline Vec fd_sample_gradient(const Problem& problem, const Vec& x, Index i, double h = 1e-5) {
    Vec g(problem.dim());
    for (Index j = 0; j < problem.dim(); ++j) {
        Vec lo = x, hi = x;
        lo[j] -= h;
        hi[j] += h;
        g[j] = (bigbatch::sample_value(problem, hi, i) - bigbatch::sample_value(problem, lo, i)) /
               (2.0 * h);
    }
    return g;
}

inline Vec random_vec(bigbatch::Rng& rng, Index d, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(d);
    for (Index j = 0; j < d; ++j) v[j] = scale * normal(rng);
    return v;
}

inline Mat random_mat(bigbatch::Rng& rng, Index n, Index d, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat m(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = scale * normal(rng);
    return m;
}

// Gaussian features, labels drawn from a planted logistic model: learnable
// but not separable.
inline Problem make_random_logistic(Index n, Index d, std::uint64_t seed, double lambda = 0.0) {
    bigbatch::Rng rng(seed);
    bigbatch::Dataset data;
    data.features = random_mat(rng, n, d);
    const Vec w = random_vec(rng, d, 2.0 / std::sqrt(static_cast<double>(d)));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    data.labels = Vec(n);
    for (Index i = 0; i < n; ++i) {
        const double margin = data.features.row(i).dot(w);
        const double p = 1.0 / (1.0 + std::exp(-margin));
        data.labels[i] = uniform(rng) < p ? 1.0 : -1.0;
    }
    return bigbatch::make_logistic(std::move(data), lambda);
}

// Gaussian design with noisy planted responses.
inline Problem make_random_least_squares(Index n, Index d, std::uint64_t seed, double lambda = 0.0,
                                         double noise = 0.5) {
    bigbatch::Rng rng(seed);
    bigbatch::Dataset data;
    data.features = random_mat(rng, n, d);
    const Vec w = random_vec(rng, d);
    data.labels = data.features * w + noise * random_vec(rng, n);
    return bigbatch::make_least_squares(std::move(data), lambda);
}

struct EigBounds {
    double mu;
    double L;
};

// Exact spectrum of the least-squares Hessian (2/n) A^T A + 2 lambda I.
inline EigBounds ls_hessian_eigs(const Problem& problem) {
    const Mat& A = problem.data.features;
    Eigen::MatrixXd H = (2.0 / static_cast<double>(problem.n())) * (A.transpose() * A);
    H.diagonal().array() += 2.0 * problem.lambda;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

// Closed-form least-squares optimum from the normal equations.
inline Vec ls_optimum(const Problem& problem) {
    const Mat& A = problem.data.features;
    const double n = static_cast<double>(problem.n());
    Eigen::MatrixXd M = (A.transpose() * A) / n;
    M.diagonal().array() += problem.lambda;
    const Eigen::VectorXd rhs = A.transpose() * problem.data.labels / n;
    return M.ldlt().solve(rhs);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace testsupport
