#pragma once

#include "bigbatch/dataset.hpp"
#include "bigbatch/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bigbatch {

enum class ProblemKind { Logistic, LeastSquares, SyntheticQuadratic };

ProblemKind parse_problem_kind(const std::string& name);
std::string to_string(ProblemKind kind);

// Finite-sum objective: the full loss is the mean of per-sample losses.
//
//   Logistic:           f(x; a_i, b_i) = log(1 + exp(-b_i a_i^T x)) + lambda ||x||^2
//   LeastSquares:       f(x; a_i, b_i) = (a_i^T x - b_i)^2 + lambda ||x||^2
//   SyntheticQuadratic: f(x; phi_i)    = (nu/2) ||x - phi_i||^2
//
// For the quadratic kind the feature rows hold the shifted centers phi_i and
// labels are unused.
struct Problem {
    ProblemKind kind;
    Dataset data;
    double lambda = 0.0;
    double nu = 0.0;     // quadratic curvature
    double sigma = 0.0;  // quadratic center spread
    Vec x_star;          // quadratic center mean

    Index n() const { return data.n(); }
    Index dim() const { return data.dim(); }
};

// Logistic labels must be in {-1,+1}; {0,1} labels are remapped, anything
// else is a ConfigError.
Problem make_logistic(Dataset data, double lambda);
Problem make_least_squares(Dataset data, double lambda);

// phi_i = x_star + sigma * xi_i with xi_i standard normal, deterministic for
// a given seed. sigma = 0 collapses every center onto x_star.
Problem generate_quadratic(Index n, Index d, double nu, double sigma, const Vec& x_star,
                           std::uint64_t seed);

struct GradSample {
    double value;
    Vec gradient;
};

// Loss and gradient of one sample; throws on out-of-range index or
// non-finite iterate.
GradSample sample_loss(const Problem& problem, const Vec& x, Index i);
double sample_value(const Problem& problem, const Vec& x, Index i);

// Arithmetic mean of sample losses over `indices`, accumulated sequentially
// in the order given.
GradSample batch_loss(const Problem& problem, const Vec& x, std::span<const Index> indices);
double batch_value(const Problem& problem, const Vec& x, std::span<const Index> indices);

// Mean over all samples in ascending index order.
GradSample full_loss(const Problem& problem, const Vec& x);
double full_value(const Problem& problem, const Vec& x);

}  // namespace bigbatch
