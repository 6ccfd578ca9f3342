#pragma once

#include "bigbatch/types.hpp"

namespace bigbatch::theory {

// Constants of a smooth strongly convex objective as used by the rate
// predictions below. theta must lie strictly inside (0, 1); the batch noise
// amplification beta(theta) is undefined at theta = 1.
struct RateParams {
    double mu;         // strong convexity constant, > 0
    double L;          // gradient Lipschitz constant, >= mu
    double theta;      // batch noise threshold, in (0, 1)
    double Lz = 0.0;   // Lipschitz dependence of the gradient on the data, >= 0
    double c = 0.1;    // backtracking sufficient-decrease constant, in (0, 0.5]

    void validate() const;
};

// beta(theta) = (theta^2 + (1-theta)^2) / (1-theta)^2, defined on (0, 1).
double beta(double theta);

// One-step contraction factor gamma = 1 - 2 mu (alpha - L alpha^2 beta / 2)
// for fixed-stepsize big-batch descent; requires 0 <= alpha < 2/(L beta).
double linear_rate_gamma(const RateParams& params, double alpha);

// Backtracking variant: gamma = 1 - 2 c mu min(alpha0, 1/(2 beta L)).
double armijo_rate_gamma(const RateParams& params, double alpha0);

// Convex (non-strong) guarantee: suboptimality after t steps is at most
// 2 L beta dist0_sq / (t + 1).
double sublinear_bound(double L, double beta, double dist0_sq, long long t);

// Batch gradient error bound 4 Lz^2 trace_var_z / K, where Lz bounds the
// gradient's Lipschitz dependence on the data variable.
double variance_bound(double Lz, double trace_var_z, Index K);

// ||g_batch - g_true||^2 < ||g_batch||^2, the condition under which a batch
// step is guaranteed to be a descent direction.
bool descent_condition_holds(const Vec& g_batch, const Vec& g_true);

// Isotropic quadratic model with curvature nu, center spread sigma,
// dimension d, batch size K.
struct QuadModel {
    double nu;
    double sigma;
    Index d;
    Index K;

    void validate() const;
};

// Expected post-step loss at distance^2 = dist_sq from the center mean:
//   (nu/2) [ (1 - nu alpha)^2 dist_sq + (1 + nu^2 alpha^2 / K) d sigma^2 ].
double quad_expected_loss(const QuadModel& model, double alpha, double dist_sq);

// Noise-adjusted curvature stepsize floor (1 - theta^2) / nu for
// theta in [0, 1), valid whenever the batch noise ratio
// V_B/(K ||G_B||^2) is at most theta^2.
double bb_lower_bound(double nu, double theta);

}  // namespace bigbatch::theory
