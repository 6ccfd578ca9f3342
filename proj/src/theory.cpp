#include "bigbatch/theory.hpp"

#include <algorithm>
#include <cmath>

namespace bigbatch::theory {

void RateParams::validate() const {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be finite and > 0");
    if (!(L >= mu) || !std::isfinite(L)) throw ConfigError("L must be finite and >= mu");
    if (!(theta > 0.0) || !(theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
    if (!(Lz >= 0.0) || !std::isfinite(Lz)) throw ConfigError("Lz must be finite and >= 0");
    if (!(c > 0.0) || !(c <= 0.5)) throw ConfigError("c must lie in (0, 0.5]");
}

double beta(double theta) {
    if (!(theta > 0.0) || !(theta < 1.0)) throw ConfigError("beta(theta) needs theta in (0, 1)");
    const double one_minus = 1.0 - theta;
    return (theta * theta + one_minus * one_minus) / (one_minus * one_minus);
}

double linear_rate_gamma(const RateParams& params, double alpha) {
    params.validate();
    const double b = beta(params.theta);
    if (!(alpha >= 0.0) || !(alpha < 2.0 / (params.L * b)))
        throw ConfigError("alpha must lie in [0, 2/(L beta))");
    return 1.0 - 2.0 * params.mu * (alpha - params.L * alpha * alpha * b / 2.0);
}

double armijo_rate_gamma(const RateParams& params, double alpha0) {
    params.validate();
    if (!(alpha0 > 0.0)) throw ConfigError("alpha0 must be > 0");
    const double b = beta(params.theta);
    return 1.0 - 2.0 * params.c * params.mu * std::min(alpha0, 1.0 / (2.0 * b * params.L));
}

double sublinear_bound(double L, double beta, double dist0_sq, long long t) {
    if (!(L > 0.0) || !(beta >= 1.0) || !(dist0_sq >= 0.0) || t < 0)
        throw ConfigError("sublinear bound needs L > 0, beta >= 1, dist0_sq >= 0, t >= 0");
    return 2.0 * L * beta * dist0_sq / static_cast<double>(t + 1);
}

double variance_bound(double Lz, double trace_var_z, Index K) {
    if (!(Lz >= 0.0) || !(trace_var_z >= 0.0) || K < 1)
        throw ConfigError("variance bound needs Lz >= 0, trace_var_z >= 0, K >= 1");
    return 4.0 * Lz * Lz * trace_var_z / static_cast<double>(K);
}

bool descent_condition_holds(const Vec& g_batch, const Vec& g_true) {
    return (g_batch - g_true).squaredNorm() < g_batch.squaredNorm();
}

void QuadModel::validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be finite and > 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and >= 0");
    if (d < 1) throw ConfigError("d must be >= 1");
    if (K < 1) throw ConfigError("K must be >= 1");
}

double quad_expected_loss(const QuadModel& model, double alpha, double dist_sq) {
    model.validate();
    if (!(alpha >= 0.0) || !(dist_sq >= 0.0))
        throw ConfigError("expected loss needs alpha >= 0 and dist_sq >= 0");
    const double shrink = 1.0 - model.nu * alpha;
    const double noise = 1.0 + model.nu * model.nu * alpha * alpha / static_cast<double>(model.K);
    const double spread = static_cast<double>(model.d) * model.sigma * model.sigma;
    return 0.5 * model.nu * (shrink * shrink * dist_sq + noise * spread);
}

double bb_lower_bound(double nu, double theta) {
    if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
    if (!(theta >= 0.0) || !(theta < 1.0)) throw ConfigError("theta must lie in [0, 1)");
    return (1.0 - theta * theta) / nu;
}

}  // namespace bigbatch::theory
