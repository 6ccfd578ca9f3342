#pragma once

#include "bigbatch/batching.hpp"
#include "bigbatch/problem.hpp"
#include "bigbatch/rng.hpp"
#include "bigbatch/trace.hpp"
#include "bigbatch/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bigbatch {

enum class Method { Gd, SgdDecay, Sf, BbsFixed, BbsArmijo, BbsBb };

Method parse_method(const std::string& name);
std::string to_string(Method method);

// Backtracking control for Eq-style sufficient decrease
//   l_B(x - alpha G) <= l_B(x) - c * alpha * ||G||^2,
// halving alpha (fixed shrink factor 2) until it holds.
struct ArmijoConfig {
    double c = 0.1;          // in (0, 0.5]
    int max_halvings = 60;

    void validate() const;
};

// alpha_t = a / (b + t), t counted from 0.
struct DecaySchedule {
    double a = 1.0;  // > 0
    double b = 1.0;  // >= 0

    double at(long long t) const { return a / (b + static_cast<double>(t)); }
    void validate() const;
};

// Batch grows by a constant factor every iteration regardless of noise.
struct SfPolicy {
    double growth_factor = 1.1;  // > 1

    Index next(Index k, Index n) const;
    void validate() const;
};

struct OptimizerState {
    Vec x;
    double alpha = 1.0;
    long long t = 0;           // parameter updates completed
    bool grew_flag = false;    // set on batch growth, consumed by the doubling rule
    std::optional<Vec> prev_x;
    std::optional<Vec> prev_batch_grad;
    long long grad_evals = 0;  // cumulative per-sample gradient evaluations
    Index K = 0;               // batch size carried between iterations
};

// Everything needed to re-verify one accepted update from outside.
struct UpdateInfo {
    long long t = 0;  // index of this update (1-based)
    Index K = 0;
    double alpha = 0.0;
    const std::vector<Index>* batch = nullptr;  // null for with-replacement draws
    const Vec* x_before = nullptr;
    const Vec* x_after = nullptr;
    const Vec* grad = nullptr;  // direction actually stepped along
    double armijo_c = 0.0;      // meaningful only when line_searched
    bool line_searched = false;
    long long grad_evals = 0;   // cumulative count at this update
};

class StepObserver {
public:
    virtual ~StepObserver() = default;
    virtual void on_update(const UpdateInfo&) {}
    virtual void on_curvature(double /*nu*/, bool /*used*/) {}
};

enum class StepStatus { Continued, StoppedByTol };

// Largest alpha in {alpha0, alpha0/2, ...} passing the sufficient-decrease
// test, where batch_value_at evaluates the batch loss at a candidate
// iterate. Throws LineSearchError (carrying the last alpha tried) once
// max_halvings is exceeded.
double armijo_search(const std::function<double(const Vec&)>& batch_value_at, const Vec& x,
                     const Vec& grad, double alpha0, const ArmijoConfig& cfg);

// Secant curvature nu = <dx, dg> / ||dx||^2 with both gradients taken on the
// same batch. Throws on zero displacement.
double bb_curvature(const Vec& x_t, const Vec& x_prev, const Vec& g_t, const Vec& g_prev);

// Noise-discounted curvature stepsize: (1/nu)(1 - V_B/(K gnorm2)) while
// K < n, plain 1/nu at the full batch. Throws on nonpositive nu.
double bb_stepsize(double nu, double var_est, Index K, double gnorm2, Index n);

// Convex blend alpha = (1 - K/n) alpha_prev + (K/n) alpha_tilde.
double smooth_stepsize(double alpha_prev, double alpha_tilde, Index K, Index n);

// Smoothing proposal with the fallback contract folded in: keeps alpha_prev
// when the curvature is unusable (nu <= 0 or absent).
double propose_bb_alpha(double alpha_prev, std::optional<double> nu, double var_est, Index K,
                        double gnorm2, Index n);

// One outer iteration each. Steps grow the batch, perform their update(s),
// advance t and grad_evals, and report each accepted update through the
// observer. A StoppedByTol return means the full-batch gradient fell below
// tol before any update was made this call.
StepStatus step_bbs_fixed(const Problem& problem, OptimizerState& state,
                          const GrowthPolicy& policy, double alpha, Rng& rng, double tol,
                          StepObserver* observer = nullptr);
StepStatus step_bbs_armijo(const Problem& problem, OptimizerState& state,
                           const GrowthPolicy& policy, const ArmijoConfig& cfg, Rng& rng,
                           double tol, StepObserver* observer = nullptr);
StepStatus step_bbs_bb(const Problem& problem, OptimizerState& state, const GrowthPolicy& policy,
                       const ArmijoConfig& cfg, Rng& rng, double tol,
                       StepObserver* observer = nullptr);

struct RunOptions {
    Method method = Method::BbsArmijo;
    double epochs = 10.0;       // gradient-evaluation budget in units of n
    double alpha0 = 1.0;        // initial (or fixed) stepsize
    DecaySchedule decay;        // sgd-decay only
    ArmijoConfig armijo;        // bbs-armijo / bbs-bb
    GrowthPolicy growth;        // big-batch methods
    SfPolicy sf;                // sf only
    Index K0 = 10;              // initial batch size for batch-growing methods
    Index sgd_batch = 10;       // sgd-decay minibatch size
    double tol = 1e-6;          // full-gradient stopping tolerance
    long long diag_every = 1;   // full diagnostics every this many updates

    void validate(const Problem& problem) const;
};

enum class RunStatus { Ok, Diverged, LineSearchFailed };

struct RunResult {
    std::vector<TraceRecord> trace;
    OptimizerState state;
    RunStatus status = RunStatus::Ok;
    std::string message;
    bool stopped_by_tol = false;
};

// Drives the chosen method until the budget (epochs * n gradient
// evaluations) or the stopping rule (K = n and full gradient norm <= tol).
// The trace always contains the t = 0 row and the final row; intermediate
// updates are logged every diag_every updates. Divergence or line-search
// failure ends the run early with the partial trace and a diagnostic.
RunResult run(const Problem& problem, const RunOptions& options, std::uint64_t seed,
              StepObserver* observer = nullptr);

}  // namespace bigbatch
