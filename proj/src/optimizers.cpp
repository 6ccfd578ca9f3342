#include "bigbatch/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace bigbatch {

namespace {

void check_iterate(const Vec& x, long long t) {
    if (!x.allFinite() || x.norm() > kDivergenceThreshold)
        throw DivergenceError("iterate diverged at update " + std::to_string(t));
}

struct Acquired {
    BatchState batch;
    bool grew = false;
};

// Fresh draw of the carried batch size, then noise-driven growth. Charges
// every sample-gradient evaluation to the state's counter.
Acquired acquire_batch(const Problem& problem, OptimizerState& state, const GrowthPolicy& policy,
                       Rng& rng) {
    Acquired a;
    a.batch = make_batch_state(problem, state.x, draw_batch(rng, problem.n(), state.K));
    state.grad_evals += a.batch.size();
    const GrowResult grown = grow_until_condition(problem, state.x, a.batch, policy, rng);
    state.grad_evals += grown.added_evals;
    state.K = a.batch.size();
    a.grew = grown.grew;
    return a;
}

bool at_full_batch_tol(const Problem& problem, const BatchState& batch, double tol) {
    return batch.size() == problem.n() && batch.mean_grad.norm() <= tol;
}

void notify(StepObserver* obs, const UpdateInfo& info) {
    if (obs) obs->on_update(info);
}

UpdateInfo update_info(const OptimizerState& state, double alpha, const std::vector<Index>* batch,
                       const Vec& x_before, const Vec& x_after, const Vec& grad, double armijo_c,
                       bool line_searched) {
    UpdateInfo info;
    info.t = state.t;
    info.K = state.K;
    info.alpha = alpha;
    info.batch = batch;
    info.x_before = &x_before;
    info.x_after = &x_after;
    info.grad = &grad;
    info.armijo_c = armijo_c;
    info.line_searched = line_searched;
    info.grad_evals = state.grad_evals;
    return info;
}

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "gd") return Method::Gd;
    if (name == "sgd-decay") return Method::SgdDecay;
    if (name == "sf") return Method::Sf;
    if (name == "bbs-fixed") return Method::BbsFixed;
    if (name == "bbs-armijo") return Method::BbsArmijo;
    if (name == "bbs-bb") return Method::BbsBb;
    throw ConfigError("unknown method '" + name + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::Gd: return "gd";
        case Method::SgdDecay: return "sgd-decay";
        case Method::Sf: return "sf";
        case Method::BbsFixed: return "bbs-fixed";
        case Method::BbsArmijo: return "bbs-armijo";
        case Method::BbsBb: return "bbs-bb";
    }
    return "?";
}

void ArmijoConfig::validate() const {
    if (!(c > 0.0) || !(c <= 0.5)) throw ConfigError("c must lie in (0, 0.5]");
    if (max_halvings < 1) throw ConfigError("max_halvings must be >= 1");
}

void DecaySchedule::validate() const {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("decay a must be finite and > 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("decay b must be finite and >= 0");
}

Index SfPolicy::next(Index k, Index n) const {
    const auto grownd = static_cast<Index>(std::ceil(growth_factor * static_cast<double>(k)));
    return std::min(n, std::max(grownd, k + 1));
}

void SfPolicy::validate() const {
    if (!(growth_factor > 1.0) || !std::isfinite(growth_factor))
        throw ConfigError("sf growth factor must be finite and > 1");
}

double armijo_search(const std::function<double(const Vec&)>& batch_value_at, const Vec& x,
                     const Vec& grad, double alpha0, const ArmijoConfig& cfg) {
    cfg.validate();
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0))
        throw std::invalid_argument("line search needs a finite positive starting stepsize");
    const double fx = batch_value_at(x);
    const double gnorm2 = grad.squaredNorm();
    double alpha = alpha0;
    double last_tried = alpha0;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
        last_tried = alpha;
        const Vec candidate = x - alpha * grad;
        // A NaN candidate value fails the comparison and keeps halving.
        if (batch_value_at(candidate) <= fx - cfg.c * alpha * gnorm2) return alpha;
        alpha /= 2.0;
    }
    throw LineSearchError("no sufficient decrease within " + std::to_string(cfg.max_halvings) +
                              " halvings (last stepsize " + std::to_string(last_tried) + ")",
                          last_tried);
}

double bb_curvature(const Vec& x_t, const Vec& x_prev, const Vec& g_t, const Vec& g_prev) {
    const Vec dx = x_t - x_prev;
    const double denom = dx.squaredNorm();
    if (!(denom > 0.0)) throw std::invalid_argument("curvature undefined for zero displacement");
    const Vec dg = g_t - g_prev;
    return dx.dot(dg) / denom;
}

double bb_stepsize(double nu, double var_est, Index K, double gnorm2, Index n) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("curvature must be positive");
    if (K < 1 || K > n) throw std::invalid_argument("K must lie in [1, n]");
    if (!(var_est >= 0.0)) throw std::invalid_argument("variance estimate must be >= 0");
    if (K == n) return 1.0 / nu;
    if (!(gnorm2 > 0.0)) throw std::invalid_argument("gradient norm must be positive");
    return (1.0 / nu) * (1.0 - var_est / (static_cast<double>(K) * gnorm2));
}

double smooth_stepsize(double alpha_prev, double alpha_tilde, Index K, Index n) {
    if (!(alpha_prev > 0.0) || !(alpha_tilde > 0.0))
        throw std::invalid_argument("smoothing needs positive stepsizes");
    if (K < 1 || K > n) throw std::invalid_argument("K must lie in [1, n]");
    const double w = static_cast<double>(K) / static_cast<double>(n);
    return (1.0 - w) * alpha_prev + w * alpha_tilde;
}

double propose_bb_alpha(double alpha_prev, std::optional<double> nu, double var_est, Index K,
                        double gnorm2, Index n) {
    if (!nu || !(*nu > 0.0) || !std::isfinite(*nu)) return alpha_prev;
    const double tilde = bb_stepsize(*nu, var_est, K, gnorm2, n);
    // The growth exit keeps the noise ratio below theta^2 <= 1, so tilde is
    // positive on that path; anything else falls back to the safeguarded value.
    if (!(tilde > 0.0) || !std::isfinite(tilde)) return alpha_prev;
    return smooth_stepsize(alpha_prev, tilde, K, n);
}

StepStatus step_bbs_fixed(const Problem& problem, OptimizerState& state,
                          const GrowthPolicy& policy, double alpha, Rng& rng, double tol,
                          StepObserver* observer) {
    Acquired a = acquire_batch(problem, state, policy, rng);
    if (at_full_batch_tol(problem, a.batch, tol)) return StepStatus::StoppedByTol;
    state.alpha = alpha;
    Vec x_new = state.x - alpha * a.batch.mean_grad;
    check_iterate(x_new, state.t + 1);
    ++state.t;
    notify(observer,
           update_info(state, alpha, &a.batch.indices, state.x, x_new, a.batch.mean_grad, 0.0, false));
    state.x = std::move(x_new);
    return StepStatus::Continued;
}

StepStatus step_bbs_armijo(const Problem& problem, OptimizerState& state,
                           const GrowthPolicy& policy, const ArmijoConfig& cfg, Rng& rng,
                           double tol, StepObserver* observer) {
    Acquired a = acquire_batch(problem, state, policy, rng);
    if (a.grew) state.grew_flag = true;
    if (at_full_batch_tol(problem, a.batch, tol)) return StepStatus::StoppedByTol;
    if (state.grew_flag) {
        // A larger batch supports a larger step; retry upward once per growth.
        state.alpha *= 2.0;
        state.grew_flag = false;
    }
    const auto value_on_batch = [&](const Vec& p) { return batch_value(problem, p, a.batch.indices); };
    const double alpha = armijo_search(value_on_batch, state.x, a.batch.mean_grad, state.alpha, cfg);
    state.alpha = alpha;
    Vec x_new = state.x - alpha * a.batch.mean_grad;
    check_iterate(x_new, state.t + 1);
    ++state.t;
    notify(observer, update_info(state, alpha, &a.batch.indices, state.x, x_new, a.batch.mean_grad,
                                 cfg.c, true));
    state.x = std::move(x_new);
    return StepStatus::Continued;
}

StepStatus step_bbs_bb(const Problem& problem, OptimizerState& state, const GrowthPolicy& policy,
                       const ArmijoConfig& cfg, Rng& rng, double tol, StepObserver* observer) {
    Acquired a = acquire_batch(problem, state, policy, rng);
    BatchState& batch = a.batch;
    if (at_full_batch_tol(problem, batch, tol)) return StepStatus::StoppedByTol;

    const Vec& g_first = batch.mean_grad;
    const double gnorm2_first = g_first.squaredNorm();
    const double var_first = batch.var_est;
    const auto value_on_batch = [&](const Vec& p) { return batch_value(problem, p, batch.indices); };

    // First safeguarded update along the batch mean gradient.
    double alpha = armijo_search(value_on_batch, state.x, g_first, state.alpha, cfg);
    state.alpha = alpha;
    Vec x_next = state.x - alpha * g_first;
    check_iterate(x_next, state.t + 1);
    ++state.t;
    notify(observer,
           update_info(state, alpha, &batch.indices, state.x, x_next, g_first, cfg.c, true));
    Vec x_old = std::move(state.x);
    state.x = std::move(x_next);

    // Second gradient of the same batch at the new iterate: the two-point
    // secant uses a common batch so the data noise cancels from the
    // difference. Costs K further evaluations.
    const GradSample second = batch_loss(problem, state.x, batch.indices);
    state.grad_evals += batch.size();
    const Vec& g_second = second.gradient;

    std::optional<double> nu;
    if ((state.x - x_old).squaredNorm() > 0.0) {
        const double raw = bb_curvature(state.x, x_old, g_second, g_first);
        nu = raw;
        if (observer) observer->on_curvature(raw, raw > 0.0);
    }
    state.alpha = propose_bb_alpha(state.alpha, nu, var_first, state.K, gnorm2_first, problem.n());
    state.prev_x = std::move(x_old);
    state.prev_batch_grad = g_first;

    // Second safeguarded update along the new gradient.
    const bool searched = g_second.squaredNorm() > 0.0;
    if (searched) state.alpha = armijo_search(value_on_batch, state.x, g_second, state.alpha, cfg);
    Vec x_final = state.x - state.alpha * g_second;
    check_iterate(x_final, state.t + 1);
    ++state.t;
    notify(observer, update_info(state, state.alpha, &batch.indices, state.x, x_final, g_second,
                                 cfg.c, searched));
    state.x = std::move(x_final);
    return StepStatus::Continued;
}

namespace {

StepStatus step_gd(const Problem& problem, OptimizerState& state, double alpha, double tol,
                   StepObserver* observer) {
    const GradSample g = full_loss(problem, state.x);
    state.grad_evals += problem.n();
    if (g.gradient.norm() <= tol) return StepStatus::StoppedByTol;
    state.alpha = alpha;
    Vec x_new = state.x - alpha * g.gradient;
    check_iterate(x_new, state.t + 1);
    ++state.t;
    notify(observer, update_info(state, alpha, nullptr, state.x, x_new, g.gradient, 0.0, false));
    state.x = std::move(x_new);
    return StepStatus::Continued;
}

StepStatus step_sgd(const Problem& problem, OptimizerState& state, const DecaySchedule& decay,
                    Index batch_size, Rng& rng, StepObserver* observer) {
    std::vector<Index> indices(static_cast<std::size_t>(batch_size));
    for (auto& i : indices)
        i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(problem.n())));
    const GradSample g = batch_loss(problem, state.x, indices);
    state.grad_evals += batch_size;
    const double alpha = decay.at(state.t);
    state.alpha = alpha;
    Vec x_new = state.x - alpha * g.gradient;
    check_iterate(x_new, state.t + 1);
    ++state.t;
    notify(observer, update_info(state, alpha, nullptr, state.x, x_new, g.gradient, 0.0, false));
    state.x = std::move(x_new);
    return StepStatus::Continued;
}

StepStatus step_sf(const Problem& problem, OptimizerState& state, const SfPolicy& sf, double alpha,
                   Rng& rng, double tol, StepObserver* observer) {
    const std::vector<Index> indices = draw_batch(rng, problem.n(), state.K);
    const GradSample g = batch_loss(problem, state.x, indices);
    state.grad_evals += state.K;
    if (state.K == problem.n() && g.gradient.norm() <= tol) return StepStatus::StoppedByTol;
    state.alpha = alpha;
    Vec x_new = state.x - alpha * g.gradient;
    check_iterate(x_new, state.t + 1);
    ++state.t;
    notify(observer, update_info(state, alpha, &indices, state.x, x_new, g.gradient, 0.0, false));
    state.x = std::move(x_new);
    state.K = sf.next(state.K, problem.n());
    return StepStatus::Continued;
}

}  // namespace

void RunOptions::validate(const Problem& problem) const {
    if (!(epochs >= 0.0) || !std::isfinite(epochs)) throw ConfigError("epochs must be finite and >= 0");
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ConfigError("alpha0 must be finite and > 0");
    if (!(tol >= 0.0) || !std::isfinite(tol)) throw ConfigError("tol must be finite and >= 0");
    if (diag_every < 1) throw ConfigError("diag_every must be >= 1");
    const Index n = problem.n();
    switch (method) {
        case Method::Gd:
            break;
        case Method::SgdDecay:
            decay.validate();
            if (sgd_batch < 1 || sgd_batch > n)
                throw ConfigError("sgd_batch must lie in [1, n]");
            break;
        case Method::Sf:
            sf.validate();
            if (K0 < 1 || K0 > n) throw ConfigError("K0 must lie in [1, n]");
            break;
        case Method::BbsFixed:
        case Method::BbsArmijo:
        case Method::BbsBb:
            growth.validate();
            if (K0 < 2 || K0 > n)
                throw ConfigError("K0 must lie in [2, n] (variance needs two samples)");
            if (method != Method::BbsFixed) armijo.validate();
            break;
    }
}

RunResult run(const Problem& problem, const RunOptions& options, std::uint64_t seed,
              StepObserver* observer) {
    options.validate(problem);
    const Index n = problem.n();
    RunResult result;
    OptimizerState& state = result.state;
    state.x = Vec::Zero(problem.dim());
    state.alpha = options.method == Method::SgdDecay ? options.decay.at(0) : options.alpha0;
    state.K = options.method == Method::Gd        ? n
              : options.method == Method::SgdDecay ? options.sgd_batch
                                                   : options.K0;

    const auto budget =
        static_cast<long long>(std::llround(options.epochs * static_cast<double>(n)));
    Rng rng(seed);
    const auto started = std::chrono::steady_clock::now();
    const std::string method_name = to_string(options.method);

    auto diagnose = [&](const Vec& x, long long t, Index K, double alpha) {
        const GradSample g = full_loss(problem, x);
        TraceRecord r;
        r.method = method_name;
        r.seed = seed;
        r.t = t;
        r.epoch = static_cast<double>(state.grad_evals) / static_cast<double>(n);
        r.K = K;
        r.alpha = alpha;
        r.loss_full = g.value;
        r.grad_norm_full = g.gradient.norm();
        r.elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                .count();
        if (!std::isfinite(r.loss_full) || r.loss_full > kDivergenceThreshold)
            throw DivergenceError("full loss crossed the divergence threshold at update " +
                                  std::to_string(t));
        result.trace.push_back(std::move(r));
    };

    // Thins diagnostics to every diag_every-th update and forwards every
    // event to the caller's observer untouched.
    struct Tracer : StepObserver {
        std::function<void(const UpdateInfo&)> log;
        StepObserver* chain = nullptr;
        void on_update(const UpdateInfo& info) override {
            log(info);
            if (chain) chain->on_update(info);
        }
        void on_curvature(double nu, bool used) override {
            if (chain) chain->on_curvature(nu, used);
        }
    } tracer;
    long long last_logged_t = -1;
    tracer.chain = observer;
    tracer.log = [&](const UpdateInfo& info) {
        if (info.t % options.diag_every == 0) {
            diagnose(*info.x_after, info.t, info.K, info.alpha);
            last_logged_t = info.t;
        }
    };

    try {
        diagnose(state.x, 0, state.K, state.alpha);
        last_logged_t = 0;
        StepStatus status = StepStatus::Continued;
        while (status == StepStatus::Continued && state.grad_evals < budget) {
            switch (options.method) {
                case Method::Gd:
                    status = step_gd(problem, state, options.alpha0, options.tol, &tracer);
                    break;
                case Method::SgdDecay:
                    status = step_sgd(problem, state, options.decay, options.sgd_batch, rng, &tracer);
                    break;
                case Method::Sf:
                    status = step_sf(problem, state, options.sf, options.alpha0, rng, options.tol,
                                     &tracer);
                    break;
                case Method::BbsFixed:
                    status = step_bbs_fixed(problem, state, options.growth, options.alpha0, rng,
                                            options.tol, &tracer);
                    break;
                case Method::BbsArmijo:
                    status = step_bbs_armijo(problem, state, options.growth, options.armijo, rng,
                                             options.tol, &tracer);
                    break;
                case Method::BbsBb:
                    status = step_bbs_bb(problem, state, options.growth, options.armijo, rng,
                                         options.tol, &tracer);
                    break;
            }
        }
        result.stopped_by_tol = status == StepStatus::StoppedByTol;
        if (state.t != last_logged_t) diagnose(state.x, state.t, state.K, state.alpha);
    } catch (const DivergenceError& e) {
        result.status = RunStatus::Diverged;
        result.message = e.what();
    } catch (const LineSearchError& e) {
        result.status = RunStatus::LineSearchFailed;
        result.message = e.what();
    }
    return result;
}

}  // namespace bigbatch
