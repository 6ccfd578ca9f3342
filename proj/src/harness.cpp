#include "bigbatch/harness.hpp"

#include "bigbatch/format.hpp"

#include "CLI11.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace bigbatch {

namespace {

std::string short_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

Vec parse_x_star(const std::string& text, Index d) {
    if (text.empty()) return Vec::Zero(d);
    std::vector<double> values;
    std::istringstream cells(text);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ConfigError("x_star: bad number '" + cell + "'");
        }
    }
    if (values.size() == 1) return Vec::Constant(d, values[0]);
    if (static_cast<Index>(values.size()) != d)
        throw ConfigError("x_star needs 1 or " + std::to_string(d) + " values, got " +
                          std::to_string(values.size()));
    Vec out(d);
    for (Index j = 0; j < d; ++j) out[j] = values[static_cast<std::size_t>(j)];
    return out;
}

// One option table shared by command line and config file. Every multi-word
// flag carries an underscore alias so config keys read naturally.
void attach_options(CLI::App& app, RunConfig& cfg) {
    app.add_option("--method", cfg.method,
                   "gd | sgd-decay | sf | bbs-fixed | bbs-armijo | bbs-bb");
    app.add_option("--problem", cfg.problem, "logistic | least-squares | synthetic-quadratic");
    app.add_option("--data", cfg.data, "dataset path (omit for synthetic-quadratic)");
    app.add_option("--format", cfg.format, "svm-sparse | dense-csv");
    app.add_flag("--normalize,!--no-normalize", cfg.normalize,
                 "z-score feature columns of file datasets");
    app.add_option("--synth-n,--synth_n", cfg.synth_n, "synthetic sample count");
    app.add_option("--synth-d,--synth_d", cfg.synth_d, "synthetic dimension");
    app.add_option("--nu", cfg.nu, "synthetic quadratic curvature");
    app.add_option("--sigma", cfg.sigma, "synthetic center spread");
    app.add_option("--data-seed,--data_seed", cfg.data_seed, "synthetic generator seed");
    app.add_option("--x-star,--x_star", cfg.x_star,
                   "synthetic center mean: scalar broadcast or comma-separated vector");
    app.add_option("--epochs", cfg.epochs, "gradient budget in units of n");
    app.add_option("--seed", cfg.seed, "run seed");
    app.add_option("--alpha0", cfg.alpha0, "initial (or fixed) stepsize");
    app.add_option("--decay-a,--decay_a", cfg.decay_a, "sgd-decay numerator");
    app.add_option("--decay-b,--decay_b", cfg.decay_b, "sgd-decay offset");
    app.add_option("--c", cfg.c, "sufficient-decrease constant");
    app.add_option("--K0", cfg.K0, "initial batch size");
    app.add_option("--increment-fraction,--increment_fraction", cfg.increment_fraction,
                   "batch growth fraction per extension");
    app.add_option("--theta", cfg.theta, "batch noise threshold");
    app.add_option("--sf-factor,--sf_factor", cfg.sf_factor, "sf per-iteration growth factor");
    app.add_option("--sgd-batch,--sgd_batch", cfg.sgd_batch, "sgd-decay minibatch size");
    app.add_option("--lambda", cfg.lambda, "l2 coefficient");
    app.add_option("--tol", cfg.tol, "full-gradient stopping tolerance");
    app.add_option("--diag-every,--diag_every", cfg.diag_every, "diagnostic thinning stride");
    app.add_option("--max-halvings,--max_halvings", cfg.max_halvings,
                   "line search halving budget");
    app.add_option("--output", cfg.output, "trace CSV path (default stdout)");
    app.set_config("--config", "", "flat key=value config file; flags override it");
    app.allow_config_extras(false);
}

std::string method_params(const RunConfig& cfg) {
    const Method m = parse_method(cfg.method);
    switch (m) {
        case Method::SgdDecay:
            return "a=" + short_g(cfg.decay_a) + ";b=" + short_g(cfg.decay_b) +
                   ";m=" + std::to_string(cfg.sgd_batch);
        case Method::Gd:
            return "alpha0=" + short_g(cfg.alpha0);
        case Method::Sf:
            return "alpha0=" + short_g(cfg.alpha0) + ";factor=" + short_g(cfg.sf_factor);
        case Method::BbsFixed:
            return "alpha0=" + short_g(cfg.alpha0) + ";theta=" + short_g(cfg.theta);
        case Method::BbsArmijo:
        case Method::BbsBb:
            return "alpha0=" + short_g(cfg.alpha0) + ";theta=" + short_g(cfg.theta) +
                   ";c=" + short_g(cfg.c);
    }
    return "";
}

// The fields that define the objective being optimized, independent of the
// method riding on it.
std::string problem_signature(const RunConfig& cfg) {
    std::string sig = cfg.problem + "|" + cfg.data + "|" + cfg.format + "|" +
                      (cfg.normalize ? "z" : "raw") + "|" + format_g17(cfg.lambda);
    if (cfg.problem == "synthetic-quadratic")
        sig += "|" + std::to_string(cfg.synth_n) + "|" + std::to_string(cfg.synth_d) + "|" +
               format_g17(cfg.nu) + "|" + format_g17(cfg.sigma) + "|" +
               std::to_string(cfg.data_seed) + "|" + cfg.x_star;
    return sig;
}

}  // namespace

void RunConfig::validate() const {
    const Method m = parse_method(method);
    const ProblemKind kind = parse_problem_kind(problem);
    parse_data_format(format);
    if (kind == ProblemKind::SyntheticQuadratic) {
        if (lambda != 0.0)
            throw ConfigError("synthetic-quadratic has no l2 term; lambda must be 0");
        if (synth_n < 1 || synth_d < 1) throw ConfigError("synth_n and synth_d must be >= 1");
        if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be finite and > 0");
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw ConfigError("sigma must be finite and >= 0");
    } else if (data.empty()) {
        throw ConfigError("problem '" + problem + "' needs --data");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ConfigError("lambda must be finite and >= 0");
    if (!(epochs >= 0.0) || !std::isfinite(epochs)) throw ConfigError("epochs must be finite and >= 0");
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ConfigError("alpha0 must be finite and > 0");
    if (!(tol >= 0.0) || !std::isfinite(tol)) throw ConfigError("tol must be finite and >= 0");
    if (diag_every < 1) throw ConfigError("diag_every must be >= 1");
    if (max_halvings < 1) throw ConfigError("max_halvings must be >= 1");
    switch (m) {
        case Method::SgdDecay:
            DecaySchedule{decay_a, decay_b}.validate();
            if (sgd_batch < 1) throw ConfigError("sgd_batch must be >= 1");
            break;
        case Method::Sf:
            SfPolicy{sf_factor}.validate();
            if (K0 < 1) throw ConfigError("K0 must be >= 1");
            break;
        case Method::BbsFixed:
        case Method::BbsArmijo:
        case Method::BbsBb:
            GrowthPolicy{increment_fraction, theta}.validate();
            if (K0 < 2) throw ConfigError("K0 must be >= 2");
            if (m != Method::BbsFixed)
                ArmijoConfig{c, static_cast<int>(std::min<long long>(max_halvings, 1 << 20))}
                    .validate();
            break;
        case Method::Gd:
            break;
    }
}

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    CLI::App app{"big-batch descent experiment"};
    attach_options(app, cfg);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    cfg.validate();
    return cfg;
}

Problem build_problem(const RunConfig& config) {
    config.validate();
    const ProblemKind kind = parse_problem_kind(config.problem);
    if (kind == ProblemKind::SyntheticQuadratic) {
        const auto d = static_cast<Index>(config.synth_d);
        return generate_quadratic(static_cast<Index>(config.synth_n), d, config.nu, config.sigma,
                                  parse_x_star(config.x_star, d), config.data_seed);
    }
    Dataset data = load_dataset(config.data, parse_data_format(config.format));
    if (config.normalize) data = normalize_features(data);
    return kind == ProblemKind::Logistic ? make_logistic(std::move(data), config.lambda)
                                         : make_least_squares(std::move(data), config.lambda);
}

RunOptions to_run_options(const RunConfig& config) {
    RunOptions options;
    options.method = parse_method(config.method);
    options.epochs = config.epochs;
    options.alpha0 = config.alpha0;
    options.decay = DecaySchedule{config.decay_a, config.decay_b};
    options.armijo =
        ArmijoConfig{config.c, static_cast<int>(std::min<long long>(config.max_halvings, 1 << 20))};
    options.growth = GrowthPolicy{config.increment_fraction, config.theta};
    options.sf = SfPolicy{config.sf_factor};
    options.K0 = static_cast<Index>(config.K0);
    options.sgd_batch = static_cast<Index>(config.sgd_batch);
    options.tol = config.tol;
    options.diag_every = config.diag_every;
    return options;
}

ExperimentResult run_experiment(const RunConfig& config) {
    config.validate();
    const Problem problem = build_problem(config);
    const RunOptions options = to_run_options(config);
    RunResult result = run(problem, options, config.seed);

    ExperimentResult out;
    out.status = result.status;
    out.message = result.message;
    out.exit_code = result.status == RunStatus::Ok         ? 0
                    : result.status == RunStatus::Diverged ? 3
                                                           : 4;
    const std::string comment = result.status == RunStatus::Ok ? "" : "error: " + result.message;
    if (config.output.empty()) {
        write_trace_csv(std::cout, result.trace, comment);
    } else {
        std::ofstream file(config.output);
        if (!file) throw ConfigError("cannot open '" + config.output + "' for writing");
        write_trace_csv(file, result.trace, comment);
        if (!file) throw ConfigError("failed writing '" + config.output + "'");
    }
    out.trace = std::move(result.trace);
    return out;
}

std::vector<CompareRow> compare_methods(const std::vector<RunConfig>& configs) {
    if (configs.empty()) throw ConfigError("compare needs at least one run config");
    for (const RunConfig& cfg : configs) cfg.validate();
    const std::string signature = problem_signature(configs.front());
    for (const RunConfig& cfg : configs) {
        if (problem_signature(cfg) != signature)
            throw ConfigError("compare configs disagree on the problem definition");
        if (cfg.epochs != configs.front().epochs)
            throw ConfigError("compare configs disagree on the epoch budget");
    }
    const Problem problem = build_problem(configs.front());

    std::vector<CompareRow> rows;
    rows.reserve(configs.size());
    for (const RunConfig& cfg : configs) {
        const RunResult result = run(problem, to_run_options(cfg), cfg.seed);
        if (result.status != RunStatus::Ok)
            throw ConfigError("compare run failed (" + cfg.method + ", seed " +
                              std::to_string(cfg.seed) + "): " + result.message);
        CompareRow row;
        row.method = cfg.method;
        row.seed = cfg.seed;
        row.params = method_params(cfg);
        row.final_loss = result.trace.back().loss_full;
        row.final_grad_norm = result.trace.back().grad_norm_full;
        double area = 0.0;
        for (std::size_t i = 1; i < result.trace.size(); ++i) {
            const auto& prev = result.trace[i - 1];
            const auto& cur = result.trace[i];
            const double y0 = std::log10(std::max(prev.grad_norm_full, 1e-300));
            const double y1 = std::log10(std::max(cur.grad_norm_full, 1e-300));
            area += 0.5 * (y0 + y1) * (cur.epoch - prev.epoch);
        }
        row.au_log_gnorm = area;
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const CompareRow& a, const CompareRow& b) {
        if (a.final_grad_norm != b.final_grad_norm) return a.final_grad_norm < b.final_grad_norm;
        if (a.method != b.method) return a.method < b.method;
        return a.seed < b.seed;
    });
    return rows;
}

std::string compare_csv_header() {
    return "method,seed,params,final_loss,final_grad_norm,au_log_gnorm";
}

std::string to_csv_row(const CompareRow& row) {
    return row.method + "," + std::to_string(row.seed) + "," + row.params + "," +
           format_g17(row.final_loss) + "," + format_g17(row.final_grad_norm) + "," +
           format_g17(row.au_log_gnorm);
}

double fit_linear_rate(const std::vector<TraceRecord>& trace, const RateWindow& window,
                       double loss_star) {
    std::vector<double> ts;
    std::vector<double> ys;
    for (const TraceRecord& r : trace) {
        if (r.t < window.t_begin || r.t >= window.t_end) continue;
        const double subopt = r.loss_full - loss_star;
        if (!(subopt > 0.0))
            throw std::invalid_argument("nonpositive suboptimality at t = " + std::to_string(r.t));
        ts.push_back(static_cast<double>(r.t));
        ys.push_back(std::log(subopt));
    }
    if (ts.size() < 3) throw std::invalid_argument("rate fit needs at least 3 records in the window");
    const double n = static_cast<double>(ts.size());
    double mean_t = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        mean_t += ts[i];
        mean_y += ys[i];
    }
    mean_t /= n;
    mean_y /= n;
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        cov += (ts[i] - mean_t) * (ys[i] - mean_y);
        var += (ts[i] - mean_t) * (ts[i] - mean_t);
    }
    if (!(var > 0.0)) throw std::invalid_argument("rate fit needs distinct t values");
    return cov / var;
}

namespace {

// Hessian upper bound for the 1/L reference stepsize, from the largest
// Gram eigenvalue (loss curvature <= data_factor * A^T A / n + 2 lambda).
double smoothness_bound(const Problem& problem) {
    if (problem.kind == ProblemKind::SyntheticQuadratic) return problem.nu;
    const Eigen::MatrixXd gram = problem.data.features.transpose() * problem.data.features /
                                 static_cast<double>(problem.n());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double top = eig.eigenvalues().maxCoeff();
    return (problem.kind == ProblemKind::Logistic ? 0.25 * top : 2.0 * top) +
           2.0 * problem.lambda;
}

}  // namespace

ReferenceSolution solve_reference(const Problem& problem, double tol, long long max_iters) {
    if (!(tol > 0.0)) throw std::invalid_argument("reference tolerance must be > 0");
    // Fixed 1/L descent. A value-based backtracking variant cannot certify
    // progress once the per-step decrease drops under one ulp of the loss,
    // which happens while the gradient still carries several usable digits.
    const double alpha = 1.0 / smoothness_bound(problem);
    Vec x = Vec::Zero(problem.dim());
    double best_gnorm = std::numeric_limits<double>::infinity();
    long long since_best = 0;
    for (long long it = 0; it < max_iters; ++it) {
        const GradSample g = full_loss(problem, x);
        const double gnorm = g.gradient.norm();
        if (gnorm <= tol) return {std::move(x), g.value, gnorm};
        if (gnorm < best_gnorm) {
            best_gnorm = gnorm;
            since_best = 0;
        } else if (++since_best > 2000) {
            break;  // rounding floor: the computed gradient has stopped improving
        }
        x -= alpha * g.gradient;
    }
    throw std::runtime_error("reference solve stalled at gradient norm " +
                             std::to_string(best_gnorm) + " (tolerance " + std::to_string(tol) +
                             ")");
}

}  // namespace bigbatch
