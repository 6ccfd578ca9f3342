#pragma once

#include "bigbatch/optimizers.hpp"
#include "bigbatch/problem.hpp"
#include "bigbatch/trace.hpp"
#include "bigbatch/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bigbatch {

// Flat experiment description: one method on one problem under one seed.
// Field ranges are validated against the owning modules' contracts before
// any compute happens.
struct RunConfig {
    std::string method = "bbs-armijo";
    std::string problem = "logistic";
    std::string data;            // dataset path; empty selects synthetic
    std::string format = "svm-sparse";
    bool normalize = true;       // z-score file datasets; ignored for synthetic
    // Synthetic quadratic parameters (problem = synthetic-quadratic).
    long long synth_n = 1000;
    long long synth_d = 10;
    double nu = 1.0;
    double sigma = 0.1;
    std::uint64_t data_seed = 1;
    std::string x_star;          // comma-separated d-vector, or one value broadcast; empty = 0
    double epochs = 10.0;
    std::uint64_t seed = 1;
    double alpha0 = 1.0;
    double decay_a = 1.0;
    double decay_b = 1.0;
    double c = 0.1;
    long long K0 = 10;
    double increment_fraction = 0.1;
    double theta = 1.0;
    double sf_factor = 1.1;
    long long sgd_batch = 10;
    double lambda = 0.0;
    double tol = 1e-6;
    long long diag_every = 1;
    long long max_halvings = 60;
    std::string output;          // CSV path; empty = stdout

    void validate() const;
};

// Thrown by parse_config when the arguments ask for usage text rather than
// a run; the caller prints `text` and exits cleanly.
struct HelpRequested {
    std::string text;
};

// Parses `run` subcommand arguments plus an optional flat key=value config
// file (keys are flag names with dashes replaced by underscores); CLI flags
// override file values. Throws ConfigError on unknown keys or out-of-range
// values, naming the offending field.
RunConfig parse_config(const std::vector<std::string>& args);

Problem build_problem(const RunConfig& config);
RunOptions to_run_options(const RunConfig& config);

struct ExperimentResult {
    std::vector<TraceRecord> trace;
    RunStatus status = RunStatus::Ok;
    std::string message;
    int exit_code = 0;
};

// Builds the problem, delegates to run(), and writes the trace CSV to
// config.output (stdout when empty). A failed run still writes the partial
// trace, appends a terminal comment row naming the error, and reports the
// matching exit code.
ExperimentResult run_experiment(const RunConfig& config);

struct CompareRow {
    std::string method;
    std::uint64_t seed = 0;
    std::string params;
    double final_loss = 0.0;
    double final_grad_norm = 0.0;
    double au_log_gnorm = 0.0;  // trapezoidal area under log10 grad norm vs epoch
};

// Runs every (config, seed) pair on the shared problem and returns one row
// per run, sorted by final gradient norm ascending. All configs must agree
// on the problem definition and the epoch budget.
std::vector<CompareRow> compare_methods(const std::vector<RunConfig>& configs);

std::string compare_csv_header();
std::string to_csv_row(const CompareRow& row);

struct RateWindow {
    long long t_begin = 0;  // inclusive
    long long t_end = 0;    // exclusive
};

// Least-squares slope of log(loss_full - loss_star) against t over records
// with t in the window. Requires >= 3 records in the window, all with
// positive suboptimality.
double fit_linear_rate(const std::vector<TraceRecord>& trace, const RateWindow& window,
                       double loss_star);

struct ReferenceSolution {
    Vec x;
    double loss;
    double grad_norm;
};

// Deterministic full-batch descent with backtracking, run to
// ||grad|| <= tol; used as the loss_star oracle for rate fits.
ReferenceSolution solve_reference(const Problem& problem, double tol = 1e-12,
                                  long long max_iters = 200000);

}  // namespace bigbatch
