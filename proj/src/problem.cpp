#include "bigbatch/problem.hpp"

#include "bigbatch/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

namespace bigbatch {

namespace {

void require_valid_inputs(const Problem& p, const Vec& x) {
    if (x.size() != p.dim())
        throw std::invalid_argument("iterate has dimension " + std::to_string(x.size()) +
                                    ", problem expects " + std::to_string(p.dim()));
    if (!x.allFinite()) throw std::invalid_argument("non-finite iterate");
}

void require_index(const Problem& p, Index i) {
    if (i < 0 || i >= p.n())
        throw std::out_of_range("sample index " + std::to_string(i) + " outside [0, " +
                                std::to_string(p.n()) + ")");
}

// log(1 + exp(-m)) and d/dm of it, shifted so the exp argument is never
// positive; exact for large |m| where the naive form overflows.
double logistic_value(double margin) {
    return margin >= 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

double logistic_sigmoid_neg(double margin) {
    // sigma(-m) = 1 / (1 + exp(m)), evaluated without overflow on either side
    if (margin >= 0) {
        const double e = std::exp(-margin);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(margin));
}

// Adds sample i's loss to the running value and, when g is non-null, its
// gradient into *g. One shared path keeps batch and full sums bit-identical.
double sample_term(const Problem& p, const Vec& x, Index i, Vec* g) {
    switch (p.kind) {
        case ProblemKind::Logistic: {
            const double b = p.data.labels[i];
            const double margin = b * p.data.features.row(i).dot(x);
            const double value = logistic_value(margin) + p.lambda * x.squaredNorm();
            if (g) {
                const double coef = -b * logistic_sigmoid_neg(margin);
                g->noalias() += coef * p.data.features.row(i).transpose();
                *g += (2.0 * p.lambda) * x;
            }
            return value;
        }
        case ProblemKind::LeastSquares: {
            const double r = p.data.features.row(i).dot(x) - p.data.labels[i];
            const double value = r * r + p.lambda * x.squaredNorm();
            if (g) {
                g->noalias() += (2.0 * r) * p.data.features.row(i).transpose();
                *g += (2.0 * p.lambda) * x;
            }
            return value;
        }
        case ProblemKind::SyntheticQuadratic: {
            double sq = 0.0;
            for (Index j = 0; j < p.dim(); ++j) {
                const double diff = x[j] - p.data.features(i, j);
                sq += diff * diff;
                if (g) (*g)[j] += p.nu * diff;
            }
            return 0.5 * p.nu * sq;
        }
    }
    throw std::logic_error("unreachable problem kind");
}

GradSample mean_over(const Problem& p, const Vec& x, std::span<const Index> indices, bool want_grad) {
    require_valid_inputs(p, x);
    if (indices.empty()) throw std::invalid_argument("empty index list");
    GradSample out;
    out.value = 0.0;
    if (want_grad) out.gradient = Vec::Zero(p.dim());
    for (Index i : indices) {
        require_index(p, i);
        out.value += sample_term(p, x, i, want_grad ? &out.gradient : nullptr);
    }
    const auto m = static_cast<double>(indices.size());
    out.value /= m;
    if (want_grad) out.gradient /= m;
    return out;
}

GradSample mean_over_all(const Problem& p, const Vec& x, bool want_grad) {
    require_valid_inputs(p, x);
    GradSample out;
    out.value = 0.0;
    if (want_grad) out.gradient = Vec::Zero(p.dim());
    for (Index i = 0; i < p.n(); ++i) out.value += sample_term(p, x, i, want_grad ? &out.gradient : nullptr);
    const auto m = static_cast<double>(p.n());
    out.value /= m;
    if (want_grad) out.gradient /= m;
    return out;
}

void check_finite_data(const Dataset& data) {
    if (!data.features.allFinite() || !data.labels.allFinite())
        throw ConfigError("dataset contains non-finite values");
}

}  // namespace

ProblemKind parse_problem_kind(const std::string& name) {
    if (name == "logistic") return ProblemKind::Logistic;
    if (name == "least-squares") return ProblemKind::LeastSquares;
    if (name == "synthetic-quadratic") return ProblemKind::SyntheticQuadratic;
    throw ConfigError("unknown problem kind '" + name + "'");
}

std::string to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::Logistic: return "logistic";
        case ProblemKind::LeastSquares: return "least-squares";
        case ProblemKind::SyntheticQuadratic: return "synthetic-quadratic";
    }
    return "?";
}

Problem make_logistic(Dataset data, double lambda) {
    check_finite_data(data);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
    bool zero_one = true;
    for (Index i = 0; i < data.n(); ++i) {
        const double b = data.labels[i];
        if (b != 0.0 && b != 1.0) zero_one = false;
        if (b != -1.0 && b != 0.0 && b != 1.0)
            throw ConfigError("logistic label at row " + std::to_string(i) +
                              " is " + std::to_string(b) + "; expected -1/+1 (or 0/1)");
    }
    if (zero_one) {
        for (Index i = 0; i < data.n(); ++i) data.labels[i] = data.labels[i] == 0.0 ? -1.0 : 1.0;
    } else {
        for (Index i = 0; i < data.n(); ++i) {
            if (data.labels[i] == 0.0)
                throw ConfigError("logistic label at row " + std::to_string(i) +
                                  " is 0 in a -1/+1 labelled dataset");
        }
    }
    Problem p;
    p.kind = ProblemKind::Logistic;
    p.data = std::move(data);
    p.lambda = lambda;
    return p;
}

Problem make_least_squares(Dataset data, double lambda) {
    check_finite_data(data);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
    Problem p;
    p.kind = ProblemKind::LeastSquares;
    p.data = std::move(data);
    p.lambda = lambda;
    return p;
}

Problem generate_quadratic(Index n, Index d, double nu, double sigma, const Vec& x_star,
                           std::uint64_t seed) {
    if (n < 1 || d < 1) throw ConfigError("quadratic generator needs n >= 1 and d >= 1");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be finite and > 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be finite and >= 0");
    if (x_star.size() != d) throw ConfigError("x_star must have dimension d");
    if (!x_star.allFinite()) throw ConfigError("x_star must be finite");

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Problem p;
    p.kind = ProblemKind::SyntheticQuadratic;
    p.nu = nu;
    p.sigma = sigma;
    p.x_star = x_star;
    p.data.features = Mat(n, d);
    p.data.labels = Vec::Zero(n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) p.data.features(i, j) = x_star[j] + sigma * normal(rng);
    return p;
}

GradSample sample_loss(const Problem& problem, const Vec& x, Index i) {
    require_valid_inputs(problem, x);
    require_index(problem, i);
    GradSample out;
    out.gradient = Vec::Zero(problem.dim());
    out.value = sample_term(problem, x, i, &out.gradient);
    return out;
}

double sample_value(const Problem& problem, const Vec& x, Index i) {
    require_valid_inputs(problem, x);
    require_index(problem, i);
    return sample_term(problem, x, i, nullptr);
}

GradSample batch_loss(const Problem& problem, const Vec& x, std::span<const Index> indices) {
    return mean_over(problem, x, indices, true);
}

double batch_value(const Problem& problem, const Vec& x, std::span<const Index> indices) {
    return mean_over(problem, x, indices, false).value;
}

GradSample full_loss(const Problem& problem, const Vec& x) {
    return mean_over_all(problem, x, true);
}

double full_value(const Problem& problem, const Vec& x) {
    return mean_over_all(problem, x, false).value;
}

}  // namespace bigbatch
