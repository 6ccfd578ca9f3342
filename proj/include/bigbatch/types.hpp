#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bigbatch {

using Vec = Eigen::VectorXd;
// Row-major so per-sample feature rows are contiguous.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Invalid configuration or malformed input data. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterate or loss blew past the divergence threshold. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Backtracking exhausted its halving budget. CLI exit code 4.
class LineSearchError : public std::runtime_error {
public:
    LineSearchError(const std::string& msg, double last_alpha)
        : std::runtime_error(msg), last_alpha(last_alpha) {}
    double last_alpha;
};

// Iterates larger than this (in norm or loss) abort the run as divergent.
inline constexpr double kDivergenceThreshold = 1e12;

}  // namespace bigbatch
