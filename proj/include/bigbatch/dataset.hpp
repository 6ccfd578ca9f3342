#pragma once

#include "bigbatch/types.hpp"

#include <string>

namespace bigbatch {

enum class DataFormat { SvmSparse, DenseCsv };

DataFormat parse_data_format(const std::string& name);

// Feature matrix (n x d) plus one label per row. Labels are stored as given;
// task-specific label rules are enforced when a problem is built on top.
struct Dataset {
    Mat features;
    Vec labels;

    Index n() const { return features.rows(); }
    Index dim() const { return features.cols(); }
};

// SvmSparse: "<label> <index>:<value> ..." with 1-based indices, dimension
// inferred from the largest index seen. DenseCsv: header-free rows of
// comma-separated values, label in the last column.
// Malformed lines raise ConfigError naming the line number.
Dataset load_dataset(const std::string& path, DataFormat format);

// Inverse of load_dataset; values written with 17 significant digits.
void save_dataset(const Dataset& data, const std::string& path, DataFormat format);

// Per-column z-score: subtract the column mean, divide by the population
// standard deviation (divisor n). Zero-variance columns become all zeros.
// Requires n >= 2.
Dataset normalize_features(const Dataset& data);

}  // namespace bigbatch
