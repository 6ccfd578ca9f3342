#include "bigbatch/dataset.hpp"

#include "bigbatch/format.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

namespace bigbatch {

namespace {

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no, const std::string& what) {
    throw ConfigError(path + ":" + std::to_string(line_no) + ": " + what);
}

bool blank(const std::string& s) {
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

double parse_double(const std::string& tok, const std::string& path, std::size_t line_no) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') fail_line(path, line_no, "bad number '" + tok + "'");
    return v;
}

Dataset load_svm_sparse(std::istream& in, const std::string& path) {
    struct Entry {
        Index col;
        double value;
    };
    std::vector<double> labels;
    std::vector<std::vector<Entry>> rows;
    Index max_col = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line) || line[0] == '#') continue;
        std::istringstream tokens(line);
        std::string tok;
        if (!(tokens >> tok)) continue;
        labels.push_back(parse_double(tok, path, line_no));
        rows.emplace_back();
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
                fail_line(path, line_no, "expected index:value, got '" + tok + "'");
            char* end = nullptr;
            const long idx = std::strtol(tok.c_str(), &end, 10);
            if (end != tok.c_str() + colon || idx < 1)
                fail_line(path, line_no, "bad feature index in '" + tok + "'");
            const double value = parse_double(tok.substr(colon + 1), path, line_no);
            rows.back().push_back({static_cast<Index>(idx - 1), value});
            max_col = std::max(max_col, static_cast<Index>(idx));
        }
    }
    if (labels.empty()) throw ConfigError(path + ": no samples found");

    Dataset data;
    data.features = Mat::Zero(static_cast<Index>(labels.size()), max_col);
    data.labels = Vec(static_cast<Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        data.labels[static_cast<Index>(i)] = labels[i];
        for (const Entry& e : rows[i]) data.features(static_cast<Index>(i), e.col) = e.value;
    }
    return data;
}

Dataset load_dense_csv(std::istream& in, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line) || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(parse_double(cell, path, line_no));
        if (row.size() < 2) fail_line(path, line_no, "need at least one feature and a label");
        if (width == 0) width = row.size();
        if (row.size() != width)
            fail_line(path, line_no,
                      "expected " + std::to_string(width) + " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": no samples found");

    const Index n = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(width - 1);
    Dataset data;
    data.features = Mat(n, d);
    data.labels = Vec(n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) data.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        data.labels[i] = rows[static_cast<std::size_t>(i)][width - 1];
    }
    return data;
}

}  // namespace

DataFormat parse_data_format(const std::string& name) {
    if (name == "svm-sparse") return DataFormat::SvmSparse;
    if (name == "dense-csv") return DataFormat::DenseCsv;
    throw ConfigError("unknown data format '" + name + "' (expected svm-sparse or dense-csv)");
}

Dataset load_dataset(const std::string& path, DataFormat format) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file '" + path + "'");
    return format == DataFormat::SvmSparse ? load_svm_sparse(in, path) : load_dense_csv(in, path);
}

void save_dataset(const Dataset& data, const std::string& path, DataFormat format) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    for (Index i = 0; i < data.n(); ++i) {
        if (format == DataFormat::SvmSparse) {
            out << format_g17(data.labels[i]);
            // Every entry is written, zeros included, so a reload recovers the
            // exact dimension even when trailing columns are zero.
            for (Index j = 0; j < data.dim(); ++j)
                out << ' ' << (j + 1) << ':' << format_g17(data.features(i, j));
        } else {
            for (Index j = 0; j < data.dim(); ++j) out << format_g17(data.features(i, j)) << ',';
            out << format_g17(data.labels[i]);
        }
        out << '\n';
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

Dataset normalize_features(const Dataset& data) {
    if (data.n() < 2) throw ConfigError("normalization needs at least 2 samples");
    Dataset out;
    out.labels = data.labels;
    out.features = data.features;
    const auto n = static_cast<double>(data.n());
    for (Index j = 0; j < data.dim(); ++j) {
        auto col = out.features.col(j);
        // A column whose entries are all identical carries no signal; emit
        // exact zeros rather than dividing by a rounding-level deviation.
        bool constant = true;
        for (Index i = 1; i < data.n(); ++i) {
            if (col[i] != col[0]) {
                constant = false;
                break;
            }
        }
        if (constant) {
            col.setZero();
            continue;
        }
        const double mean = col.sum() / n;
        col.array() -= mean;
        const double sd = std::sqrt(col.squaredNorm() / n);
        col /= sd;
    }
    return out;
}

}  // namespace bigbatch
