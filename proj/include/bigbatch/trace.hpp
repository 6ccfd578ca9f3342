#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace bigbatch {

// One convergence-diagnostic row. loss_full and grad_norm_full are true
// full-data quantities evaluated for reporting only; they are not charged to
// the gradient-evaluation budget.
struct TraceRecord {
    std::string method;
    std::uint64_t seed = 0;
    long long t = 0;        // parameter updates completed
    double epoch = 0.0;     // grad_evals / n
    long long K = 0;        // batch size backing this update
    double alpha = 0.0;     // stepsize used
    double loss_full = 0.0;
    double grad_norm_full = 0.0;
    double elapsed_ms = 0.0;
};

// Exact column set and order of the CSV contract.
std::string trace_csv_header();

// Floating-point fields are written with 17 significant digits so traces
// round-trip bit-for-bit.
std::string to_csv_row(const TraceRecord& record);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records,
                     const std::string& terminal_comment = "");

}  // namespace bigbatch
