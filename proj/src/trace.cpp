#include "bigbatch/trace.hpp"

#include "bigbatch/format.hpp"

namespace bigbatch {

std::string trace_csv_header() {
    return "method,seed,t,epoch,K,alpha,loss_full,grad_norm_full,elapsed_ms";
}

std::string to_csv_row(const TraceRecord& r) {
    std::string row = r.method;
    row += ',';
    row += std::to_string(r.seed);
    row += ',';
    row += std::to_string(r.t);
    row += ',';
    row += format_g17(r.epoch);
    row += ',';
    row += std::to_string(r.K);
    row += ',';
    row += format_g17(r.alpha);
    row += ',';
    row += format_g17(r.loss_full);
    row += ',';
    row += format_g17(r.grad_norm_full);
    row += ',';
    row += format_g17(r.elapsed_ms);
    return row;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records,
                     const std::string& terminal_comment) {
    out << trace_csv_header() << '\n';
    for (const TraceRecord& r : records) out << to_csv_row(r) << '\n';
    if (!terminal_comment.empty()) out << "# " << terminal_comment << '\n';
}

}  // namespace bigbatch
