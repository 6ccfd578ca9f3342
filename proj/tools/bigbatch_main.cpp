#include "bigbatch/format.hpp"
#include "bigbatch/harness.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr const char* kUsage =
    "usage: bigbatch <command> [options]\n"
    "\n"
    "commands:\n"
    "  run            one optimizer on one problem; writes a trace CSV\n"
    "  compare        several run configs on a shared problem; writes a summary CSV\n"
    "  gen-quadratic  materialize a synthetic quadratic dataset to disk\n"
    "\n"
    "`bigbatch <command> --help` lists the command's options.\n";

void parse_or_help(CLI::App& app, const std::vector<std::string>& args) {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw bigbatch::HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw bigbatch::ConfigError(e.what());
    }
}

int cmd_run(const std::vector<std::string>& args) {
    const bigbatch::RunConfig config = bigbatch::parse_config(args);
    const bigbatch::ExperimentResult result = bigbatch::run_experiment(config);
    if (result.exit_code != 0) std::cerr << "error: " << result.message << '\n';
    return result.exit_code;
}

int cmd_compare(const std::vector<std::string>& args) {
    std::vector<std::string> config_files;
    std::string seeds_text;
    double epochs_override = -1.0;
    std::string output;

    CLI::App app{"compare run configs on a shared problem"};
    app.add_option("--configs", config_files, "run config files, one per method variant")
        ->required()
        ->expected(-1);
    app.add_option("--seeds", seeds_text, "comma-separated seeds applied to every config");
    app.add_option("--epochs", epochs_override, "override the epoch budget of every config");
    app.add_option("--output", output, "summary CSV path (default stdout)");
    parse_or_help(app, args);

    std::vector<std::uint64_t> seeds;
    if (!seeds_text.empty()) {
        std::istringstream cells(seeds_text);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                seeds.push_back(std::stoull(cell));
            } catch (const std::exception&) {
                throw bigbatch::ConfigError("--seeds: bad seed '" + cell + "'");
            }
        }
    }

    std::vector<bigbatch::RunConfig> configs;
    for (const std::string& file : config_files) {
        bigbatch::RunConfig base = bigbatch::parse_config({"--config", file});
        if (epochs_override >= 0.0) base.epochs = epochs_override;
        if (seeds.empty()) {
            configs.push_back(base);
        } else {
            for (std::uint64_t s : seeds) {
                base.seed = s;
                configs.push_back(base);
            }
        }
    }

    const std::vector<bigbatch::CompareRow> rows = bigbatch::compare_methods(configs);
    const auto write_rows = [&](std::ostream& out) {
        out << bigbatch::compare_csv_header() << '\n';
        for (const bigbatch::CompareRow& row : rows) out << bigbatch::to_csv_row(row) << '\n';
    };
    if (output.empty()) {
        write_rows(std::cout);
    } else {
        std::ofstream file(output);
        if (!file) throw bigbatch::ConfigError("cannot open '" + output + "' for writing");
        write_rows(file);
        if (!file) throw bigbatch::ConfigError("failed writing '" + output + "'");
    }
    return 0;
}

int cmd_gen_quadratic(const std::vector<std::string>& args) {
    long long n = 1000;
    long long d = 10;
    double nu = 1.0;
    double sigma = 0.1;
    std::string x_star;
    std::uint64_t data_seed = 1;
    std::string format = "dense-csv";
    std::string output;

    CLI::App app{"materialize a synthetic quadratic dataset (centers as rows, labels 0)"};
    app.add_option("--n", n, "sample count");
    app.add_option("--d", d, "dimension");
    app.add_option("--nu", nu, "curvature");
    app.add_option("--sigma", sigma, "center spread");
    app.add_option("--x-star,--x_star", x_star, "center mean: scalar broadcast or comma list");
    app.add_option("--data-seed,--data_seed", data_seed, "generator seed");
    app.add_option("--format", format, "svm-sparse | dense-csv");
    app.add_option("--output", output, "dataset path")->required();
    parse_or_help(app, args);

    bigbatch::RunConfig probe;
    probe.problem = "synthetic-quadratic";
    probe.synth_n = n;
    probe.synth_d = d;
    probe.nu = nu;
    probe.sigma = sigma;
    probe.x_star = x_star;
    probe.data_seed = data_seed;
    probe.lambda = 0.0;
    const bigbatch::Problem problem = bigbatch::build_problem(probe);
    bigbatch::save_dataset(problem.data, output, bigbatch::parse_data_format(format));
    std::cout << "wrote " << output << " (n=" << problem.n() << ", d=" << problem.dim() << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        std::cerr << kUsage;
        return 2;
    }
    if (args[0] == "-h" || args[0] == "--help") {
        std::cout << kUsage;
        return 0;
    }
    const std::string command = args[0];
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    try {
        if (command == "run") return cmd_run(rest);
        if (command == "compare") return cmd_compare(rest);
        if (command == "gen-quadratic") return cmd_gen_quadratic(rest);
        std::cerr << "unknown command '" << command << "'\n\n" << kUsage;
        return 2;
    } catch (const bigbatch::HelpRequested& help) {
        std::cout << help.text;
        return 0;
    } catch (const bigbatch::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const bigbatch::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const bigbatch::LineSearchError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
