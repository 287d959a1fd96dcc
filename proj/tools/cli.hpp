#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grr::cli {

// Fully resolved invocation of one subcommand.  Every field that matters to
// the selected subcommand is populated (from defaults, --config, then
// explicit flags, in that order); serialize() renders the normalized
// command line and is the round-trip anchor: parse(serialize(c)) == c.
struct RunConfig {
    std::string subcommand;

    std::string model = "fbm";  // fbm | heat
    std::vector<double> hurst;
    std::vector<std::size_t> grid;
    std::size_t replicates = 50;
    std::uint64_t seed = 0;
    std::string out_dir;

    std::string function;  // verify-grr builtin: prod | quad | sinprod | zero
    std::string psi = "expq";
    std::vector<std::string> p_specs;
    double slack = -1.0;  // <0: pick 0 for closed-form B, 0.05 for grid estimate
    std::size_t pairs = 256;

    std::string form = "hH";  // h | sigma | hH | sigmaH | heat
    std::vector<double> mod_hurst;
    double delta_max = 0.25;
    std::size_t cert_pairs = 32;
    std::string report_path;
    std::string csv_path;

    std::size_t t_grid = 33;
    std::size_t x_grid = 33;
    double alpha = 0.125;

    std::vector<double> eval_point;

    std::string serialize() const;
    bool operator==(const RunConfig&) const = default;
};

struct ParseOutcome {
    int exit_code = 0;      // meaningful when !should_run
    bool should_run = false;
    RunConfig config;
};

// argv excludes the program name.  Never exits; usage problems come back as
// exit_code 2 with the message already printed to stderr.
ParseOutcome parse_args(const std::vector<std::string>& argv);

// Executes the subcommand.  Returns the process exit code: 0 success,
// 1 certificate failure, 2 invalid configuration, 3 I/O failure.
int run(const RunConfig& config);

// 0 ok, 1 fail, 3 io-error; anything else maps to "error".
std::string status_word(int exit_code);

}  // namespace grr::cli
