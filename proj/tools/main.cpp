#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
    auto start = std::chrono::steady_clock::now();
    std::vector<std::string> args(argv + 1, argv + argc);
    grr::cli::ParseOutcome parsed = grr::cli::parse_args(args);
    if (!parsed.should_run) return parsed.exit_code;

    int code = grr::cli::run(parsed.config);

    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    nlohmann::ordered_json line;
    line["subcommand"] = parsed.config.subcommand;
    line["seed"] = parsed.config.seed;
    line["elapsed_ms"] = elapsed.count();
    line["status"] = grr::cli::status_word(code);
    std::printf("%s\n", line.dump().c_str());
    return code;
}
