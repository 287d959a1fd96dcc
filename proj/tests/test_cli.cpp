#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using grr::cli::parse_args;
using grr::cli::ParseOutcome;
using grr::cli::RunConfig;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::vector<std::string> lines;
};

// run the installed binary, capture stdout (stderr discarded)
CliResult run_cli(const std::string& args) {
    CliResult r;
    std::string cmd = std::string(GRR_CLI_BIN) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::istringstream is(r.out);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) r.lines.push_back(line);
    return r;
}

nlohmann::json status_line(const CliResult& r) {
    REQUIRE_FALSE(r.lines.empty());
    return nlohmann::json::parse(r.lines.back());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("grr_test_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse/serialize round trips on resolved configs") {
    auto round_trip = [](const std::vector<std::string>& args) {
        ParseOutcome first = parse_args(args);
        REQUIRE(first.should_run);
        const std::string line = first.config.serialize();
        ParseOutcome second = parse_args(split_words(line));
        REQUIRE(second.should_run);
        CHECK(second.config == first.config);
        CHECK(second.config.serialize() == line);
        return first.config;
    };

    RunConfig hol = round_trip({"holder", "--model", "fbm", "--hurst", "0.3,0.7",
                                "--grid", "9x9", "--form", "hH", "--delta", "0.25",
                                "--replicates", "3", "--seed", "11",
                                "--cert-pairs", "2"});
    CHECK(hol.mod_hurst == std::vector<double>{0.3, 0.7});  // defaulted from --hurst
    CHECK(hol.slack == 0.05);                               // resolved default

    RunConfig ver = round_trip({"verify-grr", "--function", "prod", "--psi", "pow:4",
                                "--p", "pow:1", "--grid", "17", "--pairs", "8",
                                "--seed", "3"});
    CHECK(ver.slack == 0.0);  // exact reference value available, no slack needed

    RunConfig cov = round_trip({"cov", "--model", "heat", "--eval", "1,0,1,0"});
    CHECK(cov.eval_point == std::vector<double>{1.0, 0.0, 1.0, 0.0});

    round_trip({"heat-holder", "--t-grid", "9", "--x-grid", "9", "--alpha", "0.1",
                "--replicates", "2", "--cert-pairs", "2"});
    round_trip({"simulate", "--model", "fbm", "--hurst", "0.5", "--grid", "9",
                "--replicates", "2", "--out", "/tmp/grr_rt_out"});
}

TEST_CASE("config file supplies defaults, flags override") {
    TempDir tmp("config");
    const fs::path cfg_path = tmp.path / "run.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"subcommand":"cov","model":"heat","eval":[1,0,1,0]})";
    }

    ParseOutcome from_config = parse_args({"--config", cfg_path.string()});
    REQUIRE(from_config.should_run);
    CHECK(from_config.config.subcommand == "cov");
    CHECK(from_config.config.model == "heat");
    CHECK(from_config.config.eval_point == std::vector<double>{1.0, 0.0, 1.0, 0.0});

    ParseOutcome overridden =
        parse_args({"cov", "--config", cfg_path.string(), "--eval", "1,0,0.5,0"});
    REQUIRE(overridden.should_run);
    CHECK(overridden.config.eval_point == std::vector<double>{1.0, 0.0, 0.5, 0.0});

    ParseOutcome conflict = parse_args({"verify-grr", "--config", cfg_path.string()});
    CHECK_FALSE(conflict.should_run);
    CHECK(conflict.exit_code == 2);

    ParseOutcome missing = parse_args({"--config", (tmp.path / "nope.json").string()});
    CHECK_FALSE(missing.should_run);
    CHECK(missing.exit_code == 3);

    const fs::path bad_key = tmp.path / "bad.json";
    {
        std::ofstream out(bad_key);
        out << R"({"subcommand":"cov","bogus":1})";
    }
    ParseOutcome unknown = parse_args({"--config", bad_key.string()});
    CHECK_FALSE(unknown.should_run);
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("usage errors are exit code 2") {
    auto expect_usage = [](const std::vector<std::string>& args) {
        ParseOutcome out = parse_args(args);
        CHECK_FALSE(out.should_run);
        CHECK(out.exit_code == 2);
    };
    expect_usage({"holder", "--model", "fbm", "--hurst", "0.5,0.5", "--grid", "9x9",
                  "--delta", "1.5"});
    expect_usage({"simulate", "--model", "fbm", "--hurst", "0.5", "--grid", "9",
                  "--replicates", "0", "--out", "/tmp/never"});
    expect_usage({"simulate", "--model", "fbm", "--hurst", "0.5", "--grid", "9"});
    expect_usage({"holder", "--bogus", "1"});
    expect_usage({"frobnicate"});
    expect_usage({"verify-grr", "--function", "prod", "--grid", "9",
                  "--p", "pow:0.5,pow:0.5"});
    expect_usage({"cov", "--model", "heat", "--eval", "1,0,1"});
    expect_usage({"heat-holder", "--alpha", "0.3"});
}

TEST_CASE("covariance query prints the value and a status line") {
    CliResult r = run_cli("cov --model heat --eval 1,0,1,0");
    CHECK(r.code == 0);
    REQUIRE(r.lines.size() == 2);
    CHECK(r.lines[0] == "0.564190");
    nlohmann::json s = status_line(r);
    CHECK(s["subcommand"] == "cov");
    CHECK(s["status"] == "ok");
    CHECK(s["seed"] == 0);
    CHECK(s["elapsed_ms"].is_number());

    CliResult bad = run_cli("cov --model fbm --hurst 1.5 --eval 0.5,1");
    CHECK(bad.code == 2);
}

TEST_CASE("two-sided bound check against an exact reference value") {
    TempDir tmp("verify");
    const fs::path report = tmp.path / "report.json";
    CliResult r = run_cli("verify-grr --function prod --psi pow:4 --p pow:1 "
                          "--grid 17 --pairs 16 --seed 3 --report " +
                          report.string());
    CHECK(r.code == 0);
    CHECK(status_line(r)["status"] == "ok");

    nlohmann::json doc = nlohmann::json::parse(slurp(report));
    CHECK(doc["format"] == "grr-report/1");
    CHECK(doc["pass"] == true);
    CHECK(doc["failures"] == 0);
    CHECK(doc["closed_form_B"] == true);
    CHECK(doc["checks"].size() == 16);
    double b = doc["B"].get<double>();
    CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("field snapshots are reproducible bytes") {
    TempDir tmp("sim");
    const fs::path a = tmp.path / "a", b = tmp.path / "b";
    const std::string common =
        "simulate --model fbm --hurst 0.5,0.5 --grid 5x5 --replicates 2 --seed 9 --out ";
    CliResult ra = run_cli(common + a.string());
    CHECK(ra.code == 0);
    CHECK(status_line(ra)["status"] == "ok");
    CliResult rb = run_cli(common + b.string());
    CHECK(rb.code == 0);

    for (const char* name : {"replicate_0000.json", "replicate_0001.json"}) {
        const std::string sa = slurp(a / name);
        CHECK(sa == slurp(b / name));
        nlohmann::json doc = nlohmann::json::parse(sa);
        CHECK(doc["model"] == "fbm");
        CHECK(doc["seed"] == 9);
        CHECK(doc["shape"] == nlohmann::json::array({5, 5}));
    }
    CHECK(slurp(a / "replicate_0000.json") != slurp(a / "replicate_0001.json"));
}

TEST_CASE("regularity experiment writes per-replicate rows") {
    TempDir tmp("holder");
    const fs::path csv = tmp.path / "rows.csv";
    CliResult r = run_cli("holder --model fbm --hurst 0.5,0.5 --grid 9x9 "
                          "--form hH --mod-hurst 0.45,0.45 --delta 0.25 "
                          "--replicates 2 --cert-pairs 2 --seed 4 --csv " +
                          csv.string());
    CHECK(r.code == 0);
    CHECK(status_line(r)["status"] == "ok");

    std::istringstream rows(slurp(csv));
    std::string line;
    REQUIRE(std::getline(rows, line));
    CHECK(line == "replicate,B,sup_ratio,pass");
    std::size_t count = 0;
    while (std::getline(rows, line)) {
        if (line.empty()) continue;
        ++count;
        CHECK(line.find(",true") != std::string::npos);
    }
    CHECK(count == 2);

    // report body lands on stdout before the status line
    std::string joined;
    for (std::size_t i = 0; i + 1 < r.lines.size(); ++i) joined += r.lines[i];
    nlohmann::json doc = nlohmann::json::parse(joined);
    CHECK(doc["format"] == "grr-report/1");
    CHECK(doc["grids"][0]["replicates"].size() == 2);
}

}
