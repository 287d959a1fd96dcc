#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "grr/experiments.hpp"
#include "grr/field_grid.hpp"
#include "grr/gaussian_fields.hpp"
#include "grr/grr_core.hpp"
#include "grr/modulus.hpp"
#include "grr/report_json.hpp"
#include "grr/rng.hpp"

namespace grr::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty number");
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_double(tok));
    return out;
}

// "33x33" or a single "65"
std::vector<std::size_t> parse_grid_spec(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& tok : split(s, 'x')) {
        if (tok.empty()) throw std::invalid_argument("bad grid spec '" + s + "'");
        char* end = nullptr;
        unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
        if (end != tok.c_str() + tok.size())
            throw std::invalid_argument("bad grid spec '" + s + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(v[i]);
    }
    return out;
}

std::string join_grid(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += 'x';
        out += std::to_string(v[i]);
    }
    return out;
}

std::string join_strings(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

constexpr const char* kSubcommands[] = {"simulate", "verify-grr", "holder", "heat-holder", "cov"};

bool is_subcommand(const std::string& s) {
    for (const char* name : kSubcommands)
        if (s == name) return true;
    return false;
}

// Applies a config file: keys are the long option names without the leading
// dashes, plus "subcommand".  Lists accept either a JSON array or the same
// comma/x-joined string the flag takes.
void apply_config_json(const ordered_json& doc, RunConfig& cfg, std::string& subcommand) {
    if (!doc.is_object()) throw std::invalid_argument("config root must be a JSON object");
    auto as_doubles = [](const ordered_json& v) -> std::vector<double> {
        if (v.is_string()) return parse_double_list(v.get<std::string>());
        if (!v.is_array()) throw std::invalid_argument("expected array or string");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(e.get<double>());
        return out;
    };
    for (const auto& [key, value] : doc.items()) {
        if (key == "subcommand") subcommand = value.get<std::string>();
        else if (key == "model") cfg.model = value.get<std::string>();
        else if (key == "hurst") cfg.hurst = as_doubles(value);
        else if (key == "grid") {
            if (value.is_string()) cfg.grid = parse_grid_spec(value.get<std::string>());
            else {
                cfg.grid.clear();
                for (const auto& e : value) cfg.grid.push_back(e.get<std::size_t>());
            }
        } else if (key == "replicates") cfg.replicates = value.get<std::size_t>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "out") cfg.out_dir = value.get<std::string>();
        else if (key == "function") cfg.function = value.get<std::string>();
        else if (key == "psi") cfg.psi = value.get<std::string>();
        else if (key == "p") {
            if (value.is_string()) cfg.p_specs = split(value.get<std::string>(), ',');
            else {
                cfg.p_specs.clear();
                for (const auto& e : value) cfg.p_specs.push_back(e.get<std::string>());
            }
        } else if (key == "slack") cfg.slack = value.get<double>();
        else if (key == "pairs") cfg.pairs = value.get<std::size_t>();
        else if (key == "form") cfg.form = value.get<std::string>();
        else if (key == "mod-hurst") cfg.mod_hurst = as_doubles(value);
        else if (key == "delta") cfg.delta_max = value.get<double>();
        else if (key == "cert-pairs") cfg.cert_pairs = value.get<std::size_t>();
        else if (key == "report") cfg.report_path = value.get<std::string>();
        else if (key == "csv") cfg.csv_path = value.get<std::string>();
        else if (key == "t-grid") cfg.t_grid = value.get<std::size_t>();
        else if (key == "x-grid") cfg.x_grid = value.get<std::size_t>();
        else if (key == "alpha") cfg.alpha = value.get<double>();
        else if (key == "eval") cfg.eval_point = as_doubles(value);
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

FieldFn builtin_field(const std::string& name) {
    if (name == "prod")
        return [](std::span<const double> x) {
            double v = 1;
            for (double t : x) v *= t;
            return v;
        };
    if (name == "quad")
        return [](std::span<const double> x) {
            double v = 1;
            for (double t : x) v *= t * t;
            return v;
        };
    if (name == "sinprod")
        return [](std::span<const double> x) {
            double v = 1;
            for (double t : x) v *= std::sin(std::numbers::pi * t);
            return v;
        };
    if (name == "zero")
        return [](std::span<const double>) { return 0.0; };
    throw std::invalid_argument("unknown builtin function '" + name + "'");
}

// Exact B where the double integral is elementary.  prod has box increment
// prod (x_k - y_k), so under a power Psi and power moduli each axis
// contributes scale^-alpha * int |x-y|^(alpha(1-gamma)) = scale^-alpha *
// 2/((c+1)(c+2)) with c = alpha(1-gamma); c <= -1 diverges.  zero gives
// Psi(0) times unit volume for any moduli.
std::optional<double> builtin_closed_form_b(const std::string& name, const YoungFunction& psi,
                                            const std::vector<ModulusFunction>& moduli) {
    if (name == "zero") return psi(0.0);
    if (name != "prod") return std::nullopt;
    if (psi.kind() != YoungFunction::Kind::power) return std::nullopt;
    double alpha = psi.alpha();
    double b = 1;
    for (const auto& m : moduli) {
        if (m.kind() != ModulusFunction::Kind::power) return std::nullopt;
        double c = alpha * (1.0 - m.gamma());
        if (c <= -1.0) return std::numeric_limits<double>::infinity();
        b *= std::pow(m.scale(), -alpha) * 2.0 / ((c + 1.0) * (c + 2.0));
    }
    return b;
}

// Midpoint cells per axis for the 2n-dimensional B integral of a callable
// field; graded down so the n = 3 case stays around 10^6 evaluations.
int callable_resolution(std::size_t dim) {
    if (dim <= 1) return 256;
    if (dim == 2) return 48;
    if (dim == 3) return 12;
    return 6;
}

CovarianceModel make_model(const RunConfig& cfg) {
    if (cfg.model == "fbm") return CovarianceModel::fbm(cfg.hurst);
    if (cfg.model == "heat") return CovarianceModel::heat();
    throw std::invalid_argument("unknown model '" + cfg.model + "'");
}

LogModulatedModulus make_form(const RunConfig& cfg) {
    std::vector<ModulusFunction> base;
    for (const auto& s : cfg.p_specs) base.push_back(ModulusFunction::parse(s));
    if (cfg.form == "h") return LogModulatedModulus::h_form(std::move(base));
    if (cfg.form == "sigma") return LogModulatedModulus::sigma_form(std::move(base));
    if (cfg.form == "hH") return LogModulatedModulus::hH_form(cfg.mod_hurst);
    if (cfg.form == "sigmaH") return LogModulatedModulus::sigmaH_form(cfg.mod_hurst);
    if (cfg.form == "heat") return LogModulatedModulus::heat_form(cfg.alpha);
    throw std::invalid_argument("unknown modulus form '" + cfg.form + "'");
}

struct Finalized {
    int exit_code = 0;
    std::string error;
};

Finalized fail_usage(std::string msg) { return {2, std::move(msg)}; }

// Validates and resolves cfg in place (auto slack, defaulted mod-hurst).
Finalized finalize(RunConfig& cfg) {
    const std::string& sub = cfg.subcommand;
    auto check_model_grid = [&]() -> Finalized {
        if (cfg.model != "fbm" && cfg.model != "heat")
            return fail_usage("--model must be fbm or heat");
        if (cfg.grid.empty()) return fail_usage("--grid is required");
        if (cfg.grid.size() > 8) return fail_usage("at most 8 axes supported");
        for (std::size_t m : cfg.grid)
            if (m < 2) return fail_usage("every grid axis needs at least 2 nodes");
        if (cfg.model == "fbm") {
            if (cfg.hurst.empty()) return fail_usage("--model fbm requires --hurst");
            if (cfg.hurst.size() != cfg.grid.size())
                return fail_usage("--hurst needs one index per grid axis");
            for (double h : cfg.hurst)
                if (!(h > 0.0 && h <= 1.0))
                    return fail_usage("Hurst index " + fmt_double(h) + " outside (0, 1]");
        } else {
            if (!cfg.hurst.empty()) return fail_usage("--hurst applies only to --model fbm");
            if (cfg.grid.size() != 2) return fail_usage("--model heat needs a 2-axis grid");
        }
        return {};
    };
    auto check_alpha = [&]() -> Finalized {
        if (!(cfg.alpha >= 0.0 && cfg.alpha <= 0.25))
            return fail_usage("--alpha must lie in [0, 0.25]");
        if (cfg.cert_pairs > 0 && !(cfg.alpha > 0.0 && cfg.alpha < 0.25))
            return fail_usage(
                "certificates need --alpha strictly inside (0, 0.25); pass --cert-pairs 0");
        return {};
    };
    auto check_delta = [&]() -> Finalized {
        if (!(cfg.delta_max > 0.0 && cfg.delta_max < 1.0))
            return fail_usage("--delta must lie in (0, 1)");
        return {};
    };

    if (sub == "simulate") {
        if (auto f = check_model_grid(); f.exit_code) return f;
        if (cfg.replicates == 0) return fail_usage("--replicates must be positive");
        if (cfg.out_dir.empty()) return fail_usage("--out is required");
        return {};
    }
    if (sub == "verify-grr") {
        if (cfg.grid.empty()) return fail_usage("--grid is required");
        for (std::size_t m : cfg.grid)
            if (m < 2) return fail_usage("every grid axis needs at least 2 nodes");
        if (cfg.function.empty()) return fail_usage("--function is required");
        if (cfg.pairs == 0) return fail_usage("--pairs must be positive");
        YoungFunction psi = YoungFunction::power(1);
        std::vector<ModulusFunction> moduli;
        try {
            psi = YoungFunction::parse(cfg.psi);
            builtin_field(cfg.function);
            if (cfg.p_specs.size() != cfg.grid.size())
                return fail_usage("--p needs one modulus per grid axis");
            for (const auto& s : cfg.p_specs) moduli.push_back(ModulusFunction::parse(s));
        } catch (const std::invalid_argument& e) {
            return fail_usage(e.what());
        } catch (const std::exception& e) {
            return {3, e.what()};  // tab: modulus file unreadable
        }
        if (cfg.slack < 0)
            cfg.slack = builtin_closed_form_b(cfg.function, psi, moduli) ? 0.0 : 0.05;
        return {};
    }
    if (sub == "holder") {
        if (auto f = check_model_grid(); f.exit_code) return f;
        if (cfg.replicates == 0) return fail_usage("--replicates must be positive");
        if (auto f = check_delta(); f.exit_code) return f;
        if (cfg.slack < 0) cfg.slack = 0.05;
        if (cfg.form == "h" || cfg.form == "sigma") {
            if (!cfg.mod_hurst.empty()) return fail_usage("--mod-hurst applies only to hH/sigmaH");
            if (cfg.p_specs.size() != cfg.grid.size())
                return fail_usage("form " + cfg.form + " needs --p with one modulus per axis");
            try {
                for (const auto& s : cfg.p_specs) ModulusFunction::parse(s);
            } catch (const std::invalid_argument& e) {
                return fail_usage(e.what());
            } catch (const std::exception& e) {
                return {3, e.what()};
            }
        } else if (cfg.form == "hH" || cfg.form == "sigmaH") {
            if (!cfg.p_specs.empty()) return fail_usage("--p applies only to forms h/sigma");
            if (cfg.mod_hurst.empty()) {
                if (cfg.model != "fbm")
                    return fail_usage("form " + cfg.form + " needs --mod-hurst for this model");
                cfg.mod_hurst = cfg.hurst;
            }
            if (cfg.mod_hurst.size() != cfg.grid.size())
                return fail_usage("--mod-hurst needs one index per grid axis");
            for (double h : cfg.mod_hurst)
                if (!(h > 0.0 && h <= 1.0))
                    return fail_usage("modulus Hurst " + fmt_double(h) + " outside (0, 1]");
        } else if (cfg.form == "heat") {
            if (!cfg.p_specs.empty() || !cfg.mod_hurst.empty())
                return fail_usage("form heat takes --alpha, not --p/--mod-hurst");
            if (cfg.grid.size() != 2) return fail_usage("form heat needs a 2-axis grid");
            if (auto f = check_alpha(); f.exit_code) return f;
        } else {
            return fail_usage("--form must be one of h, sigma, hH, sigmaH, heat");
        }
        return {};
    }
    if (sub == "heat-holder") {
        if (cfg.t_grid < 2 || cfg.x_grid < 2)
            return fail_usage("--t-grid and --x-grid need at least 2 nodes");
        if (cfg.replicates == 0) return fail_usage("--replicates must be positive");
        if (auto f = check_delta(); f.exit_code) return f;
        if (auto f = check_alpha(); f.exit_code) return f;
        if (cfg.slack < 0) cfg.slack = 0.05;
        return {};
    }
    if (sub == "cov") {
        if (cfg.model == "fbm") {
            if (cfg.hurst.empty()) return fail_usage("--model fbm requires --hurst");
            for (double h : cfg.hurst)
                if (!(h > 0.0 && h <= 1.0))
                    return fail_usage("Hurst index " + fmt_double(h) + " outside (0, 1]");
            if (cfg.eval_point.size() != 2 * cfg.hurst.size())
                return fail_usage("--eval needs both points: 2 * dim coordinates");
        } else if (cfg.model == "heat") {
            if (!cfg.hurst.empty()) return fail_usage("--hurst applies only to --model fbm");
            if (cfg.eval_point.size() != 4)
                return fail_usage("--eval for heat takes s,x,t,y");
            if (cfg.eval_point[0] < 0 || cfg.eval_point[2] < 0)
                return fail_usage("heat times must be nonnegative");
        } else {
            return fail_usage("--model must be fbm or heat");
        }
        return {};
    }
    return fail_usage("unknown subcommand");
}

void emit_report(const ordered_json& j, const std::string& path) {
    if (path.empty()) {
        std::fputs(dump_report(j).c_str(), stdout);
        std::fputc('\n', stdout);
    } else {
        write_report(j, path);
    }
}

int run_cov(const RunConfig& cfg) {
    CovarianceModel model = make_model(cfg);
    std::size_t n = model.dim();
    std::vector<double> x(cfg.eval_point.begin(), cfg.eval_point.begin() + n);
    std::vector<double> y(cfg.eval_point.begin() + n, cfg.eval_point.end());
    std::printf("%.6f\n", model(x, y));
    return 0;
}

int run_simulate(const RunConfig& cfg) {
    CovarianceModel model = make_model(cfg);
    auto axes = uniform_axes(cfg.grid);
    FieldSampler sampler(model, axes);
    fs::create_directories(cfg.out_dir);
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    if (cfg.model == "fbm") params["hurst"] = cfg.hurst;
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
        SampledGaussianField s{cfg.model,           params, cfg.seed, r,
                               sampler.max_jitter(), sampler.sample(cfg.seed, r)};
        char name[40];
        std::snprintf(name, sizeof name, "replicate_%04zu.json", r);
        write_snapshot(s.field, fs::path(cfg.out_dir) / name, s.metadata());
    }
    return 0;
}

int run_verify(const RunConfig& cfg) {
    std::size_t n = cfg.grid.size();
    YoungFunction psi = YoungFunction::parse(cfg.psi);
    std::vector<ModulusFunction> moduli;
    for (const auto& s : cfg.p_specs) moduli.push_back(ModulusFunction::parse(s));
    std::optional<double> closed = builtin_closed_form_b(cfg.function, psi, moduli);

    GrrProblem prob{CallableField{builtin_field(cfg.function), static_cast<int>(n)}, psi, moduli,
                    callable_resolution(n)};
    auto axes = uniform_axes(cfg.grid);
    Xoshiro256pp rng(cfg.seed, 0xC11u);
    auto draw_index = [&](std::size_t size) {
        auto i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(size));
        return i < size ? i : size - 1;
    };
    std::vector<PointPair> pairs(cfg.pairs);
    for (auto& pp : pairs) {
        pp.x.resize(n);
        pp.y.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            pp.x[k] = axes[k][draw_index(axes[k].size())];
            pp.y[k] = axes[k][draw_index(axes[k].size())];
        }
    }

    GrrReport rep = verify_grr(prob, pairs, cfg.slack, closed);

    ordered_json j;
    j["format"] = "grr-report/1";
    j["subcommand"] = "verify-grr";
    j["function"] = cfg.function;
    j["psi"] = psi.to_string();
    ordered_json plist = ordered_json::array();
    for (const auto& m : moduli) plist.push_back(m.to_string());
    j["p"] = plist;
    j["grid"] = cfg.grid;
    j["seed"] = cfg.seed;
    j["slack"] = rep.slack;
    j["closed_form_B"] = rep.closed_form_B;
    j["B"] = std::isinf(rep.B) ? ordered_json("inf") : ordered_json(rep.B);
    j["pairs"] = rep.pairs.size();
    j["failures"] = rep.failures;
    j["pass"] = rep.pass;
    ordered_json checks = ordered_json::array();
    for (const auto& c : rep.pairs) {
        ordered_json row;
        row["x"] = c.pair.x;
        row["y"] = c.pair.y;
        row["lhs"] = c.lhs;
        row["rhs"] = std::isinf(c.rhs) ? ordered_json("inf") : ordered_json(c.rhs);
        row["pass"] = c.pass;
        row["vacuous"] = c.vacuous;
        checks.push_back(std::move(row));
    }
    j["checks"] = std::move(checks);
    emit_report(j, cfg.report_path);
    return rep.pass ? 0 : 1;
}

void write_csv(const RegularityReport& rep, const std::string& path) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
        out << "replicate,B,sup_ratio,pass\n";
        for (const auto& g : rep.grids)
            for (const auto& r : g.rows)
                out << r.replicate << ',' << fmt_double(r.B) << ',' << fmt_double(r.sup_ratio)
                    << ',' << (r.certificate_pass ? "true" : "false") << '\n';
        if (!out) throw std::runtime_error("write to '" + path + "' failed");
    }
    fs::rename(tmp, target);
}

int run_regularity(const RunConfig& cfg, const CovarianceModel& model,
                   const std::vector<std::size_t>& grid, const LogModulatedModulus& modulus) {
    ExperimentSpec spec{model,    grid,     modulus,   cfg.delta_max,
                        cfg.replicates, cfg.seed, cfg.slack, cfg.cert_pairs};
    std::vector<std::vector<std::size_t>> grids{grid};
    RegularityReport rep = refinement_sweep(spec, grids);
    emit_report(rep.to_json(), cfg.report_path);
    if (!cfg.csv_path.empty()) write_csv(rep, cfg.csv_path);
    for (const auto& g : rep.grids)
        for (const auto& r : g.rows)
            if (!r.certificate_pass) return 1;
    return 0;
}

int run_holder(const RunConfig& cfg) {
    return run_regularity(cfg, make_model(cfg), cfg.grid, make_form(cfg));
}

int run_heat_holder(const RunConfig& cfg) {
    return run_regularity(cfg, CovarianceModel::heat(), {cfg.t_grid, cfg.x_grid},
                          LogModulatedModulus::heat_form(cfg.alpha));
}

}  // namespace

std::string RunConfig::serialize() const {
    std::vector<std::string> a{subcommand};
    auto opt = [&](const char* flag, std::string v) {
        a.emplace_back(flag);
        a.push_back(std::move(v));
    };
    if (subcommand == "simulate") {
        opt("--model", model);
        if (!hurst.empty()) opt("--hurst", join_doubles(hurst));
        opt("--grid", join_grid(grid));
        opt("--replicates", std::to_string(replicates));
        opt("--seed", std::to_string(seed));
        opt("--out", out_dir);
    } else if (subcommand == "verify-grr") {
        opt("--function", function);
        opt("--psi", psi);
        opt("--p", join_strings(p_specs));
        opt("--grid", join_grid(grid));
        if (slack >= 0) opt("--slack", fmt_double(slack));
        opt("--pairs", std::to_string(pairs));
        opt("--seed", std::to_string(seed));
        if (!report_path.empty()) opt("--report", report_path);
    } else if (subcommand == "holder") {
        opt("--model", model);
        if (!hurst.empty()) opt("--hurst", join_doubles(hurst));
        opt("--grid", join_grid(grid));
        opt("--form", form);
        if (!p_specs.empty()) opt("--p", join_strings(p_specs));
        if (!mod_hurst.empty()) opt("--mod-hurst", join_doubles(mod_hurst));
        if (form == "heat") opt("--alpha", fmt_double(alpha));
        opt("--delta", fmt_double(delta_max));
        opt("--replicates", std::to_string(replicates));
        opt("--seed", std::to_string(seed));
        if (slack >= 0) opt("--slack", fmt_double(slack));
        opt("--cert-pairs", std::to_string(cert_pairs));
        if (!report_path.empty()) opt("--report", report_path);
        if (!csv_path.empty()) opt("--csv", csv_path);
    } else if (subcommand == "heat-holder") {
        opt("--t-grid", std::to_string(t_grid));
        opt("--x-grid", std::to_string(x_grid));
        opt("--alpha", fmt_double(alpha));
        opt("--delta", fmt_double(delta_max));
        opt("--replicates", std::to_string(replicates));
        opt("--seed", std::to_string(seed));
        if (slack >= 0) opt("--slack", fmt_double(slack));
        opt("--cert-pairs", std::to_string(cert_pairs));
        if (!report_path.empty()) opt("--report", report_path);
        if (!csv_path.empty()) opt("--csv", csv_path);
    } else if (subcommand == "cov") {
        opt("--model", model);
        if (!hurst.empty()) opt("--hurst", join_doubles(hurst));
        opt("--eval", join_doubles(eval_point));
        opt("--seed", std::to_string(seed));
    }
    std::string line;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) line += ' ';
        line += a[i];
    }
    return line;
}

ParseOutcome parse_args(const std::vector<std::string>& argv) {
    ParseOutcome out;
    RunConfig& cfg = out.config;

    std::string config_path;
    for (std::size_t i = 0; i + 1 < argv.size(); ++i)
        if (argv[i] == "--config") config_path = argv[i + 1];
    std::string sub_from_config;
    if (!config_path.empty()) {
        ordered_json doc;
        try {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
            doc = ordered_json::parse(in);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            out.exit_code = 3;
            return out;
        }
        try {
            apply_config_json(doc, cfg, sub_from_config);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            out.exit_code = 2;
            return out;
        }
    }

    // subcommand may live in the config file alone
    std::vector<std::string> args = argv;
    bool has_sub = !args.empty() && is_subcommand(args.front());
    if (!has_sub && !sub_from_config.empty()) {
        if (!is_subcommand(sub_from_config)) {
            std::fprintf(stderr, "error: unknown subcommand '%s' in config\n",
                         sub_from_config.c_str());
            out.exit_code = 2;
            return out;
        }
        args.insert(args.begin(), sub_from_config);
    } else if (has_sub && !sub_from_config.empty() && args.front() != sub_from_config) {
        std::fprintf(stderr, "error: config subcommand '%s' conflicts with '%s'\n",
                     sub_from_config.c_str(), args.front().c_str());
        out.exit_code = 2;
        return out;
    }

    CLI::App app{"rectangular-increment regularity toolkit"};
    app.require_subcommand(1);
    std::string config_sink;
    std::string hurst_s, grid_s, p_s, mod_hurst_s, eval_s;

    auto add_common = [&](CLI::App* sc) {
        sc->add_option("--config", config_sink, "JSON file supplying any of these options");
        sc->add_option("--seed", cfg.seed, "RNG seed");
    };

    CLI::App* sim = app.add_subcommand("simulate", "sample a Gaussian field, write snapshots");
    add_common(sim);
    sim->add_option("--model", cfg.model, "fbm | heat");
    sim->add_option("--hurst", hurst_s, "comma list of Hurst indices (fbm)");
    sim->add_option("--grid", grid_s, "grid shape, e.g. 33x33");
    sim->add_option("--replicates", cfg.replicates, "number of replicates");
    sim->add_option("--out", cfg.out_dir, "output directory");

    CLI::App* ver = app.add_subcommand("verify-grr",
                                       "check the two-sided bound on a builtin function");
    add_common(ver);
    ver->add_option("--function", cfg.function, "prod | quad | sinprod | zero");
    ver->add_option("--psi", cfg.psi, "Young function, pow:<a> or expq");
    ver->add_option("--p", p_s, "comma list of per-axis moduli, e.g. pow:1,pow:0.7");
    ver->add_option("--grid", grid_s, "grid shape for check pairs");
    ver->add_option("--slack", cfg.slack, "relative slack (default 0 exact B, 0.05 grid B)");
    ver->add_option("--pairs", cfg.pairs, "random pairs to check");
    ver->add_option("--report", cfg.report_path, "write the JSON report here");

    CLI::App* hol = app.add_subcommand("holder", "Monte Carlo modulus experiment on one grid");
    add_common(hol);
    hol->add_option("--model", cfg.model, "fbm | heat");
    hol->add_option("--hurst", hurst_s, "comma list of Hurst indices (fbm)");
    hol->add_option("--grid", grid_s, "grid shape, e.g. 33x33");
    hol->add_option("--form", cfg.form, "h | sigma | hH | sigmaH | heat");
    hol->add_option("--p", p_s, "per-axis moduli for forms h/sigma");
    hol->add_option("--mod-hurst", mod_hurst_s, "Hurst list for hH/sigmaH (defaults to --hurst)");
    hol->add_option("--alpha", cfg.alpha, "time exponent for form heat");
    hol->add_option("--delta", cfg.delta_max, "max per-axis separation, in (0, 1)");
    hol->add_option("--replicates", cfg.replicates, "number of replicates");
    hol->add_option("--slack", cfg.slack, "certificate slack (default 0.05)");
    hol->add_option("--cert-pairs", cfg.cert_pairs, "certificate pairs per replicate, 0 disables");
    hol->add_option("--report", cfg.report_path, "write the JSON report here");
    hol->add_option("--csv", cfg.csv_path, "write per-replicate CSV here");

    CLI::App* hh = app.add_subcommand("heat-holder",
                                      "space-time regularity experiment for the heat model");
    add_common(hh);
    hh->add_option("--t-grid", cfg.t_grid, "time axis nodes");
    hh->add_option("--x-grid", cfg.x_grid, "space axis nodes");
    hh->add_option("--alpha", cfg.alpha, "time exponent in (0, 0.25)");
    hh->add_option("--delta", cfg.delta_max, "max per-axis separation, in (0, 1)");
    hh->add_option("--replicates", cfg.replicates, "number of replicates");
    hh->add_option("--slack", cfg.slack, "certificate slack (default 0.05)");
    hh->add_option("--cert-pairs", cfg.cert_pairs, "certificate pairs per replicate, 0 disables");
    hh->add_option("--report", cfg.report_path, "write the JSON report here");
    hh->add_option("--csv", cfg.csv_path, "write per-replicate CSV here");

    CLI::App* cov = app.add_subcommand("cov", "evaluate the model covariance at one pair");
    add_common(cov);
    cov->add_option("--model", cfg.model, "fbm | heat");
    cov->add_option("--hurst", hurst_s, "comma list of Hurst indices (fbm)");
    cov->add_option("--eval", eval_s, "2*dim coordinates: first point then second");

    std::vector<const char*> cargv;
    cargv.push_back("grr");
    for (const auto& s : args) cargv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        out.exit_code = app.exit(e);
        return out;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        out.exit_code = 2;
        return out;
    }

    for (const char* name : kSubcommands)
        if (app.got_subcommand(name)) cfg.subcommand = name;

    try {
        if (!hurst_s.empty()) cfg.hurst = parse_double_list(hurst_s);
        if (!grid_s.empty()) cfg.grid = parse_grid_spec(grid_s);
        if (!p_s.empty()) cfg.p_specs = split(p_s, ',');
        if (!mod_hurst_s.empty()) cfg.mod_hurst = parse_double_list(mod_hurst_s);
        if (!eval_s.empty()) cfg.eval_point = parse_double_list(eval_s);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        out.exit_code = 2;
        return out;
    }

    Finalized fin = finalize(cfg);
    if (fin.exit_code) {
        std::fprintf(stderr, "error: %s\n", fin.error.c_str());
        out.exit_code = fin.exit_code;
        return out;
    }
    out.should_run = true;
    return out;
}

int run(const RunConfig& cfg) {
    try {
        if (cfg.subcommand == "simulate") return run_simulate(cfg);
        if (cfg.subcommand == "verify-grr") return run_verify(cfg);
        if (cfg.subcommand == "holder") return run_holder(cfg);
        if (cfg.subcommand == "heat-holder") return run_heat_holder(cfg);
        if (cfg.subcommand == "cov") return run_cov(cfg);
        std::fprintf(stderr, "error: unknown subcommand '%s'\n", cfg.subcommand.c_str());
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

std::string status_word(int exit_code) {
    switch (exit_code) {
        case 0: return "ok";
        case 1: return "fail";
        case 3: return "io-error";
        default: return "error";
    }
}

}  // namespace grr::cli
