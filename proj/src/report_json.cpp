#include "grr/report_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace grr {

namespace {

void indent(std::string& out, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

void dump_rec(const nlohmann::ordered_json& j, std::string& out, int depth) {
    using value_t = nlohmann::ordered_json::value_t;
    switch (j.type()) {
        case value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (const auto& [key, val] : j.items()) {
                indent(out, depth + 1);
                out += nlohmann::ordered_json(key).dump();
                out += ": ";
                dump_rec(val, out, depth + 1);
                if (++i < j.size()) out += ',';
                out += '\n';
            }
            indent(out, depth);
            out += '}';
            return;
        }
        case value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                indent(out, depth + 1);
                dump_rec(j[i], out, depth + 1);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            indent(out, depth);
            out += ']';
            return;
        }
        case value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                // JSON has no non-finite literals
                out += v > 0 ? "\"inf\"" : (v < 0 ? "\"-inf\"" : "\"nan\"");
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

} // namespace

std::string dump_report(const nlohmann::ordered_json& j) {
    std::string out;
    dump_rec(j, out, 0);
    return out;
}

void write_report(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
    const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open report file for writing: " + tmp.string());
        os << dump_report(j) << '\n';
        if (!os) throw std::runtime_error("report write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace grr
