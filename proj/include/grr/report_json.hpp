#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace grr {

// Serializes a report with every number written as decimal with 17
// significant digits, so emitted bytes are reproducible and values
// round-trip exactly.
std::string dump_report(const nlohmann::ordered_json& j);

// atomic write (temp file + rename) with a trailing newline
void write_report(const nlohmann::ordered_json& j, const std::filesystem::path& path);

} // namespace grr
