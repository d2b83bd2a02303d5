#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "perp/types.hpp"

namespace perp {

// Every emitted artifact carries one of these so a report can be traced back
// to the exact code, inputs and parameters that produced it.
struct Provenance {
    std::string code_version;
    std::string dependency_snapshot;
    std::vector<uint64_t> seeds;
    std::vector<std::pair<std::string, std::string>> input_hashes;  // (label, sha256 hex)
    nlohmann::json parameter_snapshot = nlohmann::json::object();
    std::string utc_timestamp;
};

std::string sha256_hex(const std::string& bytes);
// Throws io_error when the file cannot be read.
std::string sha256_file(const std::string& path);

std::string build_code_version();
std::string utc_now_iso8601();

// Fills code version, dependency snapshot and timestamp; hashes each named
// input file.
Provenance make_provenance(const std::vector<uint64_t>& seeds,
                           const std::vector<std::pair<std::string, std::string>>& input_files,
                           nlohmann::json parameter_snapshot);

nlohmann::json to_json(const Provenance& p);

// {"provenance": ..., "payload": ...}
nlohmann::json make_report(const Provenance& p, nlohmann::json payload);

// Byte comparison of two serialized reports with provenance.utc_timestamp
// (the only run-dependent field) removed from both sides first.
bool reports_match(const nlohmann::json& a, const nlohmann::json& b);

void write_report_file(const std::string& path, const nlohmann::json& report);
nlohmann::json read_report_file(const std::string& path);

}  // namespace perp
