#include "perp/report.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace perp {

#ifndef PERP_CODE_VERSION
#define PERP_CODE_VERSION "unversioned"
#endif

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    std::string hex(2 * len, '0');
    static const char* alphabet = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
        hex[2 * i] = alphabet[digest[i] >> 4];
        hex[2 * i + 1] = alphabet[digest[i] & 0x0f];
    }
    return hex;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Error::Kind::io_error, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string build_code_version() { return PERP_CODE_VERSION; }

std::string utc_now_iso8601() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char out[32];
    std::strftime(out, sizeof(out), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return out;
}

Provenance make_provenance(const std::vector<uint64_t>& seeds,
                           const std::vector<std::pair<std::string, std::string>>& input_files,
                           nlohmann::json parameter_snapshot) {
    Provenance p;
    p.code_version = build_code_version();
    p.dependency_snapshot = "cli11;doctest;nlohmann-json;openssl-libcrypto";
    p.seeds = seeds;
    for (const auto& [label, path] : input_files) p.input_hashes.emplace_back(label, sha256_file(path));
    p.parameter_snapshot = std::move(parameter_snapshot);
    p.utc_timestamp = utc_now_iso8601();
    return p;
}

nlohmann::json to_json(const Provenance& p) {
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [label, hex] : p.input_hashes) hashes[label] = hex;
    return {
        {"code_version", p.code_version},
        {"dependency_snapshot", p.dependency_snapshot},
        {"seeds", p.seeds},
        {"input_hashes", hashes},
        {"parameter_snapshot", p.parameter_snapshot},
        {"utc_timestamp", p.utc_timestamp},
    };
}

nlohmann::json make_report(const Provenance& p, nlohmann::json payload) {
    return {{"provenance", to_json(p)}, {"payload", std::move(payload)}};
}

bool reports_match(const nlohmann::json& a, const nlohmann::json& b) {
    nlohmann::json ca = a;
    nlohmann::json cb = b;
    for (nlohmann::json* r : {&ca, &cb})
        if (r->contains("provenance")) (*r)["provenance"].erase("utc_timestamp");
    return ca.dump() == cb.dump();
}

void write_report_file(const std::string& path, const nlohmann::json& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Error::Kind::io_error, "cannot write " + path);
    out << report.dump(2) << '\n';
}

nlohmann::json read_report_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Error::Kind::io_error, "cannot read " + path);
    nlohmann::json report = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (report.is_discarded()) throw Error(Error::Kind::malformed_record, "bad report JSON in " + path);
    return report;
}

}  // namespace perp
