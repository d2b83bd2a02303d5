#include <cstdio>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "perp/report.hpp"

using namespace perp;
namespace fs = std::filesystem;

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("file hashing agrees with string hashing and rejects missing paths") {
    const fs::path p = fs::temp_directory_path() / "perp_report_hash.bin";
    {
        std::ofstream out(p, std::ios::binary);
        out << "abc";
    }
    CHECK(sha256_file(p.string()) == sha256_hex("abc"));
    fs::remove(p);

    try {
        sha256_file((fs::temp_directory_path() / "perp_no_such_file").string());
        FAIL("expected an io_error");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::io_error);
    }
}

TEST_CASE("provenance captures seeds, hashes and a well-formed timestamp") {
    const fs::path p = fs::temp_directory_path() / "perp_report_input.jsonl";
    {
        std::ofstream out(p);
        out << "{}\n";
    }
    Provenance prov = make_provenance({7, 11}, {{"events", p.string()}}, {{"band_bps", 200}});
    fs::remove(p);

    CHECK(prov.seeds == std::vector<uint64_t>{7, 11});
    REQUIRE(prov.input_hashes.size() == 1);
    CHECK(prov.input_hashes[0].first == "events");
    CHECK(prov.input_hashes[0].second == sha256_hex("{}\n"));
    CHECK(!prov.code_version.empty());
    CHECK(!prov.dependency_snapshot.empty());
    REQUIRE(prov.utc_timestamp.size() == 20);
    CHECK(prov.utc_timestamp[4] == '-');
    CHECK(prov.utc_timestamp[10] == 'T');
    CHECK(prov.utc_timestamp.back() == 'Z');
    CHECK(prov.parameter_snapshot.at("band_bps").get<int>() == 200);
}

TEST_CASE("report comparison ignores only the emission timestamp") {
    Provenance a = make_provenance({1}, {}, {{"x", 1}});
    Provenance b = a;
    b.utc_timestamp = "1999-01-01T00:00:00Z";

    nlohmann::json payload = {{"metric", 0.25}};
    CHECK(reports_match(make_report(a, payload), make_report(b, payload)));
    CHECK_FALSE(reports_match(make_report(a, payload), make_report(a, {{"metric", 0.26}})));

    Provenance c = a;
    c.seeds = {2};
    CHECK_FALSE(reports_match(make_report(a, payload), make_report(c, payload)));
}

TEST_CASE("report files round-trip and malformed files are rejected") {
    const fs::path p = fs::temp_directory_path() / "perp_report_roundtrip.json";
    nlohmann::json rep = make_report(make_provenance({3}, {}, {}), {{"rows", {1, 2, 3}}});
    write_report_file(p.string(), rep);
    CHECK(read_report_file(p.string()) == rep);
    {
        std::ofstream out(p);
        out << "{not json";
    }
    try {
        read_report_file(p.string());
        FAIL("expected malformed_record");
    } catch (const Error& e) {
        CHECK(e.kind() == Error::Kind::malformed_record);
    }
    fs::remove(p);
}
