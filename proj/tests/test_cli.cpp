// End-to-end checks of the qlat binary. The test runner sets QLAT_CLI to the
// built executable path; every case shells out and inspects files and exit
// codes.

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string cli_path() {
    const char* env = std::getenv("QLAT_CLI");
    REQUIRE_MESSAGE(env != nullptr, "QLAT_CLI must point at the built binary");
    return env;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qlat_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kValidNetwork = R"({
  "nodes": [
    {"id": 0, "kind": "qubit", "ground_cap_fF": 100.0, "ej_ghz": 13.0},
    {"id": 1, "kind": "coupler", "ground_cap_fF": 56.0, "ej_ghz": 30.0},
    {"id": 2, "kind": "qubit", "ground_cap_fF": 106.0, "ej_ghz": 14.2}
  ],
  "mutual_fF": [[0, 1, 4.0], [1, 2, 3.7], [0, 2, 2.0]]
})";

// Coupler leg to node 2 is starved, so the nominal edge (1,2) drops out while
// the direct (0,2) parasitic stays: LTD = (1 + 1) / 2 = 1.0.
const char* kDistortedNetwork = R"({
  "nodes": [
    {"id": 0, "kind": "qubit", "ground_cap_fF": 100.0, "ej_ghz": 13.0},
    {"id": 1, "kind": "coupler", "ground_cap_fF": 56.0, "ej_ghz": 30.0},
    {"id": 2, "kind": "qubit", "ground_cap_fF": 106.0, "ej_ghz": 14.2}
  ],
  "mutual_fF": [[0, 1, 5.0], [1, 2, 0.001], [0, 2, 1.0]]
})";

const char* kNominalQcq = R"({"node_count": 3, "edges": [[0, 1], [1, 2]]})";

} // namespace

TEST_CASE("version banner names the synthetic-model calibration") {
    TempDir dir;
    const std::string out = dir.file("v.txt").string();
    REQUIRE(std::system((cli_path() + " --version > " + out).c_str()) == 0);
    const std::string text = read_file(out);
    CHECK(text.find("qlat") != std::string::npos);
    CHECK(text.find("qcq-cal-1") != std::string::npos);
}

TEST_CASE("ham writes a mode/coupling dump for a valid network") {
    TempDir dir;
    write_file(dir.file("net.json"), kValidNetwork);
    const auto out = dir.file("ham.json");
    CHECK(run("ham " + dir.file("net.json").string() + " -o " + out.string()) == 0);
    const json j = json::parse(read_file(out));
    CHECK(j["modes"].size() == 3);
    CHECK(j["coupling_ghz"].size() == 3);
}

TEST_CASE("ham rejects a negative capacitance with exit 2") {
    TempDir dir;
    write_file(dir.file("bad.json"), R"({
      "nodes": [
        {"id": 0, "kind": "qubit", "ground_cap_fF": 100.0, "ej_ghz": 13.0},
        {"id": 1, "kind": "qubit", "ground_cap_fF": 90.0, "ej_ghz": 13.0}
      ],
      "mutual_fF": [[0, 1, -2.0]]
    })");
    CHECK(run("ham " + dir.file("bad.json").string()) == 2);
}

TEST_CASE("ham rejects a junction-less qubit node with exit 2") {
    TempDir dir;
    write_file(dir.file("bad.json"), R"({
      "nodes": [
        {"id": 0, "kind": "qubit", "ground_cap_fF": 100.0},
        {"id": 1, "kind": "qubit", "ground_cap_fF": 90.0, "ej_ghz": 13.0}
      ],
      "mutual_fF": []
    })");
    CHECK(run("ham " + dir.file("bad.json").string()) == 2);
}

TEST_CASE("ltd reports zero distortion for the intended module") {
    TempDir dir;
    write_file(dir.file("net.json"), kValidNetwork);
    write_file(dir.file("nom.json"), kNominalQcq);
    const auto out = dir.file("ltd.json");
    CHECK(run("ltd " + dir.file("net.json").string() + " " + dir.file("nom.json").string() +
              " -o " + out.string()) == 0);
    const json j = json::parse(read_file(out));
    // The deliberate 2 fF qubit-qubit parasitic keeps one extra edge.
    CHECK(j["ltd"].get<double>() == 0.5);
    CHECK(j["parasitic_edges"].size() == 1);
}

TEST_CASE("ltd flags a distorted module at 1.0") {
    TempDir dir;
    write_file(dir.file("net.json"), kDistortedNetwork);
    write_file(dir.file("nom.json"), kNominalQcq);
    const auto out = dir.file("ltd.json");
    CHECK(run("ltd " + dir.file("net.json").string() + " " + dir.file("nom.json").string() +
              " -o " + out.string()) == 0);
    const json j = json::parse(read_file(out));
    CHECK(j["ltd"].get<double>() == 1.0);
    CHECK(j["missing_edges"].size() == 1);
    CHECK(j["parasitic_edges"].size() == 1);
}

TEST_CASE("ltd rejects an out-of-range threshold with exit 2") {
    TempDir dir;
    write_file(dir.file("net.json"), kValidNetwork);
    write_file(dir.file("nom.json"), kNominalQcq);
    CHECK(run("ltd " + dir.file("net.json").string() + " " + dir.file("nom.json").string() +
              " --tau-min 1.5") == 2);
}

TEST_CASE("si emits per-node vectors and respects the channel flag") {
    TempDir dir;
    write_file(dir.file("net.json"), kValidNetwork);
    write_file(dir.file("nom.json"), kNominalQcq);
    const auto out = dir.file("si.json");
    CHECK(run("si " + dir.file("net.json").string() + " " + dir.file("nom.json").string() +
              " --delta 0.001 --channel ground_capacitance -o " + out.string()) == 0);
    const json j = json::parse(read_file(out));
    CHECK(j["si"].size() == 3);
    CHECK(j["si_max"].size() == 3);
    CHECK(run("si " + dir.file("net.json").string() + " " + dir.file("nom.json").string() +
              " --channel bogus") == 2);
    CHECK(run("si " + dir.file("net.json").string() + " " + dir.file("nom.json").string() +
              " --delta 0.5") == 2);
}

TEST_CASE("dynamics scores identical layouts at zero") {
    TempDir dir;
    write_file(dir.file("net.json"), kValidNetwork);
    write_file(dir.file("pulse.json"), R"({
      "family": "cr_square", "regime": "short", "duration_ns": 25.0,
      "amplitude_ghz": 0.04, "drive_node": 0, "target_node": 2
    })");
    const auto out = dir.file("fid.json");
    CHECK(run("dynamics " + dir.file("net.json").string() + " " + dir.file("net.json").string() +
              " " + dir.file("pulse.json").string() + " -o " + out.string()) == 0);
    const json j = json::parse(read_file(out));
    CHECK(j["relative_infidelity"].get<double>() == 0.0);
    CHECK(j["norm_error"].get<double>() <= 1e-6);
}

TEST_CASE("advise labels a single edge with a null alignment") {
    TempDir dir;
    write_file(dir.file("chain.json"), R"({
      "edges": [
        {"id": "Q0-Q1", "variants": [
          {"coupler_width_nm": 525.0},
          {"coupler_width_nm": 500.0}
        ]}
      ]
    })");
    const auto out = dir.file("advise.json");
    CHECK(run("advise " + dir.file("chain.json").string() + " -o " + out.string()) == 0);
    const json j = json::parse(read_file(out));
    REQUIRE(j.size() == 1);
    CHECK(j[0]["aligned"].is_null());
    CHECK(j[0].contains("decision"));
}

TEST_CASE("advise rejects an empty chain with exit 2") {
    TempDir dir;
    write_file(dir.file("chain.json"), R"({"edges": []})");
    CHECK(run("advise " + dir.file("chain.json").string()) == 2);
}

TEST_CASE("sweep emits csv and json; jobs do not change the bytes") {
    TempDir dir;
    const std::string base = "sweep --axis A --steps 3 --regime short";
    const auto csv1 = dir.file("s1.csv");
    const auto csv2 = dir.file("s2.csv");
    const auto json1 = dir.file("s1.json");
    const auto json2 = dir.file("s2.json");
    CHECK(run(base + " --jobs 1 --out-csv " + csv1.string() + " -o " + json1.string()) == 0);
    CHECK(run(base + " --jobs 8 --out-csv " + csv2.string() + " -o " + json2.string()) == 0);
    CHECK(read_file(csv1) == read_file(csv2));
    CHECK(read_file(json1) == read_file(json2));
    const json j = json::parse(read_file(json1));
    CHECK(j["records"].size() == 3);
    CHECK(j["calibration"] == "qcq-cal-1");
    REQUIRE(j["si_buckets"].size() == 1);
    CHECK(j["si_buckets"][0]["regime"] == "short");
}

TEST_CASE("unknown flags and missing files exit with 2") {
    TempDir dir;
    CHECK(run("ham " + dir.file("absent.json").string()) == 2);
    CHECK(run("frobnicate") == 2);
}

TEST_CASE("numerical trouble exits with 3 and capacity overflow with 4") {
    TempDir dir;
    // Floating network: no path to ground anywhere, singular Maxwell matrix.
    write_file(dir.file("floating.json"), R"({
      "nodes": [
        {"id": 0, "kind": "qubit", "ground_cap_fF": 0.0, "ej_ghz": 13.0},
        {"id": 1, "kind": "qubit", "ground_cap_fF": 0.0, "ej_ghz": 13.0}
      ],
      "mutual_fF": [[0, 1, 5.0]]
    })");
    CHECK(run("ham " + dir.file("floating.json").string()) == 3);

    write_file(dir.file("net.json"), kValidNetwork);
    write_file(dir.file("pulse.json"), R"({
      "family": "cr_square", "regime": "short", "duration_ns": 25.0,
      "amplitude_ghz": 0.04, "drive_node": 0, "target_node": 2
    })");
    CHECK(run("dynamics " + dir.file("net.json").string() + " " +
              dir.file("net.json").string() + " " + dir.file("pulse.json").string() +
              " --truncation 17") == 4);   // 17^3 = 4913 > 4096
}

TEST_CASE("si reports zero for a galvanically isolated node") {
    TempDir dir;
    write_file(dir.file("net.json"), R"({
      "nodes": [
        {"id": 0, "kind": "qubit", "ground_cap_fF": 100.0, "ej_ghz": 13.0},
        {"id": 1, "kind": "coupler", "ground_cap_fF": 56.0, "ej_ghz": 30.0},
        {"id": 2, "kind": "qubit", "ground_cap_fF": 106.0, "ej_ghz": 14.2},
        {"id": 3, "kind": "qubit", "ground_cap_fF": 95.0, "ej_ghz": 13.5}
      ],
      "mutual_fF": [[0, 1, 4.0], [1, 2, 3.7], [0, 2, 2.0]]
    })");
    write_file(dir.file("nom.json"), R"({"node_count": 4, "edges": [[0, 1], [1, 2]]})");
    const auto out = dir.file("si.json");
    CHECK(run("si " + dir.file("net.json").string() + " " + dir.file("nom.json").string() +
              " -o " + out.string()) == 0);
    const json j = json::parse(read_file(out));
    REQUIRE(j["si"].size() == 4);
    CHECK(j["si"][3].get<double>() == 0.0);
    CHECK(j["si"][1].get<double>() > 0.0);
}
