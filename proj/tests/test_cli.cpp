// End-to-end checks of the command-line tool, driving the real binary.
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

#ifndef SWARMTRACK_CLI_PATH
#define SWARMTRACK_CLI_PATH "swarmtrack"
#endif
#ifndef SWARMTRACK_FIXTURE_DIR
#define SWARMTRACK_FIXTURE_DIR "tests/fixtures"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SWARMTRACK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Strip the timing block, which legitimately varies between reruns.
std::string without_timing(std::string text) {
    const auto pos = text.find("\"timing\"");
    if (pos == std::string::npos) {
        return text;
    }
    const auto end = text.find('}', pos);
    text.erase(pos, end - pos + 1);
    return text;
}

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

void write_small_config(const fs::path& path) {
    std::ofstream out(path);
    out << R"({"horizon": 50, "seed": 11})";
}

}  // namespace

TEST_CASE("simulate: writes outputs, deterministic summary, sane exit codes") {
    const fs::path cfg = temp_dir("swt_cli_cfg");
    fs::create_directories(cfg);
    write_small_config(cfg / "small.json");

    const fs::path out1 = temp_dir("swt_cli_a");
    const fs::path out2 = temp_dir("swt_cli_b");
    const std::string base = "simulate --config " + (cfg / "small.json").string() +
                             " --algo EDC-CIF --runs 2 --out ";
    REQUIRE(run_cli(base + out1.string()) == 0);
    REQUIRE(run_cli(base + out2.string()) == 0);

    const std::string summary = slurp(out1 / "summary.json");
    CHECK(summary.find("trigger_rate_pct") != std::string::npos);
    CHECK(summary.find("config_hash") != std::string::npos);
    CHECK(without_timing(summary) == without_timing(slurp(out2 / "summary.json")));
    CHECK(fs::exists(out1 / "run_0.csv"));
    CHECK(fs::exists(out1 / "run_1.csv"));
    CHECK(fs::exists(out1 / "metrics.csv"));
    CHECK(fs::exists(out1 / "raster.csv"));

    CHECK(run_cli("simulate --config /does/not/exist.json") == 2);
    CHECK(run_cli("simulate --algo NOT-A-FILTER") == 2);
    CHECK(run_cli("definitely-not-a-subcommand") == 2);
}

TEST_CASE("metrics: recomputes the summary from stored run CSVs") {
    const fs::path cfg = temp_dir("swt_cli_cfg2");
    fs::create_directories(cfg);
    write_small_config(cfg / "small.json");
    const fs::path out = temp_dir("swt_cli_m");
    REQUIRE(run_cli("simulate --config " + (cfg / "small.json").string() + " --runs 2 --out " +
                    out.string()) == 0);
    const fs::path recomputed = out / "recomputed.json";
    REQUIRE(run_cli("metrics --in " + out.string() + " --out " + recomputed.string()) == 0);
    const std::string a = slurp(out / "summary.json");
    const std::string b = slurp(recomputed);
    // The recomputed file carries the same RMSE numbers.
    const auto key = a.find("\"mean_rmse_pos\"");
    REQUIRE(key != std::string::npos);
    const std::string line = a.substr(key, a.find('\n', key) - key);
    CHECK(b.find(line) != std::string::npos);

    CHECK(run_cli("metrics --in /does/not/exist") == 2);
}

TEST_CASE("compare: rows per variant and sweep column semantics") {
    const fs::path cfg = temp_dir("swt_cli_cfg3");
    fs::create_directories(cfg);
    write_small_config(cfg / "small.json");
    const fs::path out = temp_dir("swt_cli_cmp");
    REQUIRE(run_cli("compare --config " + (cfg / "small.json").string() +
                    " --variants EC-CKF,EDC-CIF --runs 2 --out " + out.string()) == 0);
    const std::string table = slurp(out / "compare.csv");
    CHECK(table.find("EC-CKF") != std::string::npos);
    CHECK(table.find("EDC-CIF") != std::string::npos);
    CHECK(fs::exists(out / "rmse_EC-CKF.csv"));

    // Sweep: trigger rate decreases from delta 0 to a large threshold.
    const fs::path sweep = temp_dir("swt_cli_sweep");
    REQUIRE(run_cli("compare --config " + (cfg / "small.json").string() +
                    " --variants EDC-CIF --runs 2 --sweep-delta 0,0.5 --out " + sweep.string()) ==
            0);
    std::ifstream in(sweep / "compare.csv");
    std::string header;
    std::getline(in, header);
    double tr0 = -1.0;
    double tr1 = -1.0;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        REQUIRE(fields.size() >= 15);
        const double delta = std::stod(fields[2]);
        const double tr = std::stod(fields[14]);
        (delta == 0.0 ? tr0 : tr1) = tr;
    }
    CHECK(tr0 == 100.0);
    CHECK(tr1 < tr0);

    CHECK(run_cli("compare --variants \"\" --runs 2") == 2);
}

TEST_CASE("ingest-tum + replay: bundle round trip through the filter") {
    const std::string fx = SWARMTRACK_FIXTURE_DIR;
    const fs::path bundle = temp_dir("swt_cli_bundle");
    REQUIRE(run_cli("ingest-tum --target " + fx + "/target_circle.tum --observer " + fx +
                    "/observer_a.tum --observer " + fx + "/observer_b_dirty.tum --observer " + fx +
                    "/observer_c_gap.tum --rate 10 --out " + bundle.string()) == 0);
    CHECK(fs::exists(bundle / "replay.json"));
    CHECK(fs::exists(bundle / "sensor_2.csv"));
    CHECK(fs::exists(bundle / "aligned_target.tum"));

    const fs::path out = temp_dir("swt_cli_replay");
    REQUIRE(run_cli("simulate --replay " + bundle.string() + " --out " + out.string()) == 0);
    const std::string summary = slurp(out / "summary.json");
    CHECK(summary.find("mean_rmse_pos") != std::string::npos);
    CHECK(summary.find("nan") == std::string::npos);
    CHECK(summary.find("inf") == std::string::npos);

    CHECK(run_cli("ingest-tum --target /nope.tum --observer /also/nope.tum") == 2);
}
