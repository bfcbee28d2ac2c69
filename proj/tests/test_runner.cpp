#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qbsde/runner.hpp"

using namespace qbsde;
namespace fs = std::filesystem;

namespace {

nlohmann::json solve_config() {
    return {
        {"kind", "solve"},
        {"seed", 2024},
        {"grid", {{"T", 1.0}, {"N", 16}}},
        {"ensemble", {{"M", 1024}}},
        {"generator",
         {{"label", "(2.4b)"},
          {"overrides",
           {{"theta1", 1.0}, {"theta2", 1.0}, {"vartheta1", 0.01}, {"vartheta2", 0.01}}}}},
        {"terminal", {{"type", "bounded_sin"}, {"scale", 0.3}, {"wavenumber", 0.3}}},
    };
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
    fs::path path;
    TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("solve experiment produces manifest, result, and time series") {
    TempDir dir("qbsde_run1");
    const auto manifest = run_experiment(solve_config(), dir.path, true);
    CHECK(manifest.at("experiment") == "solve");
    CHECK(fs::exists(dir.path / "result.json"));
    CHECK(fs::exists(dir.path / "timeseries.csv"));
    CHECK(fs::exists(dir.path / "manifest.json"));

    const auto result = nlohmann::json::parse(slurp(dir.path / "result.json"));
    CHECK(result.at("converged").get<bool>());
    CHECK(result.at("distance_log").size() >= 1);

    const std::string csv = slurp(dir.path / "timeseries.csv");
    CHECK(csv.rfind("t,mean_Y1,sup_absY1,mean_Y2,sup_absY2", 0) == 0);
}

TEST_CASE("windowed solve pastes and records per-window summaries") {
    TempDir dir("qbsde_win");
    auto cfg = solve_config();
    cfg["solver"] = {{"window", 0.25}};
    run_experiment(cfg, dir.path, true);
    const auto result = nlohmann::json::parse(slurp(dir.path / "result.json"));
    CHECK(result.at("windows").size() == 4);
    for (const auto& w : result.at("windows")) CHECK(w.at("converged").get<bool>());
}

TEST_CASE("identical configs reproduce byte-identical payloads") {
    TempDir d1("qbsde_rep1");
    TempDir d2("qbsde_rep2");
    run_experiment(solve_config(), d1.path, true);
    run_experiment(solve_config(), d2.path, true);
    CHECK(slurp(d1.path / "result.json") == slurp(d2.path / "result.json"));
    CHECK(slurp(d1.path / "timeseries.csv") == slurp(d2.path / "timeseries.csv"));
    CHECK(config_hash(solve_config()) == config_hash(solve_config()));
}

TEST_CASE("missing seed and unknown keys are config errors") {
    TempDir dir("qbsde_bad");
    auto cfg = solve_config();
    cfg.erase("seed");
    CHECK_THROWS_AS(run_experiment(cfg, dir.path, true), ConfigError);

    cfg = solve_config();
    cfg["surprise"] = 1;
    CHECK_THROWS_AS(run_experiment(cfg, dir.path, true), ConfigError);

    cfg = solve_config();
    cfg["solver"] = {{"unknown_option", 1}};
    CHECK_THROWS_AS(run_experiment(cfg, dir.path, true), ConfigError);
}

TEST_CASE("constants experiment rejects the excluded p = 1 regime") {
    TempDir dir("qbsde_c");
    nlohmann::json cfg = {{"kind", "constants"},
                          {"seed", 1},
                          {"which", "local"},
                          {"params", {{"n", 2}, {"p", 1.0}, {"lambda", 0.5}}}};
    CHECK_THROWS_AS(run_experiment(cfg, dir.path, true), ConfigError);

    cfg["params"] = {{"n", 2}, {"p", 2.0}, {"lambda", 0.5}};
    const auto manifest = run_experiment(cfg, dir.path, true);
    CHECK(manifest.at("summary").contains("K"));
}

TEST_CASE("classify, transform, and norms experiments run end to end") {
    TempDir dir("qbsde_misc");
    nlohmann::json classify = {{"kind", "classify"},
                               {"seed", 3},
                               {"generator", {{"label", "burgers"}}},
                               {"sample_plan", {{"count", 256}}}};
    run_experiment(classify, dir.path, true);
    auto result = nlohmann::json::parse(slurp(dir.path / "result.json"));
    CHECK(result.contains("C1b"));

    nlohmann::json transform = {{"kind", "transform"},
                                {"seed", 4},
                                {"which", "2.12d"},
                                {"theta1", 0.0},
                                {"vartheta1", 0.0},
                                {"theta2", 0.5},
                                {"vartheta2", 1.0}};
    run_experiment(transform, dir.path, true);
    result = nlohmann::json::parse(slurp(dir.path / "result.json"));
    CHECK(result.at("nonsolvable").get<bool>());

    nlohmann::json norms = {{"kind", "norms"},
                            {"seed", 5},
                            {"grid", {{"T", 1.0}, {"N", 8}}},
                            {"ensemble", {{"M", 512}}},
                            {"process", {{"type", "constant"}, {"c", 2.0}}}};
    run_experiment(norms, dir.path, true);
    result = nlohmann::json::parse(slurp(dir.path / "result.json"));
    CHECK(result.at("bmo") == 2.0);
    CHECK(result.at("linf") == 2.0);
}

TEST_CASE("gallery table is alphabetized and carries the expected labels") {
    const auto table = gallery_table();
    std::vector<std::string> labels;
    for (const auto& row : table) labels.push_back(row.at("label").get<std::string>());
    CHECK(std::is_sorted(labels.begin(), labels.end()));
    const auto has = [&](const char* l) {
        return std::find(labels.begin(), labels.end(), l) != labels.end();
    };
    CHECK(has("(2.4b)"));
    CHECK(has("burgers"));
    CHECK(has("frei-dosreis"));
}

TEST_CASE("csv fields use full precision and RFC 4180 quoting") {
    CHECK(csv_field(0.1) == "0.10000000000000001");
    CHECK(csv_field(1.0) == "1");
    CHECK(csv_field(std::string("plain")) == "plain");
    CHECK(csv_field(std::string("a,b")) == "\"a,b\"");
    CHECK(csv_field(std::string("say \"hi\"")) == "\"say \"\"hi\"\"\"");
}

TEST_CASE("cli entry returns the documented exit codes") {
    TempDir dir("qbsde_cli");
    const fs::path cfg = dir.path / "config.json";
    std::ofstream(cfg) << solve_config().dump();
    CHECK(run_cli(cfg.string(), (dir.path / "out").string(), std::nullopt, true) == 0);
    CHECK(run_cli((dir.path / "missing.json").string(), std::nullopt, std::nullopt, true) == 2);

    const fs::path bad = dir.path / "bad.json";
    std::ofstream(bad) << "{\"kind\": \"solve\"}";
    CHECK(run_cli(bad.string(), (dir.path / "out2").string(), std::nullopt, true) == 2);

    // seed override changes the numbers but not the validity
    CHECK(run_cli(cfg.string(), (dir.path / "out3").string(), 999, true) == 0);
    const auto a = slurp(dir.path / "out" / "result.json");
    const auto b = slurp(dir.path / "out3" / "result.json");
    CHECK(a != b);
}
