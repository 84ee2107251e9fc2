#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "casrisk/case_io.hpp"

using namespace casrisk;
namespace fs = std::filesystem;

namespace {

const std::string kData = CASRISK_DATA_DIR;

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "casrisk_io_test";
    fs::create_directories(dir);
    return dir;
}

fs::path write_json(const std::string& name, const std::string& body) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << body;
    return p;
}

const char* kMinimalCase = R"({
  "base_mva": 100,
  "buses": [{"id": 1}, {"id": 2}],
  "branches": [{"id": 1, "from": 1, "to": 2, "x_pu": 0.1, "rating_mw": 50, "lambda0_per_hr": 0.01}],
  "generators": [{"bus": 1, "p_mw": 10, "pmin_mw": 0, "pmax_mw": 20, "ramp_mw_per_min": 1}],
  "loads": [{"bus": 2, "p_mw": 10}]
})";

}  // namespace

TEST_CASE("bundled cases load with the expected shapes") {
    const NetworkCase four = load_case(kData + "/cases/fournode.json");
    CHECK(four.num_buses() == 4);
    CHECK(four.num_branches() == 5);
    CHECK(four.generators.size() == 2);
    CHECK(four.loads.size() == 2);
    CHECK(four.total_demand_mw() == doctest::Approx(200.0));

    const NetworkCase big = load_case(kData + "/cases/rts96.json");
    CHECK(big.num_buses() == 73);
    CHECK(big.num_branches() == 120);
    CHECK(big.generators.size() == 33);
    CHECK(big.loads.size() == 51);
}

TEST_CASE("a case survives a save/load round trip unchanged") {
    const NetworkCase net = load_case(kData + "/cases/rts96.json");
    const fs::path out = scratch_dir() / "roundtrip.json";
    save_case(net, out.string());
    const NetworkCase again = load_case(out.string());
    CHECK(again.base_mva == net.base_mva);
    REQUIRE(again.buses == net.buses);
    REQUIRE(again.branches.size() == net.branches.size());
    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        CHECK(again.branches[i].id == net.branches[i].id);
        CHECK(again.branches[i].from_bus == net.branches[i].from_bus);
        CHECK(again.branches[i].to_bus == net.branches[i].to_bus);
        CHECK(again.branches[i].reactance_pu == net.branches[i].reactance_pu);
        CHECK(again.branches[i].rating_mw == net.branches[i].rating_mw);
        CHECK(again.branches[i].lambda0_per_hr == net.branches[i].lambda0_per_hr);
    }
    REQUIRE(again.generators.size() == net.generators.size());
    for (std::size_t i = 0; i < net.generators.size(); ++i) {
        CHECK(again.generators[i].bus == net.generators[i].bus);
        CHECK(again.generators[i].p_mw == net.generators[i].p_mw);
        CHECK(again.generators[i].pmax_mw == net.generators[i].pmax_mw);
        CHECK(again.generators[i].ramp_mw_per_min == net.generators[i].ramp_mw_per_min);
    }
    REQUIRE(again.loads.size() == net.loads.size());
    for (std::size_t i = 0; i < net.loads.size(); ++i) {
        CHECK(again.loads[i].bus == net.loads[i].bus);
        CHECK(again.loads[i].p_mw == net.loads[i].p_mw);
    }
    CHECK(again.load_curve.points == net.load_curve.points);
}

TEST_CASE("unknown case keys are rejected by name") {
    const auto p = write_json("unknown_key.json", R"({
      "base_mva": 100, "buses": [{"id": 1}], "branches": [], "generators": [],
      "loads": [], "frequency_hz": 60
    })");
    CHECK_THROWS_WITH_AS((void)load_case(p.string()),
                         doctest::Contains("frequency_hz"), MalformedCaseError);
}

TEST_CASE("dangling bus references name the offending record") {
    std::string body = kMinimalCase;
    body.replace(body.find("\"to\": 2"), 7, "\"to\": 9");
    const auto p = write_json("dangling.json", body);
    CHECK_THROWS_WITH_AS((void)load_case(p.string()), doctest::Contains("branch"),
                         MalformedCaseError);
}

TEST_CASE("non-numeric fields are rejected with their path") {
    std::string body = kMinimalCase;
    body.replace(body.find("\"x_pu\": 0.1"), 11, "\"x_pu\": \"thin\"");
    const auto p = write_json("typed.json", body);
    CHECK_THROWS_WITH_AS((void)load_case(p.string()), doctest::Contains("x_pu"),
                         MalformedCaseError);
}

TEST_CASE("config loads defaults, overrides, and validation") {
    const AssessmentConfig defaults = load_config(kData + "/configs/default.json");
    CHECK(defaults.t_max_min == doctest::Approx(60.0));
    CHECK(defaults.k_d() == 4);

    const AssessmentConfig rts = load_config(kData + "/configs/rts96.json");
    CHECK(rts.t_max_min == doctest::Approx(45.0));
    CHECK(rts.k_d() == 3);
    CHECK(rts.convergence.coverage_threshold == doctest::Approx(0.97));

    const auto unknown = write_json("cfg_unknown.json", R"({"tau_dd_min": 15})");
    CHECK_THROWS_WITH((void)load_config(unknown.string()), doctest::Contains("tau_dd_min"));

    const auto bad_horizon =
        write_json("cfg_horizon.json", R"({"tau_d_min": 30, "t_max_min": 15})");
    CHECK_THROWS((void)load_config(bad_horizon.string()));

    const auto bad_kappa =
        write_json("cfg_kappa.json", R"({"rate_model": {"kappa_trip": 0.9}})");
    CHECK_THROWS((void)load_config(bad_kappa.string()));
}

TEST_CASE("assessment bundle lands on disk with a monotone risk curve") {
    const NetworkCase net = load_case(kData + "/cases/fournode.json");
    const AssessmentConfig cfg = load_config(kData + "/configs/fournode.json");
    MatrixPool pool(net, cfg.matrix_cache_entries);
    CascadeSimulator sim(net, cfg, pool);
    const AssessmentResult result = run_assessment(sim, {3}, cfg.seed, cfg.attempt_budget);

    const fs::path dir = scratch_dir() / "bundle";
    fs::remove_all(dir);
    write_result_bundle(dir.string(), result, cfg, {3}, cfg.seed, 0.5);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "risk_curve.csv"));
    CHECK(fs::exists(dir / "top_paths.csv"));

    std::ifstream curve(dir / "risk_curve.csv");
    std::string line;
    REQUIRE(std::getline(curve, line));
    CHECK(line == "attempt,risk_mw,coverage");
    double prev = -1.0;
    int rows = 0;
    while (std::getline(curve, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double risk = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        CHECK(risk >= prev);
        prev = risk;
        ++rows;
    }
    CHECK(rows == result.attempts);
}
