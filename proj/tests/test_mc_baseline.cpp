#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "casrisk/case_io.hpp"
#include "casrisk/mc_baseline.hpp"

using namespace casrisk;

namespace {

NetworkCase fournode() { return load_case(std::string(CASRISK_DATA_DIR) + "/cases/fournode.json"); }

AssessmentConfig fournode_cfg() {
    AssessmentConfig cfg;
    cfg.tau_d_min = 15.0;
    cfg.t_max_min = 30.0;
    cfg.delay_min = 15.0;
    cfg.n_tau = 3;
    return cfg;
}

}  // namespace

TEST_CASE("interval sampling obeys the rate extremes") {
    const NetworkCase net = fournode();
    const AssessmentConfig cfg = fournode_cfg();
    MatrixPool pool(net, 0);
    CascadeSimulator sim(net, cfg, pool);
    const SystemState s = sim.initial_state();
    std::mt19937_64 rng(1);

    const std::vector<double> none(net.num_branches(), 0.0);
    CHECK(sample_interval_outages(net, s, none, 15.0, rng).empty());

    const std::vector<double> certain(net.num_branches(), 1e9);
    CHECK(sample_interval_outages(net, s, certain, 15.0, rng) ==
          std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("interval sampling skips out-of-service branches") {
    const NetworkCase net = fournode();
    const AssessmentConfig cfg = fournode_cfg();
    MatrixPool pool(net, 0);
    CascadeSimulator sim(net, cfg, pool);
    SystemState s = sim.initial_state();
    sim.apply_initial_outages(s, {3});
    std::mt19937_64 rng(1);
    const std::vector<double> certain(net.num_branches(), 1e9);
    CHECK(sample_interval_outages(net, s, certain, 15.0, rng) ==
          std::vector<int>{1, 2, 4, 5});
}

TEST_CASE("zero outage rates reduce the estimate to the initial cost") {
    const NetworkCase net = fournode();
    AssessmentConfig cfg = fournode_cfg();
    cfg.rate_model.lambda_max_per_hr = 0.0;
    NetworkCase calm = net;
    for (auto& br : calm.branches) br.lambda0_per_hr = 0.0;
    calm.finalize();
    MatrixPool pool(calm, 0);
    CascadeSimulator sim(calm, cfg, pool);
    const McEstimate est = mc_risk(sim, {1}, 50, 9);
    // Losing branch 1 sheds nothing, so every sample costs exactly C_0 = 0.
    CHECK(est.mean == 0.0);
    CHECK(est.std_error == 0.0);
    CHECK(est.std_error_valid);
    CHECK(est.samples == 50);
}

TEST_CASE("a single sample yields no standard error") {
    const NetworkCase net = fournode();
    const AssessmentConfig cfg = fournode_cfg();
    MatrixPool pool(net, 0);
    CascadeSimulator sim(net, cfg, pool);
    const McEstimate est = mc_risk(sim, {3}, 1, 9);
    CHECK(est.samples == 1);
    CHECK_FALSE(est.std_error_valid);
}

TEST_CASE("parallel and serial estimators are identical for a fixed seed") {
    const NetworkCase net = fournode();
    const AssessmentConfig cfg = fournode_cfg();
    MatrixPool pool(net, 0);
    CascadeSimulator sim_p(net, cfg, pool);
    CascadeSimulator sim_s(net, cfg, pool);
    const McEstimate par = mc_risk(sim_p, {3}, 400, 123, true);
    const McEstimate ser = mc_risk(sim_s, {3}, 400, 123, false);
    CHECK(par.mean == ser.mean);
    CHECK(par.std_error == ser.std_error);
    CHECK(par.samples == ser.samples);
}

TEST_CASE("estimates depend on the seed but stay statistically compatible") {
    const NetworkCase net = fournode();
    const AssessmentConfig cfg = fournode_cfg();
    MatrixPool pool(net, 0);
    CascadeSimulator sim_a(net, cfg, pool);
    CascadeSimulator sim_b(net, cfg, pool);
    const McEstimate a = mc_risk(sim_a, {3}, 1500, 1);
    const McEstimate b = mc_risk(sim_b, {3}, 1500, 2);
    REQUIRE(a.std_error_valid);
    REQUIRE(b.std_error_valid);
    const double gap = std::abs(a.mean - b.mean);
    const double sigma = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(gap < 5.0 * sigma);
}
