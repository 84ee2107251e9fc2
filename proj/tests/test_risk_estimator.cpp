#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "casrisk/case_io.hpp"
#include "casrisk/risk_estimator.hpp"

using namespace casrisk;

namespace {

struct Fixture {
    NetworkCase net;
    AssessmentConfig cfg;
    MatrixPool pool;
    CascadeSimulator sim;

    Fixture()
        : net(load_case(std::string(CASRISK_DATA_DIR) + "/cases/fournode.json")),
          cfg(make_cfg()),
          pool(net, 0),
          sim(net, cfg, pool) {}

    static AssessmentConfig make_cfg() {
        AssessmentConfig c;
        c.tau_d_min = 15.0;
        c.t_max_min = 30.0;
        return c;
    }
};

}  // namespace

TEST_CASE("selection probabilities: uniform limits and normalization") {
    const std::vector<double> idx = {1.0, 2.0, 3.0, 0.0};

    const auto uniform = search_probabilities(idx, 0.0);
    for (double p : uniform) CHECK(p == doctest::Approx(0.25));

    const auto zero = search_probabilities({0.0, 0.0, 0.0}, 5.0);
    for (double p : zero) CHECK(p == doctest::Approx(1.0 / 3.0));

    const auto tempered = search_probabilities(idx, 1.0);
    CHECK(std::accumulate(tempered.begin(), tempered.end(), 0.0) == doctest::Approx(1.0));
    CHECK(tempered[0] == doctest::Approx(1.0 / 6.0));
    CHECK(tempered[2] == doctest::Approx(0.5));
    CHECK(tempered[3] == 0.0);
}

TEST_CASE("selection probabilities survive extreme trust factors") {
    const std::vector<double> idx = {1e-300, 5e-300, 1e-250};
    const auto p = search_probabilities(idx, 1000.0);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
    CHECK(p[2] == doctest::Approx(1.0));  // greedy limit concentrates on the max
    for (double v : p) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
}

TEST_CASE("selection probabilities reject invalid inputs") {
    CHECK_THROWS_AS((void)search_probabilities({1.0, -0.5}, 1.0), ContractViolation);
    CHECK_THROWS_AS((void)search_probabilities({1.0}, -1.0), ContractViolation);
    CHECK(search_probabilities({}, 1.0).empty());
}

TEST_CASE("no-outage index follows the discounted sibling sum") {
    CHECK(no_outage_secondary_risk({1.0, 3.0}, 0.5, 2, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(no_outage_secondary_risk({1.0, 3.0}, 0.5, 2, 0.8, 1.0) == doctest::Approx(0.8));
    CHECK(no_outage_secondary_risk({}, 0.5, 2, 1.0, 1.0) == 0.0);
    CHECK(no_outage_secondary_risk({1.0}, 0.5, 0, 1.0, 1.0) == 0.0);
}

TEST_CASE("combined index weights the three components") {
    CHECK(combine_index(1.0, 2.0, 3.0, 1.0, 1.0, 1.0) == doctest::Approx(6.0));
    CHECK(combine_index(1.0, 2.0, 3.0, 2.0, 0.5, 0.0) == doctest::Approx(3.0));
}

TEST_CASE("candidate set lists branches ascending with the quiet event last") {
    Fixture f;
    SystemState s = f.sim.initial_state();
    f.sim.apply_initial_outages(s, {3});
    const CandidateSet cs = compute_candidate_indices(f.sim, s, 1.0);
    REQUIRE(cs.labels.size() == 5);  // four in-service branches + no-outage
    CHECK(cs.labels == std::vector<int>{1, 2, 4, 5, 0});
    double sum = 0.0;
    for (double p : cs.pr_cond) {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overloaded corridor dominates the candidate indices") {
    Fixture f;
    SystemState s = f.sim.initial_state();
    f.sim.apply_initial_outages(s, {3});  // branch 2 now carries 110/100
    const CandidateSet cs = compute_candidate_indices(f.sim, s, 1.0);
    double best = 0.0;
    int best_label = -1;
    for (std::size_t i = 0; i < cs.labels.size(); ++i) {
        if (cs.index[i].rho > best) {
            best = cs.index[i].rho;
            best_label = cs.labels[i];
        }
    }
    CHECK(best_label == 2);
    CHECK(best > 0.0);
}

TEST_CASE("separation risk applies only to cut branches") {
    Fixture f;
    SystemState s = f.sim.initial_state();
    f.sim.apply_initial_outages(s, {1, 3});  // leaves 1-3, 2-4, 3-4: a tree
    const auto gm = f.sim.matrices_for(s);
    for (int pos : {1, 3, 4}) {
        const auto [sigma, rho] = separation_risk(f.net, *gm, s.flow_mw, pos, 0.5,
                                                  f.cfg.epsilon_cut);
        CHECK(sigma == doctest::Approx(2.0 * std::abs(s.flow_mw[pos])));
        CHECK(rho == doctest::Approx(0.5 * sigma));
        const auto [sb, rb] = overload_risk(f.net, *gm, s.flow_mw, pos, 0.5, f.cfg.epsilon_cut);
        CHECK(sb == 0.0);
        CHECK(secondary_risk(f.net, *gm, s.flow_mw, pos, 0.5, f.cfg.tau_d_min, f.cfg.rate_model,
                             s.total_served_mw(f.net), f.cfg.epsilon_cut) == 0.0);
    }
}

TEST_CASE("parallel kernel and serial reference agree bit for bit") {
    Fixture f;
    SystemState s = f.sim.initial_state();
    f.sim.apply_initial_outages(s, {3});
    for (int label : {0, 1}) {
        const CandidateSet par = compute_candidate_indices(f.sim, s, 0.7, true);
        const CandidateSet ser = compute_candidate_indices_serial(f.sim, s, 0.7);
        REQUIRE(par.labels == ser.labels);
        for (std::size_t i = 0; i < par.index.size(); ++i) {
            CHECK(par.index[i].rho == ser.index[i].rho);
            CHECK(par.index[i].rho_alpha == ser.index[i].rho_alpha);
            CHECK(par.index[i].rho_beta == ser.index[i].rho_beta);
            CHECK(par.index[i].rho_gamma == ser.index[i].rho_gamma);
            CHECK(par.pr_cond[i] == ser.pr_cond[i]);
        }
        s = f.sim.simulate_transition(s, label).state;
    }
}
