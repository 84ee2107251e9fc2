#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "casrisk/lp.hpp"

using namespace casrisk;

TEST_CASE("unconstrained minimum sits at the lower bounds") {
    LpProblem lp;
    lp.add_variable(1.0, 0.0, 10.0);
    lp.add_variable(2.0, 1.0, 5.0);
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(0.0));
    CHECK(sol.x[1] == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(2.0));
}

TEST_CASE("classic two-variable optimum") {
    // min -x - 2y  s.t. x + y <= 4, x + 3y <= 6, bounds [0, 10].
    LpProblem lp;
    const int x = lp.add_variable(-1.0, 0.0, 10.0);
    const int y = lp.add_variable(-2.0, 0.0, 10.0);
    lp.rows.push_back({{{x, 1.0}, {y, 1.0}}, LpSense::LessEqual, 4.0});
    lp.rows.push_back({{{x, 1.0}, {y, 3.0}}, LpSense::LessEqual, 6.0});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[x] == doctest::Approx(3.0));
    CHECK(sol.x[y] == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(-5.0));
}

TEST_CASE("negative right-hand sides force movement away from zero") {
    // 0 is infeasible here; the optimum sheds the cheap pair of variables.
    LpProblem lp;
    const int a = lp.add_variable(1e-3, 0.0, 100.0);
    const int b = lp.add_variable(1.0, 0.0, 100.0);
    lp.rows.push_back({{{a, -0.25}, {b, -0.5}}, LpSense::LessEqual, -10.0});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[a] == doctest::Approx(40.0));
    CHECK(sol.x[b] == doctest::Approx(0.0));
}

TEST_CASE("equality rows are honored") {
    LpProblem lp;
    const int a = lp.add_variable(1.0, 0.0, 10.0);
    const int b = lp.add_variable(3.0, 0.0, 10.0);
    lp.rows.push_back({{{a, 1.0}, {b, 1.0}}, LpSense::Equal, 7.0});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[a] == doctest::Approx(7.0));
    CHECK(sol.x[b] == doctest::Approx(0.0));
}

TEST_CASE("greater-equal rows are normalized correctly") {
    LpProblem lp;
    const int a = lp.add_variable(1.0, 0.0, 10.0);
    lp.rows.push_back({{{a, 1.0}}, LpSense::GreaterEqual, 4.0});
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[a] == doctest::Approx(4.0));
}

TEST_CASE("infeasible bounds are reported") {
    LpProblem lp;
    const int a = lp.add_variable(1.0, 0.0, 1.0);
    lp.rows.push_back({{{a, 1.0}}, LpSense::GreaterEqual, 5.0});
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("upper bounds participate in the optimum") {
    // min -x s.t. x <= 3 via bound only.
    LpProblem lp;
    const int x = lp.add_variable(-1.0, 0.0, 3.0);
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[x] == doctest::Approx(3.0));
}

TEST_CASE("degenerate redundant rows do not cycle") {
    LpProblem lp;
    const int x = lp.add_variable(-1.0, 0.0, 5.0);
    const int y = lp.add_variable(-1.0, 0.0, 5.0);
    for (int r = 0; r < 6; ++r) {
        lp.rows.push_back({{{x, 1.0}, {y, 1.0}}, LpSense::LessEqual, 6.0});
    }
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[x] + sol.x[y] == doctest::Approx(6.0));
}
