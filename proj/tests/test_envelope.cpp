#include <gtest/gtest.h>

#include <cmath>

#include "mshenv/envelope.hpp"

using namespace mshenv;

namespace {

double log_abs(const std::array<double, 4>& x) { return 0.5 * std::log(x[0] * x[0] + x[1] * x[1]); }

}  // namespace

TEST(Shells, DyadicInH) {
    auto s = dyadic_shells(0.01);
    ASSERT_EQ(s.size(), 6u);  // the next lower edge, 1/128, is below 0.01
    EXPECT_EQ(s.front().h_hi, 1.0);
    EXPECT_EQ(s.back().h_lo, 1.0 / 64.0);
    EXPECT_TRUE(in_shell(s[0], 0.5));
    EXPECT_FALSE(in_shell(s[0], 1.0));
}

TEST(Obstacle, ShapeAndErrors) {
    auto dom = make_domain(1, 1.0, 64);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField half(dom, 0.5);
    auto prob = make_obstacle(w, half, 2.0, 1);
    for (auto i : dom->interior_nodes()) {
        if (prob.fixed[i]) {
            EXPECT_TRUE(w.psi.masked(i));
            continue;
        }
        EXPECT_NEAR(prob.obstacle[i], std::min(0.0, 0.5 * w.psi[i] + 2.0), 1e-14);
    }
    EXPECT_THROW(make_obstacle(w, half, -1.0, 1), DomainError);
    EXPECT_THROW(make_obstacle(w, ScalarField(dom, 1.5), 1.0, 1), DomainError);
}

TEST(Envelope, ZeroThetaGivesZero) {
    auto dom = make_domain(1, 1.0, 64);
    auto w = build_weight({1, 1}, 1, dom);
    auto sol = solve_envelope(make_obstacle(w, ScalarField(dom, 0.0), 1.0, 1));
    for (auto i : dom->interior_nodes()) EXPECT_NEAR(sol.u[i], 0.0, 1e-12);
}

TEST(Envelope, GreenFunctionOracle) {
    auto dom = make_domain(1, 1.0, 192);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField half(dom, 0.5);
    auto st = solve_envelope_stabilized(w, half, 1, {1.0, 2.0, 4.0}, 1e-3);
    EXPECT_TRUE(st.report.stabilized);
    EXPECT_TRUE(st.report.monotone_in_C);
    double err = 0.0;
    for (auto i : dom->interior_nodes()) {
        if (w.h[i] < 4.0 * w.h_floor) continue;
        err = std::max(err, std::abs(st.limit.u[i] - log_abs(dom->point(i))));
        EXPECT_LE(st.limit.u[i], st.limit.diag.tol);  // u <= 0
    }
    EXPECT_LT(err, 0.05);
}

TEST(Envelope, PlainGaussSeidelIsMonotone) {
    auto dom = make_domain(1, 1.0, 48);
    auto w = build_weight({1, 1}, 1, dom);
    SolverOptions opt;
    opt.omega = 1.0;
    auto sol = solve_envelope(make_obstacle(w, ScalarField(dom, 1.0), 1.0, 1, opt));
    EXPECT_TRUE(sol.diag.monotone);
    EXPECT_LE(sol.diag.residual, sol.diag.tol);
    EXPECT_LE(sol.diag.obstacle_violation, 1e-12);
}

TEST(Envelope, AutoRelaxationOnlyForLinearUpdate) {
    auto d1 = make_domain(1, 1.0, 64);
    EXPECT_GT(auto_omega(*d1, 1), 1.0);
    EXPECT_LT(auto_omega(*d1, 1), 2.0);
    auto d2 = make_domain(2, 1.0, 12);
    EXPECT_EQ(auto_omega(*d2, 2), 1.0);
}

TEST(Envelope, PlurisubharmonicCaseStaysBelowObstacle) {
    auto dom = make_domain(2, 1.0, 16);
    auto w = build_weight({2, 2}, 2, dom);
    auto prob = make_obstacle(w, ScalarField(dom, 1.0), 1.0, 2);
    auto sol = solve_envelope(prob);
    EXPECT_LE(sol.diag.residual, sol.diag.tol);
    EXPECT_TRUE(sol.diag.monotone);
    EXPECT_LE(sol.diag.obstacle_violation, 1e-12);
    EXPECT_GE(sol.diag.admissibility_slack, -sol.diag.tol);
}

TEST(Envelope, StabilizationNeedsThreeIncreasingShifts) {
    auto dom = make_domain(1, 1.0, 32);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField one(dom, 1.0);
    EXPECT_THROW(solve_envelope_stabilized(w, one, 1, {1.0, 2.0}, 1e-3), DomainError);
    EXPECT_THROW(solve_envelope_stabilized(w, one, 1, {1.0, 4.0, 2.0}, 1e-3), DomainError);
}
