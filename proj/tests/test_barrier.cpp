#include <gtest/gtest.h>

#include <cmath>

#include "mshenv/barrier.hpp"
#include "mshenv/theta.hpp"

using namespace mshenv;

namespace {

double support_radius(const ScalarField& f) {
    const Domain& dom = f.domain();
    double r = 0.0;
    for (auto i : dom.interior_nodes())
        if (f[i] > 0.0) {
            const auto x = dom.point(i);
            r = std::max(r, std::hypot(x[0], x[1]));
        }
    return r;
}

}  // namespace

TEST(Ladder, LengthAndExponents) {
    EXPECT_EQ(ladder_length(-0.5, 0.25), 3);
    EXPECT_EQ(ladder_length(0.0, 0.45), 1);
    EXPECT_EQ(ladder_length(-1.0, 0.3), 4);
    auto s = make_barrier_spec(-0.5, 0.25, 0.45, 1.0);
    ASSERT_EQ(s.q.size(), 3u);
    EXPECT_NEAR(s.q[0], -0.25, 1e-15);
    EXPECT_EQ(s.q[1], 0.0);
    EXPECT_NEAR(s.q[2], 0.25, 1e-15);
    EXPECT_EQ(s.a, std::vector<double>(3, 1.0));
}

TEST(Ladder, GammaBound) {
    EXPECT_NEAR(gamma_upper_bound(0.45, 1.0), 0.45, 1e-15);
    EXPECT_NEAR(gamma_upper_bound(0.45, 0.8), 0.25, 1e-15);
    EXPECT_THROW(make_barrier_spec(0.0, 1.0, 0.45, 1.0), HypothesisViolation);
    EXPECT_THROW(make_barrier_spec(0.0, 0.0, 0.45, 1.0), HypothesisViolation);
    EXPECT_THROW(make_barrier_spec(0.0, 0.2, 0.45, 1.0, {1.0, 2.0}), DomainError);
}

TEST(SmoothDrop, EndpointsAndMonotone) {
    EXPECT_EQ(smooth_drop(-1.0), 1.0);
    EXPECT_EQ(smooth_drop(2.0), 0.0);
    EXPECT_NEAR(smooth_drop(0.5), 0.5, 1e-15);
    for (double t = 0.0; t < 1.0; t += 0.01) EXPECT_GE(smooth_drop(t), smooth_drop(t + 0.01));
}

TEST(CutoffChain, ConstantThetaGivesOnes) {
    auto dom = make_domain(1, 1.0, 64);
    ScalarField one(dom, 1.0);
    auto chain = make_cutoff_chain(one, 2, 0.1);
    ASSERT_EQ(chain.size(), 3u);
    for (const auto& c : chain)
        for (auto i : dom->interior_nodes()) EXPECT_EQ(c[i], 1.0);
    EXPECT_TRUE(chain_nested(chain));
}

TEST(CutoffChain, BumpIsNested) {
    auto dom = make_domain(1, 1.0, 204);  // dx = 0.01
    ThetaSpec t;
    t.kind = ThetaKind::Radial;
    t.r_in = 0.1;
    t.r_out = 0.2;
    auto theta = make_theta(dom, t);
    auto chain = make_cutoff_chain(theta, 3, 0.05);
    ASSERT_EQ(chain.size(), 4u);
    EXPECT_TRUE(chain_nested(chain));
    EXPECT_NEAR(support_radius(chain[1]), 0.25, 2.0 * dom->dx());
    EXPECT_NEAR(support_radius(chain[2]), 0.30, 2.0 * dom->dx());
    for (auto i : dom->interior_nodes()) {
        EXPECT_EQ(chain[3][i], 1.0);
        for (const auto& c : chain) {
            EXPECT_GE(c[i], 0.0);
            EXPECT_LE(c[i], 1.0);
        }
    }
}

TEST(CutoffChain, OverflowIsReported) {
    auto dom = make_domain(1, 1.0, 64);
    ThetaSpec t;
    t.kind = ThetaKind::Radial;
    t.r_in = 0.5;
    t.r_out = 0.8;
    EXPECT_THROW(make_cutoff_chain(make_theta(dom, t), 3, 0.2), ChainOverflow);
}

TEST(Subsolution, GreenCaseIsSubharmonic) {
    auto dom = make_domain(1, 1.0, 128);
    auto w = build_weight({1, 1}, 1, dom);
    auto spec = make_barrier_spec(w.p, default_gamma(0.45, 1.0), 0.45, 1.0);
    spec.theta_chain.assign(static_cast<std::size_t>(spec.ell + 1), ScalarField(dom, 1.0));
    auto F = build_subsolution(w, spec, 1, 1e-9);
    EXPECT_TRUE(F.report.pass);
    EXPECT_GE(F.C, 0.0);
    EXPECT_LT(F.C, 16.0);
}

TEST(Subsolution, GammaAtDeltaIsRejected) {
    EXPECT_THROW(make_barrier_spec(0.0, 1.0, 0.45, 1.0), HypothesisViolation);
}

TEST(Supersolution, GreenCaseAndMonotoneInA) {
    auto dom = make_domain(1, 1.0, 128);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField one(dom, 1.0);
    const EllipticOperator op(1);
    const double gamma = default_gamma(0.45, 1.0);
    auto G1 = build_supersolution(w, one, gamma, 0.1, op, 1e-9);
    auto G2 = build_supersolution(w, one, gamma, 1.0, op, 1e-9);
    EXPECT_TRUE(G1.report.pass);
    EXPECT_TRUE(G2.report.pass);
    EXPECT_LE(G2.C, G1.C);
}

TEST(Supersolution, ZeroThetaIsSuperharmonic) {
    auto dom = make_domain(1, 1.0, 96);
    auto w = build_weight({1, 1}, 1, dom);
    auto G = build_supersolution(w, ScalarField(dom, 0.0), 0.4, 0.1, EllipticOperator(1), 1e-9);
    EXPECT_TRUE(G.report.pass);
}

TEST(Superweight, SubharmonicFieldFails) {
    auto dom = make_domain(1, 1.0, 64);
    auto f = ScalarField::from_function(dom, [](const auto& x) { return x[0] * x[0] + x[1] * x[1] - 2.0; });
    auto r = superweight_check(f, EllipticOperator(1), 1e-9);
    EXPECT_FALSE(r.pass);
    EXPECT_FALSE(r.laplacian.pass);
}

TEST(Superweight, RhoHasEmptySublevel) {
    auto dom = make_domain(1, 1.0, 64);
    ScalarField rho(dom);
    for (std::size_t i = 0; i < dom->size(); ++i) rho.set(i, dom->rho(i));
    auto r = superweight_check(rho, EllipticOperator(1), 1e-9);
    EXPECT_TRUE(r.sublevel_empty);
    EXPECT_TRUE(r.sublevel_compact);
}

TEST(Superweight, GreenSupersolutionPasses) {
    auto dom = make_domain(1, 1.0, 128);
    auto w = build_weight({1, 1}, 1, dom);
    auto G = build_supersolution(w, ScalarField(dom, 1.0), 0.4, 0.1, EllipticOperator(1), 1e-9);
    // Shift so psi_bar > -1 near the boundary.
    double gmin = 1e300;
    for (auto i : dom->interior_nodes())
        if (!G.field.masked(i) && dom->distance_to_boundary(i) < 2.0 * dom->dx()) gmin = std::min(gmin, G.field[i]);
    ScalarField psi_bar(dom);
    for (std::size_t i = 0; i < dom->size(); ++i) {
        if (G.field.masked(i))
            psi_bar.set_neg_inf(i);
        else
            psi_bar.set(i, G.field[i] - 1.0 - gmin + 1e-9);
    }
    auto r = superweight_check(psi_bar, EllipticOperator(1), 1e-9);
    EXPECT_TRUE(r.pass);
    EXPECT_FALSE(r.sublevel_empty);
}

TEST(CorollaryOperator, FlatModelFactorsArePositive) {
    auto dom = make_domain(2, 1.0, 16);
    auto w = build_weight({2, 2}, 2, dom);
    auto op = default_operator(w, 2);
    ASSERT_TRUE(op.has_potential());
    std::size_t checked = 0;
    for (auto i : dom->interior_nodes()) {
        if (!op.available(i) || w.psi.masked(i)) continue;
        for (const auto& t : op.factors(*dom, i)) EXPECT_GE(cone_margin(t, 2), -1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 0u);
}
