#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mshenv/harness.hpp"

using namespace mshenv;

namespace {

ScalarField product(const ScalarField& theta, const ScalarField& psi) {
    ScalarField out(psi.domain_ptr());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (psi.masked(i))
            out.set_neg_inf(i);
        else
            out.set(i, theta[i] * psi[i]);
    }
    return out;
}

// theta vanishes on |z| < 0.6, so {theta = 0} contains a disc around the pole.
ScenarioConfig hollow_config(int N) {
    ScenarioConfig c;
    c.name = "hollow";
    c.N = N;
    c.floor_factor = 4.0;
    c.theta.kind = ThetaKind::Annular;
    c.theta.r_in = 0.7;
    c.theta.r_out = 0.8;
    c.theta.width = 0.1;
    c.buffer = 0.05;
    return c;
}

}  // namespace

TEST(RatioProfile, ExactProductGivesOne) {
    auto dom = make_domain(1, 1.0, 256);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField theta(dom, 0.5);
    auto prof = ratio_profile(product(theta, w.psi), w, theta, admissible_shells(w), 0.1, 0.1);
    EXPECT_TRUE(prof.pass);
    for (const auto& r : prof.rows) {
        if (!r.count) continue;
        EXPECT_NEAR(r.max_ratio, 1.0, 1e-12);
        EXPECT_NEAR(r.min_ratio, 1.0, 1e-12);
    }
}

TEST(RatioProfile, NoQualifyingNodes) {
    auto dom = make_domain(1, 1.0, 64);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField zero(dom, 0.0);
    EXPECT_THROW(ratio_profile(zero, w, zero, admissible_shells(w), 0.1, 0.1), DomainError);
}

TEST(Boundedness, ZeroPassesAndPsiFails) {
    auto cfg = hollow_config(256);
    auto dom = make_domain(1, 1.0, cfg.N);
    auto w = build_weight({1, 1}, 1, dom, cfg.floor_factor);
    auto theta = make_theta(dom, cfg.theta);
    auto bounded = boundedness_probe(ScalarField(dom, 0.0), theta, w, cfg.buffer, 0.0);
    EXPECT_TRUE(bounded.applicable);
    EXPECT_FALSE(bounded.inconclusive);
    EXPECT_GE(bounded.span, 3.0);
    EXPECT_TRUE(bounded.pass);
    auto diverging = boundedness_probe(w.psi, theta, w, cfg.buffer, 0.0);
    EXPECT_FALSE(diverging.pass);
    EXPECT_NEAR(diverging.slope, 1.0, 1e-9);
}

TEST(Boundedness, ConstantThetaHasNoProbe) {
    auto dom = make_domain(1, 1.0, 64);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField one(dom, 1.0);
    auto r = boundedness_probe(w.psi, one, w, 0.1, 0.0);
    EXPECT_FALSE(r.applicable);
    EXPECT_TRUE(r.pass);
}

TEST(PolarMass, GreenMassAndSmoothControl) {
    auto dom = make_domain(1, 1.0, 256);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField one(dom, 1.0);
    const std::vector<double> radii{0.15, 0.25};
    auto green = polar_mass_report(w.psi, w, one, 1, radii, 0.15, 16);
    EXPECT_TRUE(green.pass);
    for (const auto& r : green.rows) {
        ASSERT_FALSE(r.inconclusive);
        EXPECT_NEAR(r.ratio, 1.0, 1e-9);  // u = psi
        EXPECT_NEAR(r.mass_psi.mass, std::numbers::pi, 0.05 * std::numbers::pi);  // (1/4) Laplacian of 2 log|z|
    }
    ScalarField rho(dom);
    for (std::size_t i = 0; i < rho.size(); ++i) rho.set(i, dom->rho(i));
    auto smooth = polar_mass_report(rho, w, one, 1, radii, 0.15, 16);
    EXPECT_FALSE(smooth.pass);  // theta = 1 demands the full mass
    for (const auto& r : smooth.rows) EXPECT_LT(std::abs(r.ratio), 0.05);
}

TEST(SingularityType, DeepNegativeExponentIsNotApplicable) {
    auto dom = make_domain(1, 1.0, 64);
    auto h = ScalarField::from_function(dom, [](const auto& x) { return x[0] * x[0] + x[1] * x[1]; });
    auto w = weight_from_field(h, -3.0, 4.0);
    ScalarField one(dom, 1.0);
    auto r = singularity_type_check(w.psi, w, one, 1.0, 0.45);
    EXPECT_FALSE(r.applicable);
}

TEST(SingularityType, BoundedDifferencePasses) {
    auto dom = make_domain(1, 1.0, 256);
    auto w = build_weight({1, 1}, 1, dom);
    ScalarField one(dom, 1.0);
    ScalarField u(dom);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (w.psi.masked(i))
            u.set_neg_inf(i);
        else
            u.set(i, w.psi[i] + 0.3 * std::sin(7.0 * dom->point(i)[0]));
    }
    auto r = singularity_type_check(u, w, one, 1.0, 0.45);
    EXPECT_TRUE(r.applicable);
    EXPECT_TRUE(r.pass);
    ScalarField half = product(ScalarField(dom, 0.5), w.psi);
    EXPECT_FALSE(singularity_type_check(half, w, one, 1.0, 0.45).pass);  // |u - psi| = |psi|/2 grows
}

TEST(Scenario, ZeroThetaGivesZeroEnvelope) {
    ScenarioConfig cfg;
    cfg.N = 256;
    cfg.floor_factor = 4.0;  // enough shells for the probe to span 3 kernel units
    cfg.theta.value = 0.0;
    auto run = run_scenario(cfg);
    for (auto i : run.dom->interior_nodes()) ASSERT_NEAR(run.env->limit.u[i], 0.0, 1e-12);
    EXPECT_TRUE(run.report.pass()) << run.report.data["gates"].dump();
}

TEST(Scenario, EnvelopeBoundedWhereThetaVanishes) {
    auto run = run_scenario(hollow_config(256));
    const auto& j = run.report.data["iii_boundedness"];
    EXPECT_TRUE(j["applicable"].get<bool>());
    EXPECT_TRUE(j["pass"].get<bool>()) << j.dump();
    EXPECT_TRUE(run.report.data["sandwich"]["pass"].get<bool>());
}

TEST(Scenario, ReportsAreDeterministic) {
    ScenarioConfig cfg;
    cfg.N = 96;
    cfg.theta.value = 0.5;
    const auto a = run_scenario(cfg).report.data.dump();
    const auto b = run_scenario(cfg).report.data.dump();
    EXPECT_EQ(a, b);
}

TEST(Sandwich, GreenEnvelopeIsSandwiched) {
    ScenarioConfig cfg;
    cfg.N = 192;
    cfg.theta.value = 0.5;
    auto run = run_scenario(cfg);
    const auto& s = run.report.data["sandwich"];
    EXPECT_TRUE(s["pass"].get<bool>()) << s.dump();
    EXPECT_EQ(s["lower"]["failed"].get<int>(), 0);
    EXPECT_EQ(s["upper"]["failed"].get<int>(), 0);
}
