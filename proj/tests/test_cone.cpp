#include <gtest/gtest.h>

#include <random>

#include "mshenv/cone.hpp"

using namespace mshenv;

namespace {

// Brute-force sigma_k: sum over all k-subsets of products.
double sigma_brute(const std::vector<double>& l, int k) {
    const int n = static_cast<int>(l.size());
    double s = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= l[i];
        s += prod;
    }
    return s;
}

HermitianForm random_form(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> N(0.0, scale);
    HermitianForm h(n);
    for (int i = 0; i < n; ++i) {
        h(i, i) = N(rng);
        for (int j = i + 1; j < n; ++j) {
            h(i, j) = cplx(N(rng), N(rng));
            h(j, i) = std::conj(h(i, j));
        }
    }
    return h;
}

// Conjugates diag(d) by a random unitary built from Givens rotations.
HermitianForm rotated_diagonal(std::mt19937_64& rng, const std::vector<double>& d) {
    const int n = static_cast<int>(d.size());
    std::uniform_real_distribution<double> A(0.0, 6.283185307179586);
    std::vector<std::vector<cplx>> U(n, std::vector<cplx>(n));
    for (int i = 0; i < n; ++i) U[i][i] = 1.0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double t = A(rng), ph = A(rng);
            const cplx c = std::cos(t), s = std::sin(t) * std::polar(1.0, ph);
            for (int r = 0; r < n; ++r) {
                const cplx ua = U[r][a], ub = U[r][b];
                U[r][a] = c * ua - std::conj(s) * ub;
                U[r][b] = s * ua + c * ub;
            }
        }
    HermitianForm h(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx v = 0.0;
            for (int k = 0; k < n; ++k) v += U[i][k] * d[k] * std::conj(U[j][k]);
            h(i, j) = v;
        }
    for (int i = 0; i < n; ++i) h(i, i) = h(i, i).real();
    return h;
}

}  // namespace

TEST(Sigma, Examples) {
    EXPECT_DOUBLE_EQ(sigma_k({1, 1, 1}, 2), 3.0);
    EXPECT_NEAR(sigma_k({1, 0.1, -0.1}, 2), -0.01, 1e-15);
    EXPECT_THROW(sigma_k({1, 2}, 3), DomainError);
    EXPECT_THROW(sigma_k({1, 2}, 0), DomainError);
}

TEST(Sigma, MatchesBruteForce) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial)
        for (int n : {2, 3}) {
            std::vector<double> l(n);
            for (auto& x : l) x = U(rng);
            for (int k = 1; k <= n; ++k) EXPECT_NEAR(sigma_k(l, k), sigma_brute(l, k), 1e-12);
        }
}

TEST(Eigen, RecoversRotatedSpectrum) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial)
        for (int n : {2, 3}) {
            std::vector<double> d(n);
            for (auto& x : d) x = U(rng);
            if (trial % 10 == 0) d[1] = d[0];  // repeated eigenvalue
            const auto h = rotated_diagonal(rng, d);
            auto lam = eigenvalues(h);
            std::sort(d.begin(), d.end());
            for (int i = 0; i < n; ++i) EXPECT_NEAR(lam[i], d[i], 1e-7);
            for (int k = 1; k <= n; ++k) EXPECT_NEAR(sigma_k_form(h, k), sigma_brute(d, k), 1e-11);
        }
}

TEST(Form, RejectsNonHermitian) {
    EXPECT_THROW(HermitianForm::from_matrix({{1.0, cplx(0, 1)}, {cplx(0, 1), 1.0}}), DomainError);
    EXPECT_NO_THROW(HermitianForm::from_matrix({{1.0, cplx(0, 1)}, {cplx(0, -1), 1.0}}));
    HermitianForm bad(2);
    bad(0, 1) = 1.0;
    EXPECT_THROW(is_m_positive(bad, 1, 1e-12), DomainError);
}

TEST(ConeMembership, IdentityIsInEveryCone) {
    for (int n = 1; n <= 3; ++n)
        for (int m = 1; m <= n; ++m) {
            const auto r = is_m_positive(HermitianForm::identity(n), m, 1e-12);
            EXPECT_TRUE(r.is_member);
            EXPECT_GT(r.margin, 0.0);
            EXPECT_EQ(static_cast<int>(r.sigma_values.size()), m);
        }
}

TEST(ConeMembership, NotTwoShCounterexample) {
    for (double eps : {0.1, 0.01}) {
        const auto h = HermitianForm::diagonal({1.0, eps, -eps});
        EXPECT_TRUE(is_m_positive(h, 1, 1e-12).is_member);
        const auto r2 = is_m_positive(h, 2, 1e-12);
        EXPECT_FALSE(r2.is_member);
        EXPECT_NEAR(r2.sigma_values[1], -eps * eps, 1e-15);
    }
}

TEST(ConeMembership, CorollaryLeadingOrderFormIsOnTheBoundary) {
    // diag(1 - k/m, Id_{k-1}, 0) with k = m = 2, n = 3.
    const auto h = HermitianForm::diagonal({0.0, 1.0, 0.0});
    const auto r = is_m_positive(h, 2, 1e-12);
    EXPECT_TRUE(r.is_member);
    EXPECT_DOUBLE_EQ(r.margin, 0.0);
}

TEST(ConeMembership, NestingAndConvexity) {
    std::mt19937_64 rng(3);
    int members = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 2 + trial % 2;
        auto a = random_form(rng, n);
        auto b = random_form(rng, n);
        a += 1.2 * HermitianForm::identity(n);
        b += 1.2 * HermitianForm::identity(n);
        for (int m = 2; m <= n; ++m)
            if (is_m_positive(a, m, 0).is_member) {
                EXPECT_TRUE(is_m_positive(a, m - 1, 0).is_member);
            }
        for (int m = 1; m <= n; ++m)
            if (is_m_positive(a, m, 0).is_member && is_m_positive(b, m, 0).is_member) {
                ++members;
                EXPECT_TRUE(is_m_positive(0.5 * (a + b), m, 1e-12).is_member);
            }
    }
    EXPECT_GT(members, 100);
}

TEST(Dominance, Examples) {
    const auto id = HermitianForm::identity(2);
    for (int m : {1, 2}) {
        EXPECT_TRUE(m_dominates(2.0 * id, id, m, 1e-12));
        EXPECT_TRUE(m_dominates(id, id, m, 1e-12));
    }
    EXPECT_THROW(m_dominates(id, HermitianForm::identity(3), 1, 1e-12), DomainError);
}

TEST(Dominance, MutualDominanceForcesZeroSigmas) {
    // For generic pairs at most one direction holds; whenever both do, the
    // difference has vanishing sigma_1..sigma_m.
    std::mt19937_64 rng(4);
    int both = 0, one = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto t = random_form(rng, 3), s = random_form(rng, 3);
        for (int m = 1; m <= 3; ++m) {
            const bool ts = m_dominates(t, s, m, 1e-12), st = m_dominates(s, t, m, 1e-12);
            if (ts && st) {
                ++both;
                const auto d = t - s;
                for (int k = 1; k <= m; ++k) EXPECT_NEAR(sigma_k_form(d, k), 0.0, 1e-9);
            }
            one += (ts != st);
        }
    }
    EXPECT_EQ(both, 0);
    EXPECT_GT(one, 500);
}

TEST(MaxShift, Examples) {
    EXPECT_NEAR(max_shift_in_cone(HermitianForm::identity(2), 2, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(max_shift_in_cone(HermitianForm::diagonal({2, 0}), 1, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(max_shift_in_cone(HermitianForm::diagonal({2, 0}), 2, 1.0), 0.0, 1e-15);
    EXPECT_NEAR(max_shift_in_cone(HermitianForm::diagonal({2, 0}), 1, 4.0), 0.25, 1e-15);
    EXPECT_THROW(max_shift_in_cone(HermitianForm::identity(2), 2, 0.0), DomainError);
}

TEST(MaxShift, ClosedFormsAgreeWithBisectionAndLandOnBoundary) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> C(0.1, 10.0);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + trial % 3;
        const auto h = random_form(rng, n, 2.0);
        const double c = C(rng);
        for (int m = 1; m <= n; ++m) {
            const double v = max_shift_in_cone(h, m, c);
            const double vb = max_shift_in_cone(h, m, c, 1e-14);
            EXPECT_NEAR(v, vb, 1e-9 * (1.0 + std::abs(v)));
            auto shifted = h - (v * c) * HermitianForm::identity(n);
            const auto lam = eigenvalues(shifted);
            double mn = 1e300;
            for (int k = 1; k <= m; ++k) mn = std::min(mn, sigma_k(lam, k));
            const double scale = std::pow(1.0 + std::abs(lam.front()) + std::abs(lam.back()), m);
            EXPECT_LE(std::abs(mn), 1e-9 * scale);
            // Slightly beyond v leaves the cone, slightly below stays inside.
            auto beyond = h - ((v + 1e-6) * c) * HermitianForm::identity(n);
            EXPECT_FALSE(is_m_positive(beyond, m, 0).is_member);
            auto below = h - ((v - 1e-6) * c) * HermitianForm::identity(n);
            EXPECT_TRUE(is_m_positive(below, m, 0).is_member);
        }
    }
}

TEST(Elliptic, IdentityExample) {
    const auto id = HermitianForm::identity(2);
    const auto r = m_elliptic_apply({id}, id);
    EXPECT_NEAR(r.value, 2.0, 1e-15);
    EXPECT_TRUE(r.factors_m_positive);
}

TEST(Elliptic, TwoByTwoClosedForm) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        const auto g = random_form(rng, 2), u = random_form(rng, 2);
        const double expected = g(0, 0).real() * u(1, 1).real() + g(1, 1).real() * u(0, 0).real() -
                                2.0 * (g(0, 1) * u(1, 0)).real();
        EXPECT_NEAR(mixed_sigma({g, u}), expected, 1e-12);
        EXPECT_NEAR(mixed_sigma({u, g}), expected, 1e-12);
    }
}

TEST(Elliptic, SymmetricInArguments) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_form(rng, 3), b = random_form(rng, 3), c = random_form(rng, 3);
        const double v = mixed_sigma({a, b, c});
        EXPECT_NEAR(mixed_sigma({b, c, a}), v, 1e-11);
        EXPECT_NEAR(mixed_sigma({c, a, b}), v, 1e-11);
        // Diagonal of the polarization recovers m * sigma_m.
        EXPECT_NEAR(mixed_sigma({a, a, a}), 3.0 * sigma_k_form(a, 3), 1e-11);
    }
}

TEST(Elliptic, IdentityFactorsGiveBinomialTrace) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_form(rng, 3);
        const auto id = HermitianForm::identity(3);
        EXPECT_NEAR(m_elliptic_apply({}, g).value, g.trace(), 1e-12);          // C(2,0)
        EXPECT_NEAR(m_elliptic_apply({id}, g).value, 2.0 * g.trace(), 1e-12);  // C(2,1)
        EXPECT_NEAR(m_elliptic_apply({id, id}, g).value, g.trace(), 1e-12);    // C(2,2)
    }
}

TEST(Elliptic, FlagsNonPositiveFactorAndRejectsDegenerateOperator) {
    const auto bad = HermitianForm::diagonal({1.0, -0.5});
    const auto r = m_elliptic_apply({bad}, HermitianForm::identity(2));
    EXPECT_FALSE(r.factors_m_positive);
    EXPECT_THROW(m_elliptic_apply({HermitianForm::diagonal({-1.0, -1.0})}, HermitianForm::identity(2)),
                 HypothesisViolation);
}
