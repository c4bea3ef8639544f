#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "distance.hpp"
#include "elliptic.hpp"
#include "weights.hpp"

namespace mshenv {

// Exponents closer to zero than this are treated as the log branch.
inline constexpr double kExponentSnap = 1e-12;

inline double snap_exponent(double q) { return std::abs(q) < kExponentSnap ? 0.0 : q; }

// Smallest integer ell >= 1 with p + ell * gamma > 0.
inline int ladder_length(double p, double gamma) {
    if (!(gamma > 0.0)) throw DomainError("ladder needs gamma > 0");
    int ell = 1;
    while (!(p + ell * gamma > kExponentSnap)) ++ell;
    return ell;
}

inline double gamma_upper_bound(double gamma_tilde, double delta) {
    return std::min(gamma_tilde + delta - 1.0, 0.5 * delta);
}

inline double default_gamma(double gamma_tilde, double delta) { return 0.9 * gamma_upper_bound(gamma_tilde, delta); }

struct BarrierSpec {
    double p = 0.0;
    double gamma = 0.0;
    int ell = 1;
    std::vector<double> q;  // q_j = p + j gamma, j = 1..ell
    std::vector<double> a;  // a_j > 0
    std::vector<ScalarField> theta_chain;  // theta_0 .. theta_ell
    double buffer = 0.0;
    double C = 0.0;
};

// Validates gamma against the weight's (gamma_tilde, delta) and fills the ladder.
inline BarrierSpec make_barrier_spec(double p, double gamma, double gamma_tilde, double delta,
                                     std::vector<double> a = {}) {
    const double bound = gamma_upper_bound(gamma_tilde, delta);
    if (!(gamma > 0.0 && gamma < bound))
        throw HypothesisViolation("gamma = " + std::to_string(gamma) + " outside (0, " + std::to_string(bound) + ")");
    BarrierSpec s;
    s.p = p;
    s.gamma = gamma;
    s.ell = ladder_length(p, gamma);
    for (int j = 1; j <= s.ell; ++j) {
        const double q = snap_exponent(p + j * gamma);
        if (q > kMaxExponent) throw HypothesisViolation("ladder exponent exceeds 1");
        s.q.push_back(q);
    }
    if (a.empty()) a.assign(static_cast<std::size_t>(s.ell), 1.0);
    if (static_cast<int>(a.size()) != s.ell) throw DomainError("need one coefficient a_j per rung");
    for (double x : a)
        if (!(x > 0.0)) throw DomainError("coefficients a_j must be positive");
    s.a = std::move(a);
    return s;
}

// Quintic smoothstep from 1 (t <= 0) to 0 (t >= 1), C^2 with bounded second
// derivative 10/sqrt(3) ~ 5.77.
inline double smooth_drop(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    // Clamped: rounding near t = 1 otherwise gives values of order -1e-15.
    return std::clamp(1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t)), 0.0, 1.0);
}
inline constexpr double kSmoothDropMaxSecondDerivative = 5.773502691896258;

// theta_0 = theta, theta_ell = 1; for 0 < j < ell, theta_j equals 1 within
// (j-1) b + 2 dx of supp theta and vanishes beyond distance j b.
inline std::vector<ScalarField> make_cutoff_chain(const ScalarField& theta, int ell, double buffer) {
    const Domain& dom = theta.domain();
    const double dx = dom.dx();
    if (ell < 1) throw DomainError("chain length must be >= 1");
    if (buffer < 2.0 * dx) throw DomainError("buffer must be >= 2 dx");
    std::vector<std::uint8_t> supp(dom.size(), 0);
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const double t = theta[i];
        if (theta.masked(i) || t < 0.0 || t > 1.0 + 1e-12) throw DomainError("theta must lie in [0, 1]");
        supp[i] = t > 0.0;
    }
    const bool any = std::find(supp.begin(), supp.end(), 1) != supp.end();
    std::vector<double> dist;
    if (any) {
        dist = squared_distance_transform(dom, supp);
        for (auto& d : dist) d = std::sqrt(d);
    }
    std::vector<ScalarField> chain{theta};
    for (int j = 1; j < ell; ++j) {
        ScalarField tj(theta.domain_ptr(), 0.0);
        if (any) {
            const double inner = (j - 1) * buffer + 2.0 * dx;
            const double width = buffer - 2.0 * dx;
            for (std::size_t i = 0; i < dom.size(); ++i) {
                const double v = width > 0.0 ? smooth_drop((dist[i] - inner) / width) : (dist[i] <= inner ? 1.0 : 0.0);
                tj.set(i, v);
                if (v > 0.0 && !dom.is_interior(i) && theta[i] == 0.0)
                    throw ChainOverflow("theta_" + std::to_string(j) + " reaches the boundary; shrink buffer or theta");
            }
        }
        chain.push_back(std::move(tj));
    }
    chain.emplace_back(theta.domain_ptr(), 1.0);
    return chain;
}

// Node-wise nesting check: supp theta_{j-1} lies in {theta_j = 1} with a
// 2-node buffer along every axis.
inline bool chain_nested(const std::vector<ScalarField>& chain) {
    if (chain.empty()) return true;
    const Domain& dom = chain.front().domain();
    for (std::size_t j = 1; j < chain.size(); ++j) {
        const auto& prev = chain[j - 1];
        const auto& cur = chain[j];
        for (std::size_t i = 0; i < dom.size(); ++i) {
            if (cur[i] < 0.0 || cur[i] > 1.0) return false;
            if (!(prev[i] > 0.0)) continue;
            for (int a = 0; a < dom.axes(); ++a)
                for (int s = -2; s <= 2; ++s) {
                    const int k = dom.index_along(i, a) + s;
                    if (k < 0 || k >= dom.nodes_per_axis()) continue;
                    const auto jdx = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + s * dom.stride(a));
                    if (cur[jdx] != 1.0) return false;
                }
        }
    }
    return true;
}

struct SearchOptions {
    double C_max = 65536.0;
    int bisection_steps = 20;
};

// Doubling-then-bisection search for the least C with ok(C). `worst` reports
// the node and margin of the worst failure at a given C.
inline double search_constant(const std::string& stage, const std::function<bool(double)>& ok,
                              const std::function<std::pair<double, std::size_t>(double)>& worst,
                              const SearchOptions& opt) {
    if (ok(0.0)) return 0.0;
    double hi = 1.0;
    while (!ok(hi)) {
        if (hi >= opt.C_max) {
            const auto [m, node] = worst(hi);
            throw SearchExhausted(stage, "no C <= " + std::to_string(opt.C_max) + " works; worst margin " +
                                             std::to_string(m) + " at node " + std::to_string(node),
                                  m, node);
        }
        hi *= 2.0;
    }
    double lo = hi == 1.0 ? 0.0 : 0.5 * hi;
    for (int s = 0; s < opt.bisection_steps; ++s) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

struct BarrierResult {
    ScalarField field;
    double C = 0.0;
    CheckReport report;
};

namespace detail {

// Compact complex Hessian for n <= 2.
struct Form2 {
    double a = 0, b = 0;
    cplx c{};
    HermitianForm to_form(int n, double shift) const {
        HermitianForm H(n);
        H(0, 0) = a + shift;
        if (n == 2) {
            H(1, 1) = b + shift;
            H(0, 1) = c;
            H(1, 0) = std::conj(c);
        }
        return H;
    }
};

inline Form2 pack(const HermitianForm& H) {
    Form2 f;
    f.a = H(0, 0).real();
    if (H.dim() == 2) {
        f.b = H(1, 1).real();
        f.c = H(0, 1);
    }
    return f;
}

// K_q(h) with the 0 * inf = 0 convention handled by the caller.
inline double kernel_or_tag(double q, double h, bool& singular) {
    if (h > 0.0) return kernel_K_finite(KernelParams(q), h);
    if (q > 0.0) return 0.0;
    singular = true;
    return kNegInf;
}

}  // namespace detail

// F = theta K_p(h) + sum_j a_j theta_j K_{q_j}(h) + C rho with the least
// dyadic-then-bisected C making F m-positive at every checked node.
inline BarrierResult build_subsolution(const WeightData& w, const BarrierSpec& spec, int m, double tol,
                                       const SearchOptions& opt = {}) {
    const Domain& dom = w.domain();
    if (static_cast<int>(spec.theta_chain.size()) != spec.ell + 1)
        throw DomainError("theta chain length must be ell + 1");
    const auto& theta = spec.theta_chain.front();
    ScalarField base(w.domain_ptr());
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const double hv = w.h[i];
        const bool in_mask = w.psi.masked(i);
        bool singular = false;
        double v = 0.0;
        if (theta[i] > 0.0) v += theta[i] * (in_mask ? (singular = true, kNegInf) : w.psi[i]);
        for (int j = 1; j <= spec.ell; ++j) {
            const double tj = spec.theta_chain[j][i];
            if (tj <= 0.0) continue;
            const double q = spec.q[j - 1];
            if (in_mask && q <= 0.0) {
                singular = true;
                continue;
            }
            v += spec.a[j - 1] * tj * detail::kernel_or_tag(q, hv, singular);
        }
        if (singular)
            base.set_neg_inf(i);
        else
            base.set(i, v);
    }
    std::vector<std::size_t> nodes;
    std::vector<detail::Form2> forms;
    std::size_t excluded = 0;
    for (auto i : dom.interior_nodes()) {
        if (!stencil_clear(base, i, /*allow_ghost=*/true)) {
            ++excluded;
            continue;
        }
        nodes.push_back(i);
        forms.push_back(detail::pack(hessian_from_values(dom, base.values().data(), i)));
    }
    const double rho_coef = 1.0 / (2.0 * dom.rho_radius());
    auto margin_at = [&](std::size_t k, double C) { return cone_margin(forms[k].to_form(dom.n(), C * rho_coef), m); };
    auto ok = [&](double C) {
        for (std::size_t k = 0; k < forms.size(); ++k)
            if (margin_at(k, C) < -tol) return false;
        return true;
    };
    auto worst = [&](double C) {
        std::pair<double, std::size_t> wv{1e300, 0};
        for (std::size_t k = 0; k < forms.size(); ++k) {
            const double mg = margin_at(k, C);
            if (mg < wv.first) wv = {mg, nodes[k]};
        }
        return wv;
    };
    BarrierResult out;
    out.C = search_constant("subsolution", ok, worst, opt);
    out.report.name = "subsolution";
    out.report.params = {{"m", m}, {"tol", tol}, {"gamma", spec.gamma}, {"ell", spec.ell}, {"C", out.C},
                         {"buffer", spec.buffer}, {"bump_second_derivative", kSmoothDropMaxSecondDerivative}};
    out.report.excluded = excluded;
    for (std::size_t k = 0; k < forms.size(); ++k) {
        const double mg = margin_at(k, out.C);
        out.report.record(nodes[k], w.h[nodes[k]], mg, mg >= -tol);
    }
    out.field = ScalarField(w.domain_ptr());
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if (base.masked(i))
            out.field.set_neg_inf(i);
        else
            out.field.set(i, base[i] + out.C * dom.rho(i));
    }
    return out;
}

// G = theta K_p(h) - a K_{p+gamma}(h) - C rho with the least C making
// Delta G <= 0 (relative tolerance) at every unmasked checked node.
inline BarrierResult build_supersolution(const WeightData& w, const ScalarField& theta, double gamma, double a,
                                         const EllipticOperator& op, double tol, const SearchOptions& opt = {}) {
    if (!(a > 0.0)) throw DomainError("supersolution coefficient a must be positive");
    if (!(gamma > 0.0)) throw DomainError("supersolution gamma must be positive");
    const Domain& dom = w.domain();
    const double q = snap_exponent(w.p + gamma);
    if (q > kMaxExponent) throw HypothesisViolation("p + gamma exceeds 1");
    ScalarField base(w.domain_ptr());
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const bool in_mask = w.psi.masked(i);
        bool singular = in_mask && (theta[i] > 0.0 || q <= 0.0);
        if (singular) {
            base.set_neg_inf(i);
            continue;
        }
        double v = theta[i] > 0.0 ? theta[i] * w.psi[i] : 0.0;
        v -= a * detail::kernel_or_tag(q, w.h[i], singular);
        base.set(i, v);
    }
    const auto hrho = (1.0 / (2.0 * dom.rho_radius())) * HermitianForm::identity(dom.n());
    std::vector<std::size_t> nodes;
    std::vector<double> L, Lrho;
    std::size_t excluded = 0;
    for (auto i : dom.interior_nodes()) {
        if (w.psi.masked(i) || !stencil_clear(base, i, /*allow_ghost=*/true) || !op.available(i)) {
            ++excluded;
            continue;
        }
        const auto factors = op.factors(dom, i);
        const auto gv = m_elliptic_apply(factors, hessian_from_values(dom, base.values().data(), i));
        if (!gv.factors_m_positive) {
            ++excluded;
            continue;
        }
        nodes.push_back(i);
        L.push_back(gv.value);
        Lrho.push_back(m_elliptic_apply(factors, hrho).value);
    }
    auto margin_at = [&](std::size_t k, double C) {
        const double val = L[k] - C * Lrho[k];
        const double scale = std::abs(L[k]) + C * std::abs(Lrho[k]);
        return scale > 0.0 ? -val / scale : 0.0;
    };
    auto ok = [&](double C) {
        for (std::size_t k = 0; k < L.size(); ++k)
            if (margin_at(k, C) < -tol) return false;
        return true;
    };
    auto worst = [&](double C) {
        std::pair<double, std::size_t> wv{1e300, 0};
        for (std::size_t k = 0; k < L.size(); ++k) {
            const double mg = margin_at(k, C);
            if (mg < wv.first) wv = {mg, nodes[k]};
        }
        return wv;
    };
    BarrierResult out;
    out.C = search_constant("supersolution", ok, worst, opt);
    out.report.name = "supersolution";
    out.report.params = {{"m", op.m()}, {"tol", tol}, {"gamma", gamma}, {"a", a}, {"C", out.C}};
    out.report.excluded = excluded;
    for (std::size_t k = 0; k < L.size(); ++k) {
        const double mg = margin_at(k, out.C);
        out.report.record(nodes[k], w.h[nodes[k]], mg, mg >= -tol);
    }
    out.field = ScalarField(w.domain_ptr());
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if (base.masked(i))
            out.field.set_neg_inf(i);
        else
            out.field.set(i, base[i] - out.C * dom.rho(i));
    }
    return out;
}

struct SuperweightReport {
    bool pass = false;
    bool sublevel_compact = true;  // (a)
    bool sublevel_empty = false;
    double sublevel_min_boundary_distance = 0.0;
    CheckReport laplacian;  // (b)
    bool finite_off_mask = true;  // (c)

    json to_json() {
        return {{"pass", pass},
                {"sublevel_compact", sublevel_compact},
                {"sublevel_empty", sublevel_empty},
                {"sublevel_min_boundary_distance", sublevel_min_boundary_distance},
                {"finite_off_mask", finite_off_mask},
                {"laplacian", laplacian.to_json()}};
    }
};

inline SuperweightReport superweight_check(const ScalarField& psi_bar, const EllipticOperator& op, double tol) {
    const Domain& dom = psi_bar.domain();
    SuperweightReport rep;
    rep.laplacian.name = "superweight_laplacian";
    rep.laplacian.params = {{"tol", tol}};
    double min_dist = 1e300;
    bool any = false;
    for (auto i : dom.interior_nodes()) {
        if (psi_bar.masked(i) || psi_bar[i] <= -1.0) {
            any = true;
            min_dist = std::min(min_dist, dom.distance_to_boundary(i));
        }
        if (!psi_bar.masked(i) && !std::isfinite(psi_bar[i])) rep.finite_off_mask = false;
    }
    rep.sublevel_empty = !any;
    rep.sublevel_min_boundary_distance = any ? min_dist : dom.radius();
    rep.sublevel_compact = !any || min_dist >= 2.0 * dom.dx();
    const auto id = HermitianForm::identity(dom.n());
    for (auto i : dom.interior_nodes()) {
        if (!stencil_clear(psi_bar, i, /*allow_ghost=*/true) || !op.available(i)) {
            ++rep.laplacian.excluded;
            continue;
        }
        const auto factors = op.factors(dom, i);
        const auto H = hessian_from_values(dom, psi_bar.values().data(), i);
        const double val = m_elliptic_apply(factors, H).value;
        const double scale = 1.0 + H.max_abs_entry() * m_elliptic_apply(factors, id).value;
        const double margin = -val / scale;
        rep.laplacian.record(i, 0.0, margin, margin >= -tol);
    }
    rep.pass = rep.sublevel_compact && rep.laplacian.pass && rep.finite_off_mask;
    return rep;
}

// theta = 1 chain, gamma = 1/2 - eta. The ladder's validity is checked
// against gamma_tilde = 1/2 - eta/2, which condition (1) grants for the
// flat model.
inline std::shared_ptr<const ScalarField> corollary_potential(const WeightData& w, int m, double eta, double tol,
                                                              double* C_out = nullptr) {
    const double gamma = 0.5 - eta;
    auto spec = make_barrier_spec(w.p, gamma, 0.5 - 0.5 * eta, 1.0);
    spec.theta_chain.assign(static_cast<std::size_t>(spec.ell + 1), ScalarField(w.domain_ptr(), 1.0));
    auto res = build_subsolution(w, spec, m, tol);
    if (C_out) *C_out = res.C;
    return std::make_shared<const ScalarField>(std::move(res.field));
}

// Delta = (i ddbar K~)^{m-1} ^ omega^{n-m}; plain trace operator for m = 1.
inline EllipticOperator default_operator(const WeightData& w, int m, double eta = 0.01, double tol = 1e-9) {
    if (m == 1) return EllipticOperator(1);
    return EllipticOperator(m, corollary_potential(w, m, eta, tol));
}

}  // namespace mshenv
