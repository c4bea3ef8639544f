#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "elliptic.hpp"
#include "field.hpp"
#include "kernel.hpp"
#include "report.hpp"

namespace mshenv {

// V = {z_1 = ... = z_k = 0}, a linear complex submanifold through the centre.
struct ModelSubmanifold {
    int n = 1;
    int k = 1;
};

struct WeightData {
    ScalarField h;    // squared distance to V, rescaled so sup over Omega is 1
    ScalarField psi;  // K_p(h), unshifted; -inf on the polar mask {h < h_floor}
    double p = 0.0;
    int k = 0;        // codimension (0 for user-supplied weights)
    double h_floor = 0.0;
    double scale2 = 1.0;  // h = distance^2 / scale2
    double shift = 0.0;   // psi + shift <= -1 on Omega
    std::string origin = "model";

    // Constants recorded by the checkers (NaN until checked).
    double eps = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::quiet_NaN();
    double c = std::numeric_limits<double>::quiet_NaN();
    double gamma_tilde = std::numeric_limits<double>::quiet_NaN();

    const Domain& domain() const { return h.domain(); }
    const DomainPtr& domain_ptr() const { return h.domain_ptr(); }
    KernelParams kernel() const { return KernelParams(p); }
    // Distance below which the polar set is unresolved, in length units.
    double mask_radius() const { return std::sqrt(h_floor * scale2); }
};

inline double default_floor_factor(int n) { return n == 1 ? 10.0 : 1.2; }

// Fills psi and the mask from h.
inline void finalize_weight(WeightData& w) {
    const KernelParams kp(w.p);
    const Domain& dom = w.domain();
    w.psi = ScalarField(w.domain_ptr());
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const double hv = w.h[i];
        if (hv < w.h_floor) {
            w.psi.set_neg_inf(i);
            continue;
        }
        const double v = kernel_K_finite(kp, hv);
        w.psi.set(i, v);
        if (dom.is_interior(i)) sup = std::max(sup, v);
    }
    w.shift = std::min(0.0, -1.0 - sup);
}

inline WeightData build_weight(const ModelSubmanifold& V, int m, DomainPtr dom, double floor_factor = -1.0) {
    if (V.n != dom->n()) throw DomainError("submanifold and grid dimensions differ");
    if (V.k < 1 || V.k > V.n) throw DomainError("codimension k must be in 1..n");
    if (m < 1 || m > V.n) throw DomainError("m must be in 1..n");
    if (V.k < m) throw HypothesisViolation("codimension k = " + std::to_string(V.k) + " < m = " + std::to_string(m));
    if (floor_factor <= 0.0) floor_factor = default_floor_factor(V.n);
    WeightData w;
    w.k = V.k;
    w.p = 1.0 - static_cast<double>(V.k) / m;
    const double R = dom->radius();
    w.scale2 = dom->shape() == Shape::Ball ? R * R : 2.0 * V.k * R * R;
    w.h = ScalarField(dom);
    for (std::size_t i = 0; i < dom->size(); ++i) {
        double d2 = 0.0;
        for (int a = 0; a < 2 * V.k; ++a) {
            const double x = dom->coord(i, a);
            d2 += x * x;
        }
        w.h.set(i, d2 / w.scale2);
    }
    w.h_floor = floor_factor * floor_factor * dom->dx() * dom->dx() / w.scale2;
    finalize_weight(w);
    return w;
}

// Wraps a user-supplied h (already rescaled to [0, 1]). No hypothesis is
// implied; run the checkers.
inline WeightData weight_from_field(ScalarField h, double p, double floor_factor = -1.0) {
    WeightData w;
    const Domain& dom = h.domain();
    if (floor_factor <= 0.0) floor_factor = default_floor_factor(dom.n());
    w.p = p;
    w.k = 0;
    w.origin = "user";
    w.h = std::move(h);
    w.h_floor = floor_factor * floor_factor * dom.dx() * dom.dx();
    finalize_weight(w);
    return w;
}

// Nodes where the pointwise checks run: interior, h >= h_floor, and a stencil
// clear of the mask (ghost values are analytic extensions).
inline bool checkable(const WeightData& w, std::size_t i) { return stencil_clear(w.psi, i, /*allow_ghost=*/true); }

// i ddbar h >=_m eps h^{1-delta} omega.
inline CheckReport check_delta_regular(WeightData& w, int m, double eps, double delta, double tol) {
    if (!(eps > 0.0) || !(delta > 0.0)) throw DomainError("check_delta_regular needs eps, delta > 0");
    const Domain& dom = w.domain();
    CheckReport rep;
    rep.name = "delta_regular";
    rep.params = {{"m", m}, {"eps", eps}, {"delta", delta}, {"tol", tol}};
    const auto id = HermitianForm::identity(dom.n());
    for (auto i : dom.interior_nodes()) {
        if (!checkable(w, i)) {
            ++rep.excluded;
            continue;
        }
        const double hv = w.h[i];
        const auto H = hessian_from_values(dom, w.h.values().data(), i) - (eps * std::pow(hv, 1.0 - delta)) * id;
        const double margin = cone_margin(H, m);
        rep.record(i, hv, margin, margin >= -tol);
    }
    if (rep.pass) {
        w.eps = eps;
        w.delta = delta;
    }
    return rep;
}

// i ddbar K_p(h) >=_m -c h^{gt} K_p'(h) omega.
inline CheckReport check_condition_one(WeightData& w, int m, double c, double gamma_tilde, double tol) {
    if (!(c >= 0.0)) throw DomainError("check_condition_one needs c >= 0");
    const Domain& dom = w.domain();
    const KernelParams kp(w.p);
    CheckReport rep;
    rep.name = "condition_one";
    rep.params = {{"m", m}, {"c", c}, {"gamma_tilde", gamma_tilde}, {"tol", tol}};
    const auto id = HermitianForm::identity(dom.n());
    for (auto i : dom.interior_nodes()) {
        if (!checkable(w, i)) {
            ++rep.excluded;
            continue;
        }
        const double hv = w.h[i];
        const auto H = hessian_from_values(dom, w.psi.values().data(), i) +
                       (c * std::pow(hv, gamma_tilde) * kernel_dK(kp, hv)) * id;
        const double margin = cone_margin(H, m);
        rep.record(i, hv, margin, margin >= -tol);
    }
    if (rep.pass) {
        w.c = c;
        w.gamma_tilde = gamma_tilde;
    }
    return rep;
}

// Delta K_p(h) <= c h^{gt} K_p'(h) Delta rho. Margin is the normalized slack
// (rhs - lhs) / (|lhs| + |rhs|); nodes where the operator's factors leave
// the cone are excluded and counted.
inline CheckReport check_condition_two(WeightData& w, const EllipticOperator& op, double c, double gamma_tilde,
                                       double tol) {
    const Domain& dom = w.domain();
    const KernelParams kp(w.p);
    CheckReport rep;
    rep.name = "condition_two";
    rep.params = {{"m", op.m()}, {"c", c}, {"gamma_tilde", gamma_tilde}, {"tol", tol},
                  {"operator", op.has_potential() ? "potential" : "identity"}};
    const auto hrho = (1.0 / (2.0 * dom.rho_radius())) * HermitianForm::identity(dom.n());
    for (auto i : dom.interior_nodes()) {
        if (!checkable(w, i) || !op.available(i)) {
            ++rep.excluded;
            continue;
        }
        const double hv = w.h[i];
        const auto factors = op.factors(dom, i);
        bool positive = true;
        for (const auto& t : factors) positive = positive && cone_margin(t, op.m()) >= -tol;
        if (!positive) {
            ++rep.excluded;
            continue;
        }
        const double lhs = m_elliptic_apply(factors, hessian_from_values(dom, w.psi.values().data(), i)).value;
        const double rhs = c * std::pow(hv, gamma_tilde) * kernel_dK(kp, hv) * m_elliptic_apply(factors, hrho).value;
        const double scale = std::abs(lhs) + std::abs(rhs);
        const double margin = scale > 0.0 ? (rhs - lhs) / scale : 0.0;
        rep.record(i, hv, margin, margin >= -tol);
    }
    return rep;
}

}  // namespace mshenv
