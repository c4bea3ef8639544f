#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "weights.hpp"

namespace mshenv {

struct SolverOptions {
    double tol = 0.0;          // residual tolerance; 0 selects 1e-8 * value range
    int max_sweeps = 50000;
    double omega = 0.0;        // relaxation; 0 selects auto_omega, 1 is plain Gauss-Seidel
};

// Discrete obstacle problem. Unknown nodes are interior nodes off the polar
// mask plus masked nodes with theta = 0 (obstacle 0). Masked nodes with
// theta > 0 are Dirichlet nodes holding theta K_p(h) with h clamped below at
// (dx/2)^2; ghost nodes hold 0.
struct EnvelopeProblem {
    ScalarField obstacle;            // min(0, theta psi + C); -inf on Dirichlet nodes
    std::vector<double> dirichlet;   // values on Dirichlet nodes (unused elsewhere)
    std::vector<std::uint8_t> fixed; // 1 on Dirichlet nodes
    int m = 1;
    double C = 0.0;
    SolverOptions options;

    const Domain& domain() const { return obstacle.domain(); }
};

inline EnvelopeProblem make_obstacle(const WeightData& w, const ScalarField& theta, double C, int m,
                                     const SolverOptions& opt = {}) {
    if (!(C >= 0.0)) throw DomainError("obstacle shift C must be >= 0");
    const Domain& dom = w.domain();
    if (m < 1 || m > dom.n()) throw DomainError("m out of range");
    EnvelopeProblem prob;
    prob.m = m;
    prob.C = C;
    prob.options = opt;
    prob.obstacle = ScalarField(w.domain_ptr());
    prob.dirichlet.assign(dom.size(), 0.0);
    prob.fixed.assign(dom.size(), 0);
    const KernelParams kp(w.p);
    const double h_clamp = 0.25 * dom.dx() * dom.dx() / w.scale2;
    for (std::size_t i = 0; i < dom.size(); ++i) {
        const double t = theta[i];
        if (t < 0.0 || t > 1.0 + 1e-12) throw DomainError("theta must lie in [0, 1]");
        if (w.psi.masked(i)) {
            if (t > 0.0) {
                prob.obstacle.set_neg_inf(i);
                if (dom.is_interior(i)) {
                    prob.fixed[i] = 1;
                    prob.dirichlet[i] = t * kernel_K_finite(kp, std::max(w.h[i], h_clamp));
                }
            } else {
                prob.obstacle.set(i, 0.0);  // 0 * inf = 0
            }
            continue;
        }
        prob.obstacle.set(i, std::min(0.0, t * w.psi[i] + C));
    }
    return prob;
}

struct SolveDiagnostics {
    int sweeps = 0;
    double residual = 0.0;
    double tol = 0.0;
    double omega = 1.0;
    std::vector<double> history;  // residual per sweep
    double max_increase = 0.0;    // largest pointwise increase in any sweep
    bool monotone = true;         // max_increase == 0
    std::size_t unknowns = 0;
    double admissibility_slack = 0.0;  // min over unknowns of v* - u (value units)
    double obstacle_violation = 0.0;   // max over unknowns of u - obstacle
    double seconds = 0.0;  // wall time; kept out of to_json so reports are reproducible

    json to_json() const {
        return {{"sweeps", sweeps},
                {"residual", residual},
                {"tol", tol},
                {"omega", omega},
                {"max_increase", max_increase},
                {"monotone", monotone},
                {"unknowns", unknowns},
                {"admissibility_slack", admissibility_slack},
                {"obstacle_violation", obstacle_violation}};
    }
};

struct EnvelopeSolution {
    ScalarField u;                // masked on Dirichlet nodes
    std::vector<double> values;   // raw iterate including Dirichlet values
    SolveDiagnostics diag;
};

namespace detail {

// Largest admissible centre value given the neighbours (v* of the sweep),
// for n = 1 or n = 2.
struct CentreUpdate {
    const Domain& dom;
    int m;
    std::ptrdiff_t s0, s1, s2 = 0, s3 = 0;

    explicit CentreUpdate(const Domain& d, int m_) : dom(d), m(m_), s0(d.stride(0)), s1(d.stride(1)) {
        if (d.n() == 2) {
            s2 = d.stride(2);
            s3 = d.stride(3);
        }
    }

    double operator()(const double* u, std::size_t i) const {
        const double* c = u + i;
        if (dom.n() == 1) return 0.25 * (c[s0] + c[-s0] + c[s1] + c[-s1]);
        const double a = 0.25 * (c[s0] + c[-s0] + c[s1] + c[-s1]);
        const double b = 0.25 * (c[s2] + c[-s2] + c[s3] + c[-s3]);
        auto cross = [c](std::ptrdiff_t p, std::ptrdiff_t q) {
            return 0.25 * (c[p + q] - c[p - q] - c[-p + q] + c[-p - q]);
        };
        const double re = 0.25 * (cross(s0, s2) + cross(s1, s3));
        const double im = 0.25 * (cross(s0, s3) - cross(s1, s2));
        const double mid = 0.5 * (a + b);
        if (m == 1) return mid;
        return mid - std::sqrt(0.25 * (a - b) * (a - b) + re * re + im * im);
    }
};

}  // namespace detail

// Over-relaxation only for the linear update (m = 1). The m >= 2 update is
// concave in the neighbours and SOR diverges on it, so it stays at 1.
inline double auto_omega(const Domain& dom, int m) {
    if (m >= 2) return 1.0;
    const double n_eff = 2.0 * dom.radius() / dom.dx();
    return 2.0 / (1.0 + std::sin(std::numbers::pi / n_eff));
}

// Projected over-relaxed Gauss-Seidel sweeps u <- min(obstacle, u + w (v* - u))
// in red-black order until the largest per-sweep change drops below tol.
inline EnvelopeSolution solve_envelope(const EnvelopeProblem& prob) {
    const auto t0 = std::chrono::steady_clock::now();
    const Domain& dom = prob.domain();
    const std::size_t total = dom.size();
    EnvelopeSolution sol;
    auto& diag = sol.diag;
    std::vector<double>& u = sol.values;
    u.assign(total, 0.0);
    std::vector<std::size_t> order[2];
    double lo = 0.0, hi = 0.0;
    for (auto i : dom.interior_nodes()) {
        if (prob.fixed[i]) {
            u[i] = prob.dirichlet[i];
        } else {
            u[i] = prob.obstacle[i];
            int parity = 0;
            for (int a = 0; a < dom.axes(); ++a) parity += dom.index_along(i, a);
            order[parity & 1].push_back(i);
        }
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
    }
    diag.unknowns = order[0].size() + order[1].size();
    diag.tol = prob.options.tol > 0.0 ? prob.options.tol : 1e-8 * std::max(hi - lo, 1e-300);
    diag.omega = prob.options.omega > 0.0 ? prob.options.omega : auto_omega(dom, prob.m);
    const double w = diag.omega;
    const detail::CentreUpdate vstar(dom, prob.m);
    const double* obs = prob.obstacle.values().data();
    for (int sweep = 1; sweep <= prob.options.max_sweeps; ++sweep) {
        double change = 0.0, increase = 0.0;
        for (const auto& list : order)
            for (auto i : list) {
                const double old = u[i];
                const double v = std::min(obs[i], old + w * (vstar(u.data(), i) - old));
                u[i] = v;
                change = std::max(change, std::abs(v - old));
                increase = std::max(increase, v - old);
            }
        diag.history.push_back(change);
        diag.max_increase = std::max(diag.max_increase, increase);
        diag.sweeps = sweep;
        diag.residual = change;
        if (change <= diag.tol) break;
    }
    diag.monotone = diag.max_increase <= 0.0;
    double slack = 1e300, viol = -1e300;
    for (const auto& list : order)
        for (auto i : list) {
            slack = std::min(slack, vstar(u.data(), i) - u[i]);
            viol = std::max(viol, u[i] - obs[i]);
        }
    diag.admissibility_slack = diag.unknowns ? slack : 0.0;
    diag.obstacle_violation = diag.unknowns ? viol : 0.0;
    sol.u = ScalarField(prob.obstacle.domain_ptr());
    for (std::size_t i = 0; i < total; ++i) {
        if (prob.fixed[i])
            sol.u.set_neg_inf(i);
        else
            sol.u.set(i, u[i]);
    }
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (diag.residual > diag.tol)
        throw NonConvergence("residual " + std::to_string(diag.residual) + " > tol " + std::to_string(diag.tol) +
                                 " after " + std::to_string(diag.sweeps) + " sweeps",
                             diag.history);
    return sol;
}

// Dyadic shells in h: [2^{-j-1}, 2^{-j}] for every j with 2^{-j-1} >= h_min.
struct Shell {
    int j = 0;
    double h_lo = 0.0, h_hi = 0.0;
};

inline std::vector<Shell> dyadic_shells(double h_min, double h_max = 1.0) {
    std::vector<Shell> out;
    for (int j = 0; j < 60; ++j) {
        const double hi = std::ldexp(1.0, -j), lo = std::ldexp(1.0, -j - 1);
        if (lo < h_min) break;
        if (hi > h_max * (1.0 + 1e-12)) continue;
        out.push_back({j, lo, hi});
    }
    return out;
}

inline bool in_shell(const Shell& s, double h) { return h >= s.h_lo && h < s.h_hi; }

struct StabilizationReport {
    std::vector<double> C_values;
    bool monotone_in_C = true;
    double max_monotonicity_violation = 0.0;  // max of u_{C_i} - u_{C_{i+1}}
    std::vector<Shell> shells;
    std::vector<std::vector<double>> gaps;  // gaps[pair][shell]: sup |u_{C_{i+1}} - u_{C_i}|
    std::vector<double> max_gap;            // per pair
    bool gap_nonincreasing = true;
    bool stabilized = false;
    double tol = 0.0;
    std::vector<SolveDiagnostics> solves;

    json to_json() const {
        json sh = json::array();
        for (std::size_t s = 0; s < shells.size(); ++s) {
            json row = {{"j", shells[s].j}, {"h_lo", shells[s].h_lo}, {"h_hi", shells[s].h_hi}};
            json g = json::array();
            for (const auto& pair : gaps) g.push_back(pair[s]);
            row["gaps"] = g;
            sh.push_back(row);
        }
        json sv = json::array();
        for (const auto& d : solves) sv.push_back(d.to_json());
        return {{"C_values", C_values},
                {"monotone_in_C", monotone_in_C},
                {"max_monotonicity_violation", max_monotonicity_violation},
                {"max_gap", max_gap},
                {"gap_nonincreasing", gap_nonincreasing},
                {"stabilized", stabilized},
                {"tol", tol},
                {"shells", sh},
                {"solves", sv}};
    }
};

struct StabilizedSolution {
    EnvelopeSolution limit;
    std::vector<ScalarField> per_C;
    StabilizationReport report;
};

inline StabilizedSolution solve_envelope_stabilized(const WeightData& w, const ScalarField& theta, int m,
                                                    const std::vector<double>& C_list, double tol,
                                                    const SolverOptions& opt = {}) {
    if (C_list.size() < 3) throw DomainError("C_list needs at least 3 values");
    for (std::size_t i = 1; i < C_list.size(); ++i)
        if (!(C_list[i] > C_list[i - 1])) throw DomainError("C_list must be increasing");
    const Domain& dom = w.domain();
    StabilizedSolution out;
    auto& rep = out.report;
    rep.C_values = C_list;
    rep.tol = tol;
    rep.shells = dyadic_shells(4.0 * w.h_floor);
    double mono_tol = 0.0;
    for (double C : C_list) {
        auto sol = solve_envelope(make_obstacle(w, theta, C, m, opt));
        mono_tol = std::max(mono_tol, 100.0 * sol.diag.tol);
        rep.solves.push_back(sol.diag);
        out.per_C.push_back(sol.u);
        out.limit = std::move(sol);
    }
    for (std::size_t k = 0; k + 1 < out.per_C.size(); ++k) {
        const auto& a = out.per_C[k];
        const auto& b = out.per_C[k + 1];
        std::vector<double> g(rep.shells.size(), 0.0);
        double mx = 0.0;
        for (auto i : dom.interior_nodes()) {
            if (a.masked(i) || b.masked(i)) continue;
            rep.max_monotonicity_violation = std::max(rep.max_monotonicity_violation, a[i] - b[i]);
            const double d = std::abs(b[i] - a[i]);
            for (std::size_t s = 0; s < rep.shells.size(); ++s)
                if (in_shell(rep.shells[s], w.h[i])) g[s] = std::max(g[s], d);
            if (w.h[i] >= 4.0 * w.h_floor) mx = std::max(mx, d);
        }
        rep.gaps.push_back(g);
        rep.max_gap.push_back(mx);
    }
    rep.monotone_in_C = rep.max_monotonicity_violation <= mono_tol;
    for (std::size_t k = 1; k < rep.max_gap.size(); ++k)
        if (rep.max_gap[k] > rep.max_gap[k - 1] + mono_tol) rep.gap_nonincreasing = false;
    rep.stabilized = true;
    for (double g : rep.gaps.back())
        if (!(g < tol)) rep.stabilized = false;
    if (!rep.monotone_in_C)
        throw SolverInconsistency("envelope decreased when C increased by up to " +
                                  std::to_string(rep.max_monotonicity_violation));
    return out;
}

}  // namespace mshenv
