#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "barrier.hpp"
#include "comparison.hpp"
#include "config.hpp"
#include "distance.hpp"
#include "envelope.hpp"
#include "theta.hpp"

namespace mshenv {

// Distance range to V covered by a shell, in length units.
inline std::pair<double, double> shell_radii(const WeightData& w, const Shell& s) {
    return {std::sqrt(s.h_lo * w.scale2), std::sqrt(s.h_hi * w.scale2)};
}

inline json shell_json(const WeightData& w, const Shell& s, std::size_t count) {
    const auto [r_lo, r_hi] = shell_radii(w, s);
    return {{"j", s.j}, {"h_lo", s.h_lo}, {"h_hi", s.h_hi}, {"r_lo", r_lo}, {"r_hi", r_hi}, {"count", count}};
}

inline std::vector<Shell> admissible_shells(const WeightData& w) { return dyadic_shells(4.0 * w.h_floor); }

// ---------------------------------------------------------------- (iv) ratio

struct RatioRow {
    Shell shell;
    std::size_t count = 0;
    double min_ratio = 0.0, max_ratio = 0.0, deviation = 0.0;
};

struct RatioProfile {
    std::vector<RatioRow> rows;
    double theta_min = 0.1;
    double tol = 0.1;
    double deepest_deviation = 0.0;
    bool deepest_ok = false;
    bool monotone = false;  // over the three deepest populated shells
    bool pass = false;
    std::string note;

    json to_json(const WeightData& w) const {
        json t = json::array();
        for (const auto& r : rows) {
            auto row = shell_json(w, r.shell, r.count);
            row["min_ratio"] = r.count ? json(r.min_ratio) : json(nullptr);
            row["max_ratio"] = r.count ? json(r.max_ratio) : json(nullptr);
            row["deviation"] = r.count ? json(r.deviation) : json(nullptr);
            t.push_back(row);
        }
        return {{"pass", pass},      {"theta_min", theta_min},   {"tol", tol},
                {"deepest_deviation", deepest_deviation}, {"deepest_ok", deepest_ok},
                {"monotone", monotone}, {"note", note},          {"table", t}};
    }
};

// u / (theta psi) per shell over unmasked nodes with theta >= theta_min.
// Passes when the deviation from 1 is < tol on the deepest populated shell
// and nonincreasing over the three deepest populated shells.
inline RatioProfile ratio_profile(const ScalarField& u, const WeightData& w, const ScalarField& theta,
                                  const std::vector<Shell>& shells, double theta_min = 0.1, double tol = 0.1) {
    const Domain& dom = w.domain();
    RatioProfile out;
    out.theta_min = theta_min;
    out.tol = tol;
    for (const auto& s : shells) {
        RatioRow row;
        row.shell = s;
        row.min_ratio = std::numeric_limits<double>::infinity();
        row.max_ratio = -row.min_ratio;
        for (auto i : dom.interior_nodes()) {
            if (u.masked(i) || w.psi.masked(i) || theta[i] < theta_min || !in_shell(s, w.h[i])) continue;
            const double denom = theta[i] * w.psi[i];
            if (std::abs(denom) < 1e-12) continue;
            const double r = u[i] / denom;
            row.min_ratio = std::min(row.min_ratio, r);
            row.max_ratio = std::max(row.max_ratio, r);
            ++row.count;
        }
        if (row.count) row.deviation = std::max(std::abs(row.max_ratio - 1.0), std::abs(1.0 - row.min_ratio));
        out.rows.push_back(row);
    }
    std::vector<double> devs;
    for (const auto& r : out.rows)
        if (r.count) devs.push_back(r.deviation);
    if (devs.empty()) throw DomainError("ratio_profile: no nodes with theta >= theta_min on the shells");
    out.deepest_deviation = devs.back();
    out.deepest_ok = devs.back() < tol;
    if (devs.size() < 3) {
        out.note = "fewer than three populated shells";
    } else {
        const std::size_t L = devs.size();
        out.monotone = devs[L - 2] <= devs[L - 3] && devs[L - 1] <= devs[L - 2];
    }
    out.pass = out.deepest_ok && out.monotone;
    return out;
}

// ---------------------------------------------------------- (iii) boundedness

// Interior nodes with theta = 0 at distance >= 2 * buffer from supp theta.
inline std::vector<std::uint8_t> probe_region(const ScalarField& theta, double buffer) {
    const Domain& dom = theta.domain();
    std::vector<std::uint8_t> supp(dom.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < dom.size(); ++i) {
        supp[i] = theta[i] > 0.0;
        any = any || supp[i];
    }
    std::vector<std::uint8_t> out(dom.size(), 0);
    if (!any) {
        for (auto i : dom.interior_nodes()) out[i] = 1;
        return out;
    }
    const auto d2 = squared_distance_transform(dom, supp);
    const double lim = 4.0 * buffer * buffer;
    for (auto i : dom.interior_nodes()) out[i] = !supp[i] && d2[i] >= lim;
    return out;
}

struct ProbeRow {
    Shell shell;
    std::size_t count = 0;
    double inf_u = 0.0, min_psi = 0.0;
};

struct BoundednessReport {
    bool applicable = false;
    bool inconclusive = false;
    bool pass = false;
    std::string note;
    double floor = 0.0;
    double sub_range = 0.0;
    double slope = 0.0;  // regression of inf u against min psi over populated shells
    double span = 0.0;   // kernel units covered by min psi
    double max_slope = 0.25;
    double min_span = 3.0;
    bool above_floor = false;
    std::vector<ProbeRow> rows;

    json to_json(const WeightData& w) const {
        json t = json::array();
        for (const auto& r : rows) {
            auto row = shell_json(w, r.shell, r.count);
            row["inf_u"] = r.count ? json(r.inf_u) : json(nullptr);
            row["min_psi"] = r.count ? json(r.min_psi) : json(nullptr);
            t.push_back(row);
        }
        return {{"applicable", applicable}, {"inconclusive", inconclusive}, {"pass", pass},
                {"note", note},             {"floor", floor},               {"sub_range", sub_range},
                {"slope", slope},           {"span", span},                 {"max_slope", max_slope},
                {"min_span", min_span},     {"above_floor", above_floor},   {"table", t}};
    }
};

// Range of a field over the probe region (unmasked nodes only).
inline double probe_range(const ScalarField& f, const std::vector<std::uint8_t>& region) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (region[i] && !f.masked(i)) {
            lo = std::min(lo, f[i]);
            hi = std::max(hi, f[i]);
        }
    return hi >= lo ? hi - lo : 0.0;
}

// inf u over {theta = 0} far from supp theta, per shell in h. Pass needs
// (a) every shell above floor = inf u on the shallowest populated shell
//     minus 3 * sub_range,
// (b) regression slope of inf u against min psi <= max_slope, and
// (c) min psi spanning >= min_span kernel units (otherwise inconclusive).
inline BoundednessReport boundedness_probe(const ScalarField& u, const ScalarField& theta, const WeightData& w,
                                           double buffer, double sub_range, double max_slope = 0.25,
                                           double min_span = 3.0) {
    const Domain& dom = w.domain();
    BoundednessReport out;
    out.sub_range = sub_range;
    out.max_slope = max_slope;
    out.min_span = min_span;
    const auto region = probe_region(theta, buffer);
    for (const auto& s : admissible_shells(w)) {
        ProbeRow row;
        row.shell = s;
        row.inf_u = std::numeric_limits<double>::infinity();
        row.min_psi = row.inf_u;
        for (auto i : dom.interior_nodes()) {
            if (!region[i] || u.masked(i) || w.psi.masked(i) || !in_shell(s, w.h[i])) continue;
            row.inf_u = std::min(row.inf_u, u[i]);
            row.min_psi = std::min(row.min_psi, w.psi[i]);
            ++row.count;
        }
        out.rows.push_back(row);
    }
    std::vector<const ProbeRow*> live;
    for (const auto& r : out.rows)
        if (r.count) live.push_back(&r);
    if (live.empty()) {
        out.note = "probe region empty near V; skipped";
        out.pass = true;
        return out;
    }
    // A region missing the deepest shell stays away from the polar set, where
    // boundedness is automatic.
    if (out.rows.back().count == 0) {
        out.note = "probe region does not reach the deepest shell; skipped";
        out.pass = true;
        return out;
    }
    out.applicable = true;
    out.floor = live.front()->inf_u - 3.0 * sub_range;
    out.above_floor = std::all_of(live.begin(), live.end(), [&](const ProbeRow* r) { return r->inf_u >= out.floor; });
    double ma = 0.0, mb = 0.0;
    for (auto* r : live) {
        ma += r->min_psi;
        mb += r->inf_u;
    }
    ma /= static_cast<double>(live.size());
    mb /= static_cast<double>(live.size());
    double sxy = 0.0, sxx = 0.0;
    for (auto* r : live) {
        sxy += (r->min_psi - ma) * (r->inf_u - mb);
        sxx += (r->min_psi - ma) * (r->min_psi - ma);
    }
    out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    out.span = live.front()->min_psi - live.back()->min_psi;
    out.inconclusive = live.size() < 3 || out.span < min_span;
    if (out.inconclusive) out.note = "min psi spans too few kernel units on the probe region";
    out.pass = !out.inconclusive && out.above_floor && out.slope <= max_slope;
    return out;
}

// ----------------------------------------------------------- (i) polar mass

// Points of V near the grid: projections onto V of nodes within one spacing
// of V, deduplicated and subsampled to at most max_centers.
inline std::vector<std::array<double, 4>> polar_centers(const WeightData& w, int max_centers) {
    const Domain& dom = w.domain();
    const int kk = w.k > 0 ? w.k : dom.n();
    std::vector<std::array<double, 4>> pts;
    for (auto i : dom.interior_nodes()) {
        if (w.h[i] * w.scale2 > dom.dx() * dom.dx()) continue;
        auto x = dom.point(i);
        for (int a = 0; a < 2 * kk; ++a) x[a] = 0.0;
        pts.push_back(x);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (static_cast<int>(pts.size()) <= max_centers) return pts;
    std::vector<std::array<double, 4>> out;
    const double step = static_cast<double>(pts.size()) / max_centers;
    for (int c = 0; c < max_centers; ++c) out.push_back(pts[static_cast<std::size_t>(c * step)]);
    return out;
}

// Ratios below this are solver noise (residual-level Laplacian mass).
inline constexpr double kMassRatioFloor = 1e-6;

struct MassRow {
    std::array<double, 4> center{};
    double r = 0.0;
    MassResult mass_u, mass_psi;
    double ratio = 0.0;
    double avg_theta_m = 0.0;
    double theta_spread = 0.0;
    bool locally_constant = false;
    bool inconclusive = false;
    bool ok = false;
};

struct PolarMassReport {
    std::vector<MassRow> rows;
    double tol = 0.15;
    int m = 1;
    std::size_t inconclusive = 0;
    bool applicable = false;  // at least one conclusive row
    bool pass = false;

    json to_json() const {
        json t = json::array();
        for (const auto& r : rows)
            t.push_back({{"center", r.center},
                         {"r", r.r},
                         {"mass_u", r.mass_u.mass},
                         {"mass_psi", r.mass_psi.mass},
                         {"nodes", r.mass_psi.nodes},
                         {"ratio", r.ratio},
                         {"avg_theta_m", r.avg_theta_m},
                         {"theta_spread", r.theta_spread},
                         {"locally_constant", r.locally_constant},
                         {"inconclusive", r.inconclusive},
                         {"ok", r.ok}});
        return {{"applicable", applicable}, {"pass", pass},
                {"tol", tol},               {"ratio_floor", kMassRatioFloor},
                {"m", m},                   {"inconclusive", inconclusive},
                {"table", t}};
    }
};

// mass_near(u) / mass_near(psi) against the average of theta^m on each ball.
// One-sided bound everywhere, two-sided where theta is locally constant.
inline PolarMassReport polar_mass_report(const ScalarField& u, const WeightData& w, const ScalarField& theta, int m,
                                         const std::vector<double>& radii, double tol = 0.15, int max_centers = 64) {
    const Domain& dom = w.domain();
    PolarMassReport out;
    out.tol = tol;
    out.m = m;
    for (double r : radii)
        if (r < 4.0 * dom.dx()) throw DomainError("polar mass radii must be >= 4 dx");
    for (const auto& c : polar_centers(w, max_centers))
        for (double r : radii) {
            MassRow row;
            row.center = c;
            row.r = r;
            // theta^m averaged over the polar set inside the ball, where psi's mass sits.
            double lo = 1e300, hi = -1e300, sum = 0.0;
            std::size_t cnt = 0;
            for_each_near(dom, c, r, [&](std::size_t i, double) {
                if (!dom.is_interior(i) || w.h[i] * w.scale2 > dom.dx() * dom.dx()) return;
                lo = std::min(lo, theta[i]);
                hi = std::max(hi, theta[i]);
                sum += std::pow(theta[i], m);
                ++cnt;
            });
            try {
                row.mass_u = mass_near(u, m, c, r);
                row.mass_psi = mass_near(w.psi, m, c, r);
            } catch (const DomainError&) {
                row.inconclusive = true;
            }
            row.avg_theta_m = cnt ? sum / static_cast<double>(cnt) : 0.0;
            row.theta_spread = cnt ? hi - lo : 0.0;
            row.locally_constant = row.theta_spread <= 1e-3;
            if (!row.inconclusive && !(row.mass_psi.mass > 1e-9)) row.inconclusive = true;
            if (row.inconclusive) {
                ++out.inconclusive;
            } else {
                row.ratio = row.mass_u.mass / row.mass_psi.mass;
                row.ok = row.ratio <= row.avg_theta_m * (1.0 + tol) + kMassRatioFloor;
                if (row.locally_constant)
                    row.ok = row.ok && std::abs(row.ratio - row.avg_theta_m) <= tol * row.avg_theta_m + kMassRatioFloor;
            }
            out.rows.push_back(row);
        }
    out.applicable = out.rows.size() > out.inconclusive;
    out.pass = out.applicable &&
               std::all_of(out.rows.begin(), out.rows.end(), [](const MassRow& r) { return r.inconclusive || r.ok; });
    return out;
}

// ------------------------------------------------------------ (ii) lower bound

struct LowerBoundReport {
    double max_theta = 0.0;
    double C_shift = 0.0;  // sup of (max theta) psi - u over unmasked nodes
    std::vector<std::pair<Shell, double>> per_shell;
    bool pass = false;

    json to_json(const WeightData& w) const {
        json t = json::array();
        for (const auto& [s, v] : per_shell) {
            auto row = shell_json(w, s, 0);
            row.erase("count");
            row["sup_gap"] = v;
            t.push_back(row);
        }
        return {{"pass", pass}, {"max_theta", max_theta}, {"C_shift", C_shift}, {"table", t}};
    }
};

// u >= (max theta) psi - C_shift with a finite C_shift.
inline LowerBoundReport lower_bound_check(const ScalarField& u, const WeightData& w, const ScalarField& theta) {
    const Domain& dom = w.domain();
    LowerBoundReport out;
    for (auto i : dom.interior_nodes()) out.max_theta = std::max(out.max_theta, theta[i]);
    out.C_shift = -std::numeric_limits<double>::infinity();
    const auto shells = admissible_shells(w);
    std::vector<double> per(shells.size(), -std::numeric_limits<double>::infinity());
    for (auto i : dom.interior_nodes()) {
        if (u.masked(i) || w.psi.masked(i)) continue;
        const double gap = out.max_theta * w.psi[i] - u[i];
        out.C_shift = std::max(out.C_shift, gap);
        for (std::size_t s = 0; s < shells.size(); ++s)
            if (in_shell(shells[s], w.h[i])) per[s] = std::max(per[s], gap);
    }
    for (std::size_t s = 0; s < shells.size(); ++s) out.per_shell.emplace_back(shells[s], per[s]);
    out.pass = std::isfinite(out.C_shift);
    return out;
}

// ------------------------------------------------------- singularity type

struct SingularityTypeReport {
    bool applicable = false;
    bool pass = false;
    double threshold = 0.0;  // max{1 - delta - gt, -delta/2}
    double growth = 0.0;     // per-shell growth of sup |u - theta psi| over the three deepest shells
    double allowed = 0.0;    // 0.1 * kernel increment per shell at the deepest shell
    std::vector<std::pair<Shell, std::pair<std::size_t, double>>> rows;
    std::string note;

    json to_json(const WeightData& w) const {
        json t = json::array();
        for (const auto& [s, cv] : rows) {
            auto row = shell_json(w, s, cv.first);
            row["sup_diff"] = cv.first ? json(cv.second) : json(nullptr);
            t.push_back(row);
        }
        return {{"applicable", applicable}, {"pass", pass},       {"threshold", threshold}, {"growth", growth},
                {"allowed", allowed},       {"note", note},       {"table", t}};
    }
};

// sup |u - theta psi| per shell. Applies when p > max{1 - delta - gt, -delta/2};
// passes when its growth per shell across the three deepest populated shells
// stays below a tenth of the kernel's own increment per shell there.
inline SingularityTypeReport singularity_type_check(const ScalarField& u, const WeightData& w,
                                                    const ScalarField& theta, double delta, double gamma_tilde) {
    const Domain& dom = w.domain();
    SingularityTypeReport out;
    out.threshold = std::max(1.0 - delta - gamma_tilde, -0.5 * delta);
    out.applicable = w.p > out.threshold;
    if (!out.applicable) {
        out.note = "p <= max{1 - delta - gt, -delta/2}; not applicable";
        out.pass = true;
        return out;
    }
    for (const auto& s : admissible_shells(w)) {
        std::size_t cnt = 0;
        double sup = 0.0;
        for (auto i : dom.interior_nodes()) {
            if (u.masked(i) || w.psi.masked(i) || !in_shell(s, w.h[i])) continue;
            sup = std::max(sup, std::abs(u[i] - theta[i] * w.psi[i]));
            ++cnt;
        }
        out.rows.push_back({s, {cnt, sup}});
    }
    std::vector<std::pair<Shell, double>> live;
    for (const auto& [s, cv] : out.rows)
        if (cv.first) live.emplace_back(s, cv.second);
    if (live.size() < 3) {
        out.note = "fewer than three populated shells";
        return out;
    }
    const std::size_t L = live.size();
    out.growth = 0.5 * (live[L - 1].second - live[L - 3].second);
    const KernelParams kp(w.p);
    const double h = live[L - 1].first.h_lo;
    out.allowed = 0.1 * (kernel_K_finite(kp, 2.0 * h) - kernel_K_finite(kp, h));
    out.pass = out.growth <= out.allowed;
    return out;
}

// --------------------------------------------------------------- sandwich

struct SandwichReport {
    double c1 = 0.0;          // shift making F an admissible competitor
    CheckReport lower;        // margin = u - (F - c1)
    double s_upper = 0.0;     // psi_bar = G + s_upper
    SuperweightReport superweight;
    CheckReport upper;        // margin = psi_bar - (u - 1)
    std::optional<DominanceReport> dominance;  // with the comparison hypotheses
    std::string dominance_error;
    bool pass = false;

    json to_json() {
        return {{"pass", pass},
                {"c1", c1},
                {"lower", lower.to_json()},
                {"s_upper", s_upper},
                {"superweight", superweight.to_json()},
                {"upper", upper.to_json()},
                {"dominance", dominance ? dominance->to_json() : json(nullptr)},
                {"dominance_error", dominance_error}};
    }
};

// Lower side: F - c1 <= u with c1 the least shift putting F below the
// obstacle on unknowns, below the Dirichlet data on fixed nodes and below 0
// on ghost nodes. Upper side: u - 1 <= psi_bar = G + s with s chosen so
// psi_bar > -1 within 2 dx of the boundary. The gate is the pointwise
// comparison on both sides plus superweight_check; dominance_check is run
// as well to report whether its hypotheses hold.
inline SandwichReport sandwich_check(const EnvelopeProblem& prob, const ScalarField& u, const ScalarField& F,
                                     const ScalarField& G, const EllipticOperator& op, double lower_tol,
                                     double upper_tol) {
    const Domain& dom = prob.domain();
    SandwichReport out;
    double c1 = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if (F.masked(i)) continue;
        if (!dom.is_interior(i))
            c1 = std::max(c1, F[i]);
        else if (prob.fixed[i])
            c1 = std::max(c1, F[i] - prob.dirichlet[i]);
        else if (!prob.obstacle.masked(i))
            c1 = std::max(c1, F[i] - prob.obstacle[i]);
    }
    out.c1 = c1;
    out.lower.name = "sandwich_lower";
    out.lower.params = {{"c1", c1}, {"tol", lower_tol}};
    for (auto i : dom.interior_nodes()) {
        if (F.masked(i) || u.masked(i)) {
            ++out.lower.excluded;
            continue;
        }
        const double margin = u[i] - (F[i] - c1);
        out.lower.record(i, 0.0, margin, margin >= -lower_tol);
    }
    double gmin = std::numeric_limits<double>::infinity();
    for (auto i : dom.interior_nodes())
        if (!G.masked(i) && dom.distance_to_boundary(i) < 2.0 * dom.dx()) gmin = std::min(gmin, G[i]);
    // Strictly above -1 on the boundary band, so {psi_bar <= -1} stays 2 dx inside.
    out.s_upper = -1.0 - gmin + 1e-9 * std::max(1.0, std::abs(gmin));
    ScalarField psi_bar(G.domain_ptr()), phi(u.domain_ptr());
    for (std::size_t i = 0; i < dom.size(); ++i) {
        if (G.masked(i))
            psi_bar.set_neg_inf(i);
        else
            psi_bar.set(i, G[i] + out.s_upper);
        if (u.masked(i))
            phi.set_neg_inf(i);
        else
            phi.set(i, u[i] - 1.0);
    }
    out.superweight = superweight_check(psi_bar, op, upper_tol);
    out.upper.name = "sandwich_upper";
    out.upper.params = {{"s_upper", out.s_upper}, {"tol", upper_tol}};
    for (auto i : dom.interior_nodes()) {
        if (psi_bar.masked(i) || phi.masked(i)) {
            ++out.upper.excluded;
            continue;
        }
        const double margin = psi_bar[i] - phi[i];
        out.upper.record(i, 0.0, margin, margin >= -upper_tol);
    }
    try {
        out.dominance = dominance_check(phi, psi_bar, 0.0, upper_tol);
    } catch (const Error& e) {
        out.dominance_error = e.what();
    }
    out.pass = out.lower.pass && out.superweight.pass && out.upper.pass;
    return out;
}

// ------------------------------------------------------------ run_scenario

struct VerificationReport {
    json data = json::object();
    std::vector<std::pair<std::string, bool>> gates;  // applicable pass/fail lines
    bool pass() const {
        return std::all_of(gates.begin(), gates.end(), [](const auto& g) { return g.second; });
    }
};

// Every artefact of a scenario run, for field output and further checks.
struct ScenarioRun {
    ScenarioConfig cfg;
    DomainPtr dom;
    WeightData w;
    ScalarField theta;
    std::optional<EllipticOperator> op;
    std::optional<BarrierResult> sub, super;
    std::optional<StabilizedSolution> env;
    VerificationReport report;
};

namespace detail {

// Balls must reach well past the polar mask to see any mass.
inline std::vector<double> mass_radii(const ScenarioConfig& cfg, const WeightData& w) {
    if (!cfg.mass_radii.empty()) return cfg.mass_radii;
    const double r0 = std::max(4.0 * w.domain().dx(), 2.0 * w.mask_radius());
    return {r0, 1.5 * r0, 2.0 * r0};
}

inline SolverOptions solver_options(const ScenarioConfig& cfg) {
    SolverOptions o;
    o.tol = cfg.solver_tol;
    o.max_sweeps = cfg.max_sweeps;
    o.omega = cfg.omega;
    return o;
}

}  // namespace detail

// Stage 1: weight plus the three hypothesis checkers.
inline void stage_weight(ScenarioRun& run) {
    const auto& cfg = run.cfg;
    run.dom = make_domain(cfg.n, cfg.R, cfg.N, cfg.shape);
    run.w = build_weight({cfg.n, cfg.k}, cfg.m, run.dom, cfg.floor_factor);
    run.theta = make_theta(run.dom, cfg.theta);
    auto& rep = run.report;
    auto d = check_delta_regular(run.w, cfg.m, cfg.eps, cfg.delta, cfg.check_tol);
    auto c1 = check_condition_one(run.w, cfg.m, cfg.c, cfg.gamma_tilde, cfg.check_tol);
    run.op = default_operator(run.w, cfg.m, cfg.eta, cfg.barrier_tol);
    auto c2 = check_condition_two(run.w, *run.op, cfg.c, cfg.gamma_tilde, cfg.check_tol);
    rep.data["weight"] = {{"p", run.w.p},
                          {"k", run.w.k},
                          {"h_floor", run.w.h_floor},
                          {"mask_radius", run.w.mask_radius()},
                          {"scale2", run.w.scale2},
                          {"shift", run.w.shift},
                          {"delta_regular", d.to_json()},
                          {"condition_one", c1.to_json()},
                          {"condition_two", c2.to_json()}};
    rep.gates.emplace_back("delta_regular", d.pass);
    rep.gates.emplace_back("condition_one", c1.pass);
    rep.gates.emplace_back("condition_two", c2.pass);
}

// Stage 2: sub- and supersolution barriers.
inline void stage_barriers(ScenarioRun& run) {
    const auto& cfg = run.cfg;
    const double gamma = cfg.gamma > 0.0 ? cfg.gamma : default_gamma(cfg.gamma_tilde, cfg.delta);
    auto spec = make_barrier_spec(run.w.p, gamma, cfg.gamma_tilde, cfg.delta, cfg.a);
    spec.buffer = cfg.buffer;
    spec.theta_chain = make_cutoff_chain(run.theta, spec.ell, cfg.buffer);
    run.sub = build_subsolution(run.w, spec, cfg.m, cfg.barrier_tol);
    run.super = build_supersolution(run.w, run.theta, gamma, cfg.super_a, *run.op, cfg.barrier_tol);
    run.report.data["barriers"] = {{"gamma", gamma},
                                   {"ell", spec.ell},
                                   {"q", spec.q},
                                   {"a", spec.a},
                                   {"chain_nested", chain_nested(spec.theta_chain)},
                                   {"subsolution", run.sub->report.to_json()},
                                   {"supersolution", run.super->report.to_json()}};
    run.report.gates.emplace_back("subsolution", run.sub->report.pass);
    run.report.gates.emplace_back("supersolution", run.super->report.pass);
}

// Stage 3: C-stabilized envelope.
inline void stage_envelope(ScenarioRun& run) {
    const auto& cfg = run.cfg;
    run.env = solve_envelope_stabilized(run.w, run.theta, cfg.m, cfg.C_list, cfg.stab_tol,
                                        detail::solver_options(cfg));
    run.report.data["envelope"] = run.env->report.to_json();
    run.report.gates.emplace_back("stabilized", run.env->report.stabilized);
}

// Stage 4: conclusions (i)-(iv), the singularity type and the sandwich.
inline void stage_verify(ScenarioRun& run) {
    const auto& cfg = run.cfg;
    const auto& u = run.env->limit.u;
    const auto& w = run.w;
    auto& rep = run.report;
    rep.data["thresholds"] = {{"ratio_tol", cfg.ratio_tol},
                              {"theta_min", cfg.theta_min},
                              {"mass_tol", cfg.mass_tol},
                              {"probe_max_slope", 0.25},
                              {"probe_min_span", 3.0},
                              {"stab_tol", cfg.stab_tol}};

    auto mass = polar_mass_report(u, w, run.theta, cfg.m, detail::mass_radii(cfg, w), cfg.mass_tol,
                                  cfg.max_centers);
    rep.data["i_polar_mass"] = mass.to_json();
    if (mass.applicable) rep.gates.emplace_back("i_polar_mass", mass.pass);

    auto lb = lower_bound_check(u, w, run.theta);
    rep.data["ii_lower_bound"] = lb.to_json(w);
    rep.gates.emplace_back("ii_lower_bound", lb.pass);

    const auto region = probe_region(run.theta, cfg.buffer);
    auto probe = boundedness_probe(u, run.theta, w, cfg.buffer, probe_range(run.sub->field, region));
    rep.data["iii_boundedness"] = probe.to_json(w);
    if (probe.applicable) rep.gates.emplace_back("iii_boundedness", probe.pass);

    try {
        auto ratio = ratio_profile(u, w, run.theta, admissible_shells(w), cfg.theta_min, cfg.ratio_tol);
        rep.data["iv_ratio"] = ratio.to_json(w);
        rep.gates.emplace_back("iv_ratio", ratio.pass);
    } catch (const DomainError& e) {
        rep.data["iv_ratio"] = {{"applicable", false}, {"note", e.what()}};
    }

    auto st = singularity_type_check(u, w, run.theta, cfg.delta, cfg.gamma_tilde);
    rep.data["singularity_type"] = st.to_json(w);
    if (st.applicable) rep.gates.emplace_back("singularity_type", st.pass);

    const auto prob = make_obstacle(w, run.theta, cfg.C_list.back(), cfg.m, detail::solver_options(cfg));
    auto sw = sandwich_check(prob, u, run.sub->field, run.super->field, *run.op,
                             100.0 * run.env->limit.diag.tol, cfg.barrier_tol);
    rep.data["sandwich"] = sw.to_json();
    rep.gates.emplace_back("sandwich", sw.pass);
}

inline ScenarioRun run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioRun run;
    run.cfg = cfg;
    run.report.data["config"] = cfg.to_json();
    stage_weight(run);
    stage_barriers(run);
    stage_envelope(run);
    stage_verify(run);
    json g = json::object();
    for (const auto& [name, ok] : run.report.gates) g[name] = ok;
    run.report.data["gates"] = g;
    run.report.data["pass"] = run.report.pass();
    return run;
}

}  // namespace mshenv
