#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "field.hpp"
#include "report.hpp"

namespace mshenv {

// M_s(phi) = max of phi over {psi <= s}, levels in decreasing order.
struct SublevelProfile {
    std::vector<double> s_values;
    std::vector<double> M_values;  // -inf where the sublevel is empty or phi is masked on it
    std::vector<std::size_t> counts;
    std::vector<bool> empty;

    std::size_t size() const { return s_values.size(); }

    json to_json() const {
        json rows = json::array();
        for (std::size_t i = 0; i < size(); ++i)
            rows.push_back({{"s", s_values[i]}, {"M", empty[i] ? json(nullptr) : json(M_values[i])},
                            {"count", counts[i]}});
        return rows;
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DomainError("cannot write " + path);
        out.precision(17);
        out << "s,M_s,count\n";
        for (std::size_t i = 0; i < size(); ++i)
            out << s_values[i] << ',' << (empty[i] ? std::string("nan") : std::to_string(M_values[i])) << ','
                << counts[i] << '\n';
    }
};

namespace detail {

// Interior unmasked nodes sorted by psi ascending.
inline std::vector<std::size_t> sorted_by_value(const ScalarField& psi) {
    const Domain& dom = psi.domain();
    std::vector<std::size_t> idx;
    for (auto i : dom.interior_nodes())
        if (!psi.masked(i)) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return psi[a] < psi[b]; });
    return idx;
}

}  // namespace detail

// Replaces each level by the largest attained psi value <= s. The sublevel
// set is unchanged and M_s(psi) = s holds exactly. Levels below min psi are
// dropped, duplicates merged.
inline std::vector<double> snap_levels(const ScalarField& psi, std::vector<double> s_list) {
    const auto idx = detail::sorted_by_value(psi);
    std::vector<double> vals(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = psi[idx[k]];
    std::vector<double> out;
    for (double s : s_list) {
        auto it = std::upper_bound(vals.begin(), vals.end(), s);
        if (it == vals.begin()) continue;
        out.push_back(*std::prev(it));
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// `count` levels geometric in |s| from -2 down to the 0.5-percentile of psi's
// unmasked interior values. When psi dips below -2 only on a small set, the
// percentile is taken over {psi < -1} instead.
inline std::vector<double> default_levels(const ScalarField& psi, int count = 12) {
    const auto idx = detail::sorted_by_value(psi);
    if (idx.empty()) throw DomainError("psi has no unmasked interior nodes");
    auto percentile = [&](std::size_t n) { return psi[idx[static_cast<std::size_t>(0.005 * static_cast<double>(n - 1))]]; };
    double deep = percentile(idx.size());
    if (!(deep < -2.0)) {
        const auto below = static_cast<std::size_t>(
            std::lower_bound(idx.begin(), idx.end(), -1.0, [&](std::size_t i, double v) { return psi[i] < v; }) -
            idx.begin());
        if (below > 0) deep = percentile(below);
    }
    if (!(deep < -2.0)) throw DomainError("psi does not reach below -2; no sublevel grid");
    std::vector<double> s;
    const double ratio = std::pow(-deep / 2.0, 1.0 / (count - 1));
    for (int i = 0; i < count; ++i) s.push_back(-2.0 * std::pow(ratio, i));
    return s;
}

inline SublevelProfile sublevel_max(const ScalarField& phi, const ScalarField& psi, std::vector<double> s_list,
                                    bool snap = true) {
    if (s_list.empty()) throw DomainError("sublevel_max needs at least one level");
    if (snap) s_list = snap_levels(psi, s_list);
    std::sort(s_list.begin(), s_list.end(), std::greater<>());
    const auto idx = detail::sorted_by_value(psi);
    std::vector<double> prefix(idx.size());
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (!phi.masked(idx[k])) run = std::max(run, phi[idx[k]]);
        prefix[k] = run;
    }
    SublevelProfile prof;
    for (double s : s_list) {
        const auto cnt = static_cast<std::size_t>(
            std::upper_bound(idx.begin(), idx.end(), s, [&](double v, std::size_t i) { return v < psi[i]; }) -
            idx.begin());
        prof.s_values.push_back(s);
        prof.counts.push_back(cnt);
        const bool empty = cnt == 0 || !std::isfinite(prefix[cnt - 1]);
        prof.empty.push_back(empty);
        prof.M_values.push_back(empty ? kNegInf : prefix[cnt - 1]);
    }
    return prof;
}

struct ConvexityCertificate {
    bool convex = true;
    double worst_second_difference = 0.0;  // min over interior levels of the slope jump, relative to |M|
    bool quotients_monotone = true;
    double worst_quotient_drop = 0.0;  // min of Q(s', t) - Q(s, t) for s < s', relative
    double tol = 0.0;

    json to_json() const {
        return {{"convex", convex},
                {"worst_second_difference", worst_second_difference},
                {"quotients_monotone", quotients_monotone},
                {"worst_quotient_drop", worst_quotient_drop},
                {"tol", tol}};
    }
};

// Discrete convexity of s -> M_s on the nonempty levels: consecutive slopes
// nondecreasing up to tol * |M|, and the difference quotient
// Q(s, t) = (M_s - M_t) / (s - t) increasing in each argument.
inline ConvexityCertificate convexity_certificate(const SublevelProfile& prof, double tol) {
    std::vector<double> s, M;
    for (std::size_t i = prof.size(); i-- > 0;)
        if (!prof.empty[i]) {
            s.push_back(prof.s_values[i]);
            M.push_back(prof.M_values[i]);
        }
    ConvexityCertificate c;
    c.tol = tol;
    auto Q = [&](std::size_t a, std::size_t b) { return (M[a] - M[b]) / (s[a] - s[b]); };
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double jump = Q(i + 1, i) - Q(i, i - 1);
        const double rel = jump / std::max(std::abs(M[i]), 1e-300);
        c.worst_second_difference = std::min(c.worst_second_difference, rel);
        if (jump < -tol * std::abs(M[i])) c.convex = false;
    }
    for (std::size_t t = 0; t < s.size(); ++t)
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            if (i == t || i + 1 == t) continue;
            const double drop = Q(i + 1, t) - Q(i, t);
            const double scale = std::max({std::abs(M[i]), std::abs(M[i + 1]), std::abs(M[t])});
            c.worst_quotient_drop = std::min(c.worst_quotient_drop, drop / std::max(scale, 1e-300));
            if (drop < -tol * scale) c.quotients_monotone = false;
        }
    return c;
}

struct SlopeEstimate {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t levels_used = 0;
    ConvexityCertificate certificate;
    double best_feasible_gamma = 0.0;

    json to_json() const {
        return {{"slope", slope},
                {"intercept", intercept},
                {"levels_used", levels_used},
                {"certificate", certificate.to_json()},
                {"best_feasible_gamma", best_feasible_gamma}};
    }
};

// Least-squares slope of M_s against s over the deepest max(4, L/4) nonempty
// levels, with the difference-quotient certificate over all levels.
inline SlopeEstimate slope_estimate(const SublevelProfile& prof, double cert_tol = 1e-6) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < prof.size(); ++i)
        if (!prof.empty[i]) live.push_back(i);
    if (live.size() < 4) throw DomainError("slope_estimate needs at least 4 nonempty levels");
    // Levels are decreasing, so the deepest are at the back.
    const std::size_t use = std::max<std::size_t>(4, live.size() / 4);
    double ms = 0.0, mm = 0.0;
    for (std::size_t k = live.size() - use; k < live.size(); ++k) {
        ms += prof.s_values[live[k]];
        mm += prof.M_values[live[k]];
    }
    ms /= static_cast<double>(use);
    mm /= static_cast<double>(use);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = live.size() - use; k < live.size(); ++k) {
        const double ds = prof.s_values[live[k]] - ms;
        sxy += ds * (prof.M_values[live[k]] - mm);
        sxx += ds * ds;
    }
    SlopeEstimate est;
    est.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    est.intercept = mm - est.slope * ms;
    est.levels_used = use;
    est.certificate = convexity_certificate(prof, cert_tol);
    return est;
}

// Grid surrogate of max{gamma >= 0 : phi <= gamma psi + C}: the largest gamma
// on a step grid in [0, gamma_max] for which the constant needed on the deep
// sublevel {psi <= s_deep} does not exceed the constant needed on the band
// {s_deep < psi <= s_shallow}.
inline double best_feasible_gamma(const ScalarField& phi, const ScalarField& psi, double s_shallow, double s_deep,
                                  double gamma_max = 4.0, double step = 0.01) {
    const auto idx = detail::sorted_by_value(psi);
    double best = 0.0;
    for (int k = 0; k * step <= gamma_max + 1e-12; ++k) {
        const double g = k * step;
        double deep = -std::numeric_limits<double>::infinity(), shallow = deep;
        for (auto i : idx) {
            if (psi[i] > s_shallow) break;
            if (phi.masked(i)) continue;
            const double v = phi[i] - g * psi[i];
            if (psi[i] <= s_deep)
                deep = std::max(deep, v);
            else
                shallow = std::max(shallow, v);
        }
        if (deep <= shallow + 1e-12 * std::max(1.0, std::abs(shallow))) best = g;
    }
    return best;
}

// phi against psi: profile over default levels plus slope and feasible gamma.
inline SlopeEstimate compare_singularity(const ScalarField& phi, const ScalarField& psi, int levels = 12,
                                         double cert_tol = 1e-6) {
    const auto prof = sublevel_max(phi, psi, default_levels(psi, levels));
    auto est = slope_estimate(prof, cert_tol);
    std::vector<double> live;
    for (std::size_t i = 0; i < prof.size(); ++i)
        if (!prof.empty[i]) live.push_back(prof.s_values[i]);
    const std::size_t use = std::max<std::size_t>(4, live.size() / 4);
    est.best_feasible_gamma = best_feasible_gamma(phi, psi, live.front(), live[live.size() - use]);
    return est;
}

struct DominanceReport {
    bool pass = false;
    double slope = 0.0;       // of phi against psi_bar
    double phi_max = 0.0;
    CheckReport nodes;        // margin = psi_bar + shift - phi

    json to_json() {
        return {{"pass", pass}, {"slope", slope}, {"phi_max", phi_max}, {"nodes", nodes.to_json()}};
    }
};

// phi <= psi_bar + shift (up to tol) at every node where psi_bar is
// unmasked, given the hypotheses max phi <= -1 + tol and
// slope(phi vs psi_bar) >= 1 - slope_tol. The slope is a regression over a
// finite level grid, hence its own tolerance.
inline DominanceReport dominance_check(const ScalarField& phi, const ScalarField& psi_bar, double shift, double tol,
                                       double slope_tol = 0.05) {
    const Domain& dom = psi_bar.domain();
    DominanceReport rep;
    rep.phi_max = phi.finite_range().second;
    if (rep.phi_max > -1.0 + tol)
        throw HypothesisViolation("dominance: max phi = " + std::to_string(rep.phi_max) + " > -1");
    rep.slope = compare_singularity(phi, psi_bar).slope;
    if (rep.slope < 1.0 - slope_tol)
        throw HypothesisViolation("dominance: slope of phi against psi_bar = " + std::to_string(rep.slope) +
                                  " < 1 (singularity of phi weaker than psi_bar)");
    rep.nodes.name = "dominance";
    rep.nodes.params = {{"shift", shift}, {"tol", tol}, {"slope_tol", slope_tol}};
    for (auto i : dom.interior_nodes()) {
        if (psi_bar.masked(i)) {
            ++rep.nodes.excluded;
            continue;
        }
        const double margin = phi.masked(i) ? std::numeric_limits<double>::infinity() : psi_bar[i] + shift - phi[i];
        rep.nodes.record(i, 0.0, margin, margin >= -tol);
    }
    rep.pass = rep.nodes.pass;
    return rep;
}

}  // namespace mshenv
