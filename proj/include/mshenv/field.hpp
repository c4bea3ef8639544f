#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "cone.hpp"
#include "domain.hpp"
#include "kernel.hpp"

namespace mshenv {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Real values on every grid node (interior and ghost), with a polar mask.
// Masked nodes hold the tag -inf; unmasked nodes are finite.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(DomainPtr dom, double fill = 0.0)
        : dom_(std::move(dom)), v_(dom_->size(), fill), mask_(dom_->size(), 0) {}

    // Evaluates f at every node from its coordinates.
    static ScalarField from_function(DomainPtr dom, const std::function<double(const std::array<double, 4>&)>& f) {
        ScalarField out(dom);
        for (std::size_t i = 0; i < dom->size(); ++i) out.v_[i] = f(dom->point(i));
        return out;
    }

    const Domain& domain() const { return *dom_; }
    const DomainPtr& domain_ptr() const { return dom_; }
    std::size_t size() const { return v_.size(); }

    bool masked(std::size_t i) const { return mask_[i] != 0; }
    ExtendedReal at(std::size_t i) const {
        return masked(i) ? ExtendedReal::minus_infinity() : ExtendedReal(v_[i]);
    }
    // Raw access: finite on unmasked nodes, -inf on masked ones.
    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    void set(std::size_t i, double x) {
        v_[i] = x;
        mask_[i] = 0;
    }
    void set_neg_inf(std::size_t i) {
        v_[i] = kNegInf;
        mask_[i] = 1;
    }
    void set(std::size_t i, const ExtendedReal& x) {
        if (x.is_neg_inf())
            set_neg_inf(i);
        else
            set(i, x.value());
    }

    bool any_masked() const {
        return std::any_of(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; });
    }

    // min / max over unmasked nodes, optionally interior only.
    std::pair<double, double> finite_range(bool interior_only = true) const {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < v_.size(); ++i) {
            if (masked(i) || (interior_only && !dom_->is_interior(i))) continue;
            lo = std::min(lo, v_[i]);
            hi = std::max(hi, v_[i]);
        }
        return {lo, hi};
    }

private:
    DomainPtr dom_;
    std::vector<double> v_;
    std::vector<std::uint8_t> mask_;
};

// Complex Hessian [d^2 f / dz_j dzbar_k] at node i, reading values through
// `get(j)`. The centre value enters each diagonal entry with coefficient
// -1/dx^2; mixed terms use 4-point cross differences.
template <class Get>
HermitianForm hessian_with(const Domain& dom, std::size_t i, Get&& get) {
    const double inv = 1.0 / (dom.dx() * dom.dx());
    const double c0 = get(i);
    auto d2 = [&](int a) {
        const auto s = dom.stride(a);
        return (get(i + s) - 2.0 * c0 + get(i - s)) * inv;
    };
    auto mixed = [&](int a, int b) {
        const auto sa = dom.stride(a), sb = dom.stride(b);
        return (get(i + sa + sb) - get(i + sa - sb) - get(i - sa + sb) + get(i - sa - sb)) * (0.25 * inv);
    };
    HermitianForm H(dom.n());
    H(0, 0) = 0.25 * (d2(0) + d2(1));
    if (dom.n() == 2) {
        H(1, 1) = 0.25 * (d2(2) + d2(3));
        const cplx h12(0.25 * (mixed(0, 2) + mixed(1, 3)), 0.25 * (mixed(0, 3) - mixed(1, 2)));
        H(0, 1) = h12;
        H(1, 0) = std::conj(h12);
    }
    return H;
}

inline HermitianForm hessian_from_values(const Domain& dom, const double* f, std::size_t i) {
    return hessian_with(dom, i, [f](std::size_t j) { return f[j]; });
}

// Stencil availability: interior node whose stencil avoids masked nodes
// and, unless `allow_ghost`, ghost nodes as well.
inline bool stencil_clear(const ScalarField& f, std::size_t i, bool allow_ghost = false) {
    const Domain& dom = f.domain();
    if (!dom.is_interior(i) || f.masked(i)) return false;
    for (auto off : dom.stencil_offsets()) {
        const std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off);
        if (f.masked(j)) return false;
        if (!allow_ghost && !dom.is_interior(j)) return false;
    }
    return true;
}

inline HermitianForm complex_hessian(const ScalarField& f, std::size_t node, bool allow_ghost = false) {
    if (!stencil_clear(f, node, allow_ghost))
        throw StencilUnavailable("Hessian stencil at node " + std::to_string(node) +
                                 " touches the polar mask or the boundary");
    return hessian_from_values(f.domain(), f.values().data(), node);
}

inline double hessian_measure_density(const ScalarField& f, int m, std::size_t node, bool allow_ghost = false) {
    return sigma_k_form(complex_hessian(f, node, allow_ghost), m);
}

inline ScalarField canonical_cutoff(const ScalarField& f, double s) {
    ScalarField out(f.domain_ptr());
    for (std::size_t i = 0; i < f.size(); ++i) out.set(i, f.masked(i) ? s : std::max(f[i], s));
    return out;
}

// Visits nodes within Euclidean distance r of point c; the callback gets
// (node, distance).
template <class Fn>
void for_each_near(const Domain& dom, const std::array<double, 4>& c, double r, Fn&& fn) {
    const int d = dom.axes();
    std::array<int, 4> lo{}, hi{};
    for (int a = 0; a < d; ++a) {
        const double W = dom.half_width(), dx = dom.dx();
        lo[a] = std::max(0, static_cast<int>(std::floor((c[a] - r + W) / dx - 0.5)));
        hi[a] = std::min(dom.nodes_per_axis() - 1, static_cast<int>(std::ceil((c[a] + r + W) / dx - 0.5)));
        if (lo[a] > hi[a]) return;
    }
    std::array<int, 4> k = lo;
    for (;;) {
        double dist2 = 0.0;
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a) {
            const double x = dom.coord_of_index(k[a]) - c[a];
            dist2 += x * x;
            idx += static_cast<std::size_t>(k[a]) * static_cast<std::size_t>(dom.stride(a));
        }
        if (dist2 <= r * r) fn(idx, std::sqrt(dist2));
        int a = d - 1;
        while (a >= 0 && ++k[a] > hi[a]) {
            k[a] = lo[a];
            --a;
        }
        if (a < 0) break;
    }
}

struct MassResult {
    double mass = 0.0;
    double level = 0.0;        // cutoff level s(r)
    std::size_t nodes = 0;     // nodes summed
    std::size_t skipped = 0;   // nodes without a usable stencil
};

// Regularized Hessian mass of f near a point: density of max(f, s) summed
// over the ball of radius r, with s the minimum of f on the annulus
// r/2 <= |x - c| <= r. Then max(f, s) = f near the summation boundary, so
// for m = 1 the sum is the flux of f through it: the polar mass inside plus
// the regular mass, which vanishes where f is harmonic.
inline MassResult mass_near(const ScalarField& f, int m, const std::array<double, 4>& center, double r) {
    const Domain& dom = f.domain();
    if (r < 2.0 * dom.dx()) throw DomainError("mass_near radius must be >= 2 dx");
    if (m < 1 || m > dom.n()) throw DomainError("mass_near: m out of range");
    double level = std::numeric_limits<double>::infinity();
    bool any = false;
    for_each_near(dom, center, r + dom.dx(), [&](std::size_t i, double dist) {
        if (dist >= 0.5 * r && dist <= r + dom.dx() && !f.masked(i)) {
            level = std::min(level, f[i]);
            any = true;
        }
    });
    MassResult out;
    if (!any) throw DomainError("mass_near: empty annulus");
    out.level = level;
    const double s = out.level;
    const double vol = std::pow(dom.dx(), 2 * dom.n());
    const auto& offs = dom.stencil_offsets();
    for_each_near(dom, center, r, [&](std::size_t i, double) {
        if (!dom.is_interior(i)) {
            ++out.skipped;
            return;
        }
        // Evaluate the cutoff on the stencil only.
        bool ok = true;
        for (auto off : offs) {
            const std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off);
            if (!dom.is_interior(j)) ok = false;
        }
        if (!ok) {
            ++out.skipped;
            return;
        }
        auto cut = [&](std::size_t j) { return f.masked(j) ? s : std::max(f[j], s); };
        const HermitianForm H = hessian_with(dom, i, cut);
        out.mass += std::max(0.0, sigma_k_form(H, m)) * vol;
        ++out.nodes;
    });
    return out;
}

}  // namespace mshenv
