#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "errors.hpp"

namespace mshenv {

// A real number or the tagged value -inf. Polar-set semantics need the
// tag to be exact, so -inf is never encoded as a large negative double.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit on purpose

    static constexpr ExtendedReal minus_infinity() {
        ExtendedReal r;
        r.neg_inf_ = true;
        return r;
    }

    constexpr bool is_neg_inf() const { return neg_inf_; }
    constexpr bool is_finite() const { return !neg_inf_; }

    double value() const {
        if (neg_inf_) throw DomainError("value() called on -inf");
        return value_;
    }

    // IEEE view: -inf maps to -std::numeric_limits<double>::infinity().
    constexpr double to_double() const {
        return neg_inf_ ? -std::numeric_limits<double>::infinity() : value_;
    }

    friend constexpr bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
        if (a.neg_inf_) return !b.neg_inf_;
        if (b.neg_inf_) return false;
        return a.value_ < b.value_;
    }
    friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
        if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
        return a.value_ == b.value_;
    }

private:
    double value_ = 0.0;
    bool neg_inf_ = false;
};

inline constexpr double kMinExponent = -8.0;
inline constexpr double kMaxExponent = 1.0;

struct KernelParams {
    double p = 0.0;

    explicit KernelParams(double exponent) : p(exponent) {
        if (!(p >= kMinExponent && p <= kMaxExponent))
            throw DomainError("kernel exponent " + std::to_string(p) + " outside [-8, 1]");
    }
    bool is_log() const { return p == 0.0; }
};

// K_p(s) for s > 0, as a plain double.
inline double kernel_K_finite(const KernelParams& kp, double s) {
    if (!(s > 0.0)) throw DomainError("kernel_K_finite needs s > 0");
    if (kp.is_log()) return std::log(s);
    return std::pow(s, kp.p) / kp.p;
}

inline ExtendedReal kernel_K(const KernelParams& kp, double s) {
    if (!(s >= 0.0)) throw DomainError("kernel_K argument must be >= 0");
    if (s == 0.0) {
        if (kp.p <= 0.0) return ExtendedReal::minus_infinity();
        return 0.0;
    }
    return kernel_K_finite(kp, s);
}

inline double kernel_L(const KernelParams& kp, double t) {
    if (kp.is_log()) return std::exp(t);
    if (t == -std::numeric_limits<double>::infinity() && kp.p < 0.0) return 0.0;
    const double pt = kp.p * t;
    if (kp.p < 0.0 ? !(t < 0.0) : !(t >= 0.0))
        throw DomainError("kernel_L argument " + std::to_string(t) + " outside the range of K_p");
    return std::pow(pt, 1.0 / kp.p);
}

inline double kernel_L(const KernelParams& kp, const ExtendedReal& t) {
    if (t.is_neg_inf()) {
        if (kp.p <= 0.0) return 0.0;
        throw DomainError("kernel_L(-inf) undefined for p > 0");
    }
    return kernel_L(kp, t.value());
}

// K_p'(s) = s^{p-1} and K_p''(s) = (p-1) s^{p-2}.
inline double kernel_dK(const KernelParams& kp, double s) {
    if (!(s > 0.0)) throw DomainError("kernel_dK needs s > 0");
    return std::pow(s, kp.p - 1.0);
}

inline double kernel_d2K(const KernelParams& kp, double s) {
    if (!(s > 0.0)) throw DomainError("kernel_d2K needs s > 0");
    return (kp.p - 1.0) * std::pow(s, kp.p - 2.0);
}

struct ChiValue {
    double value;
    double first_deriv;
    double second_deriv;
};

// chi = K_{q+gamma} o L_q, so chi' = L_q^gamma and chi'' = gamma L_q^{gamma-q}.
inline ChiValue chi_eval(double q, double gamma, double t) {
    if (!(gamma > 0.0)) throw DomainError("chi_eval needs gamma > 0");
    if (q + gamma > kMaxExponent + 1e-15) throw DomainError("chi_eval needs q + gamma <= 1");
    const KernelParams kq(q);
    const KernelParams kqg(std::min(q + gamma, kMaxExponent));
    const double L = kernel_L(kq, t);
    if (!(L > 0.0)) throw DomainError("chi_eval: L_q(t) vanishes");
    return {kernel_K_finite(kqg, L), std::pow(L, gamma), gamma * std::pow(L, gamma - q)};
}

}  // namespace mshenv
