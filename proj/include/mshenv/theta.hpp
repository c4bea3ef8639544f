#pragma once

#include <array>
#include <cmath>
#include <string>

#include "barrier.hpp"

namespace mshenv {

enum class ThetaKind { Constant, Radial, Annular, HalfSpace };

inline std::string to_string(ThetaKind k) {
    switch (k) {
        case ThetaKind::Constant: return "constant";
        case ThetaKind::Radial: return "radial";
        case ThetaKind::Annular: return "annular";
        case ThetaKind::HalfSpace: return "halfspace";
    }
    return "?";
}

inline ThetaKind theta_kind_from_string(const std::string& s) {
    if (s == "constant") return ThetaKind::Constant;
    if (s == "radial" || s == "bump") return ThetaKind::Radial;
    if (s == "annular") return ThetaKind::Annular;
    if (s == "halfspace") return ThetaKind::HalfSpace;
    throw ConfigError("unknown theta kind '" + s + "'");
}

// Cutoff profiles built from the quintic smooth_drop, so every theta is C^2.
//   constant:  value
//   radial:    value on |x - center| <= r_in, 0 beyond r_out
//   annular:   value on r_in <= |x - center| <= r_out, 0 beyond a ramp of
//              length `width` on either side
//   halfspace: value where x[axis] <= offset, 0 where x[axis] >= offset + width
struct ThetaSpec {
    ThetaKind kind = ThetaKind::Constant;
    double value = 1.0;
    std::array<double, 4> center{};
    double r_in = 0.0;
    double r_out = 0.0;
    double width = 0.1;
    int axis = 0;
    double offset = 0.0;

    json to_json() const {
        return {{"kind", to_string(kind)}, {"value", value}, {"center", center}, {"r_in", r_in},
                {"r_out", r_out},          {"width", width}, {"axis", axis},     {"offset", offset}};
    }
};

inline double theta_at(const ThetaSpec& t, const std::array<double, 4>& x) {
    auto dist = [&] {
        double s = 0.0;
        for (int a = 0; a < 4; ++a) s += (x[a] - t.center[a]) * (x[a] - t.center[a]);
        return std::sqrt(s);
    };
    switch (t.kind) {
        case ThetaKind::Constant: return t.value;
        case ThetaKind::Radial: return t.value * smooth_drop((dist() - t.r_in) / (t.r_out - t.r_in));
        case ThetaKind::Annular: {
            const double d = dist();
            return t.value * smooth_drop((t.r_in - d) / t.width) * smooth_drop((d - t.r_out) / t.width);
        }
        case ThetaKind::HalfSpace: return t.value * smooth_drop((x[t.axis] - t.offset) / t.width);
    }
    return 0.0;
}

inline void validate(const ThetaSpec& t, int n) {
    if (!(t.value >= 0.0 && t.value <= 1.0)) throw ConfigError("theta value must lie in [0, 1]");
    if (t.kind == ThetaKind::Radial && !(t.r_out > t.r_in && t.r_in >= 0.0))
        throw ConfigError("radial theta needs 0 <= r_in < r_out");
    if (t.kind == ThetaKind::Annular && !(t.r_out >= t.r_in && t.r_in >= 0.0 && t.width > 0.0))
        throw ConfigError("annular theta needs 0 <= r_in <= r_out and width > 0");
    if (t.kind == ThetaKind::HalfSpace && !(t.width > 0.0 && t.axis >= 0 && t.axis < 2 * n))
        throw ConfigError("halfspace theta needs width > 0 and a valid axis");
}

inline ScalarField make_theta(const DomainPtr& dom, const ThetaSpec& t) {
    validate(t, dom->n());
    return ScalarField::from_function(dom, [&](const std::array<double, 4>& x) { return theta_at(t, x); });
}

}  // namespace mshenv
