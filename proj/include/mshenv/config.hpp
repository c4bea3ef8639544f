#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "domain.hpp"
#include "theta.hpp"

namespace mshenv {

struct ScenarioConfig {
    std::string name = "scenario";

    // [domain]
    int n = 1;
    double R = 1.0;
    int N = 128;
    Shape shape = Shape::Ball;

    // [weight]
    int k = 1;
    int m = 1;
    double floor_factor = -1.0;  // <= 0 selects the default for n

    // [theta]
    ThetaSpec theta;

    // [checks]
    double eps = 0.5;
    double delta = 1.0;
    double c = 1.0;
    double gamma_tilde = 0.45;
    double check_tol = 1e-9;

    // [barrier]
    double gamma = 0.0;           // 0 selects 0.9 * min{gt + delta - 1, delta / 2}
    std::vector<double> a;        // empty selects a_j = 1
    double buffer = 0.1;
    double super_a = 0.1;
    double eta = 0.01;
    double barrier_tol = 1e-9;

    // [solver]
    std::vector<double> C_list{1.0, 2.0, 4.0};
    double stab_tol = 1e-3;
    double solver_tol = 0.0;
    int max_sweeps = 50000;
    double omega = 0.0;

    // [verify]
    double theta_min = 0.1;
    double ratio_tol = 0.1;
    double mass_tol = 0.15;
    std::vector<double> mass_radii;  // empty selects r0 {1, 1.5, 2}, r0 = max(4 dx, 2 mask radius)
    int max_centers = 64;

    // [output]
    std::string out_dir;

    json to_json() const {
        return {{"name", name},
                {"domain", {{"n", n}, {"R", R}, {"N", N}, {"shape", to_string(shape)}}},
                {"weight", {{"k", k}, {"m", m}, {"floor_factor", floor_factor}}},
                {"theta", theta.to_json()},
                {"checks", {{"eps", eps}, {"delta", delta}, {"c", c}, {"gamma_tilde", gamma_tilde}, {"tol", check_tol}}},
                {"barrier",
                 {{"gamma", gamma}, {"a", a}, {"buffer", buffer}, {"super_a", super_a}, {"eta", eta},
                  {"tol", barrier_tol}}},
                {"solver",
                 {{"C_list", C_list}, {"stab_tol", stab_tol}, {"tol", solver_tol}, {"max_sweeps", max_sweeps},
                  {"omega", omega}}},
                {"verify",
                 {{"theta_min", theta_min}, {"ratio_tol", ratio_tol}, {"mass_tol", mass_tol},
                  {"mass_radii", mass_radii}, {"max_centers", max_centers}}}};
    }

    void validate() const {
        if (n != 1 && n != 2) throw ConfigError("n must be 1 or 2");
        if (k < 1 || k > n) throw ConfigError("k must lie in 1..n");
        if (m < 1 || m > n) throw ConfigError("m must lie in 1..n");
        if (k < m) throw ConfigError("k >= m is required");
        if (!(R > 0.0) || N < 8) throw ConfigError("need R > 0 and N >= 8");
        if (C_list.size() < 3) throw ConfigError("C_list needs at least 3 values");
        mshenv::validate(theta, n);
    }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        std::istringstream conv(item);
        double v = 0.0;
        if (!(conv >> v)) throw ConfigError("bad number '" + item + "' in list '" + s + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace detail

inline ScenarioConfig config_from_ptree(const boost::property_tree::ptree& pt) {
    ScenarioConfig c;
    // get(key, default) would silently fall back on malformed values.
    auto get = [&](const char* key, auto def) {
        const auto child = pt.get_child_optional(key);
        if (!child) return def;
        try {
            return child->get_value<decltype(def)>();
        } catch (const boost::property_tree::ptree_error& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
    };
    auto list = [&](const char* key, const std::vector<double>& def) {
        const auto s = pt.get_optional<std::string>(key);
        return s ? detail::parse_list(*s) : def;
    };
    c.name = get("scenario.name", c.name);
    c.n = get("domain.n", c.n);
    c.R = get("domain.R", c.R);
    c.N = get("domain.N", c.N);
    c.shape = shape_from_string(get("domain.shape", to_string(c.shape)));
    c.k = get("weight.k", c.k);
    c.m = get("weight.m", c.m);
    c.floor_factor = get("weight.floor_factor", c.floor_factor);

    c.theta.kind = theta_kind_from_string(get("theta.kind", to_string(c.theta.kind)));
    c.theta.value = get("theta.value", c.theta.value);
    const auto centre = list("theta.center", {0.0, 0.0, 0.0, 0.0});
    if (centre.size() > 4) throw ConfigError("theta.center has more than 4 coordinates");
    for (std::size_t a = 0; a < centre.size(); ++a) c.theta.center[a] = centre[a];
    c.theta.r_in = get("theta.r_in", c.theta.r_in);
    c.theta.r_out = get("theta.r_out", c.theta.r_out);
    c.theta.width = get("theta.width", c.theta.width);
    c.theta.axis = get("theta.axis", c.theta.axis);
    c.theta.offset = get("theta.offset", c.theta.offset);

    c.eps = get("checks.eps", c.eps);
    c.delta = get("checks.delta", c.delta);
    c.c = get("checks.c", c.c);
    c.gamma_tilde = get("checks.gamma_tilde", c.gamma_tilde);
    c.check_tol = get("checks.tol", c.check_tol);

    c.gamma = get("barrier.gamma", c.gamma);
    c.a = list("barrier.a", c.a);
    c.buffer = get("barrier.buffer", c.buffer);
    c.super_a = get("barrier.super_a", c.super_a);
    c.eta = get("barrier.eta", c.eta);
    c.barrier_tol = get("barrier.tol", c.barrier_tol);

    c.C_list = list("solver.C_list", c.C_list);
    c.stab_tol = get("solver.stab_tol", c.stab_tol);
    c.solver_tol = get("solver.tol", c.solver_tol);
    c.max_sweeps = get("solver.max_sweeps", c.max_sweeps);
    c.omega = get("solver.omega", c.omega);

    c.theta_min = get("verify.theta_min", c.theta_min);
    c.ratio_tol = get("verify.ratio_tol", c.ratio_tol);
    c.mass_tol = get("verify.mass_tol", c.mass_tol);
    c.mass_radii = list("verify.mass_radii", c.mass_radii);
    c.max_centers = get("verify.max_centers", c.max_centers);

    c.out_dir = get("output.dir", c.out_dir);
    c.validate();
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(path, pt);
    } catch (const boost::property_tree::ptree_error& e) {
        throw ConfigError(e.what());
    }
    return config_from_ptree(pt);
}

inline ScenarioConfig parse_config(const std::string& text) {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, pt);
    } catch (const boost::property_tree::ptree_error& e) {
        throw ConfigError(e.what());
    }
    return config_from_ptree(pt);
}

}  // namespace mshenv
