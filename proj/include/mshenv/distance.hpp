#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "domain.hpp"

namespace mshenv {

namespace detail {

// One-dimensional squared distance transform of a sampled function
// (lower envelope of parabolas, Felzenszwalb and Huttenlocher).
inline void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    int k = 0;
    int first = -1;
    for (int q = 0; q < n; ++q)
        if (f[q] < inf) {
            first = q;
            break;
        }
    if (first < 0) {
        for (int q = 0; q < n; ++q) d[q] = inf;
        return;
    }
    v[0] = first;
    z[0] = -inf;
    z[1] = inf;
    for (int q = first + 1; q < n; ++q) {
        if (!(f[q] < inf)) continue;
        double s;
        for (;;) {
            const int p = v[k];
            s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
            if (s <= z[k] && k > 0)
                --k;
            else
                break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double diff = q - v[k];
        d[q] = diff * diff + f[v[k]];
    }
}

}  // namespace detail

// Exact squared Euclidean distance (physical units) from every node to the
// nearest node with `feature[i] != 0`; +inf when there is no feature.
inline std::vector<double> squared_distance_transform(const Domain& dom, const std::vector<std::uint8_t>& feature) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t total = dom.size();
    std::vector<double> g(total);
    for (std::size_t i = 0; i < total; ++i) g[i] = feature[i] ? 0.0 : inf;
    const int N = dom.nodes_per_axis();
    std::vector<double> line(N), out(N), z;
    std::vector<int> v;
    for (int a = 0; a < dom.axes(); ++a) {
        const std::size_t s = static_cast<std::size_t>(dom.stride(a));
        for (std::size_t base = 0; base < total; ++base) {
            if ((base / s) % static_cast<std::size_t>(N) != 0) continue;  // start of a line along axis a
            for (int q = 0; q < N; ++q) line[q] = g[base + q * s];
            detail::edt_1d(line.data(), out.data(), N, v, z);
            for (int q = 0; q < N; ++q) g[base + q * s] = out[q];
        }
    }
    const double dx2 = dom.dx() * dom.dx();
    for (auto& x : g) x *= dx2;
    return g;
}

}  // namespace mshenv
