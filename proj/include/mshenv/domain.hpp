#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mshenv {

enum class Shape { Ball, Box };

inline std::string to_string(Shape s) { return s == Shape::Ball ? "ball" : "box"; }

inline Shape shape_from_string(const std::string& s) {
    if (s == "ball") return Shape::Ball;
    if (s == "box") return Shape::Box;
    throw DomainError("unknown shape '" + s + "'");
}

// Cell-centred grid over the cube [-W, W]^{2n} with W = R + 2 dx, so that
// every interior node (inside Omega) has its full 3^{2n} neighbourhood in
// the array. Real axes are ordered (x1, y1, x2, y2). Nodes outside Omega
// form the ghost region and carry boundary data.
class Domain {
public:
    Domain(int n, double radius, int nodes_per_axis, Shape shape = Shape::Ball)
        : n_(n), R_(radius), N_(nodes_per_axis), shape_(shape) {
        if (n != 1 && n != 2) throw DomainError("grid dimension n must be 1 or 2");
        if (!(radius > 0.0)) throw DomainError("domain radius must be positive");
        if (nodes_per_axis < 8) throw DomainError("need at least 8 nodes per axis");
        dx_ = 2.0 * R_ / (N_ - 4);
        W_ = R_ + 2.0 * dx_;
        const int d = axes();
        std::size_t s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride_[a] = s;
            s *= static_cast<std::size_t>(N_);
        }
        size_ = s;
        interior_.assign(size_, 0);
        for (std::size_t i = 0; i < size_; ++i) {
            if (inside(i)) {
                interior_[i] = 1;
                interior_nodes_.push_back(i);
            }
        }
        build_offsets();
    }

    int n() const { return n_; }
    int axes() const { return 2 * n_; }
    double radius() const { return R_; }
    int nodes_per_axis() const { return N_; }
    Shape shape() const { return shape_; }
    double dx() const { return dx_; }
    double half_width() const { return W_; }
    std::size_t size() const { return size_; }
    std::ptrdiff_t stride(int axis) const { return static_cast<std::ptrdiff_t>(stride_[axis]); }

    // Radius of the ball used by the defining function (circumradius for a box).
    double rho_radius() const {
        return shape_ == Shape::Ball ? R_ : R_ * std::sqrt(static_cast<double>(axes()));
    }

    int index_along(std::size_t i, int axis) const {
        return static_cast<int>((i / stride_[axis]) % static_cast<std::size_t>(N_));
    }
    double coord_of_index(int k) const { return -W_ + (k + 0.5) * dx_; }
    double coord(std::size_t i, int axis) const { return coord_of_index(index_along(i, axis)); }

    std::array<double, 4> point(std::size_t i) const {
        std::array<double, 4> x{};
        for (int a = 0; a < axes(); ++a) x[a] = coord(i, a);
        return x;
    }
    double norm2(std::size_t i) const {
        double s = 0.0;
        for (int a = 0; a < axes(); ++a) {
            const double c = coord(i, a);
            s += c * c;
        }
        return s;
    }

    bool is_interior(std::size_t i) const { return interior_[i] != 0; }
    const std::vector<std::size_t>& interior_nodes() const { return interior_nodes_; }

    // rho = (|z|^2 - R^2) / (2R): negative inside, i ddbar rho = Id / (2R).
    double rho(std::size_t i) const {
        const double Rr = rho_radius();
        return (norm2(i) - Rr * Rr) / (2.0 * Rr);
    }

    // Euclidean distance from an interior node to the boundary of Omega.
    double distance_to_boundary(std::size_t i) const {
        if (shape_ == Shape::Ball) return R_ - std::sqrt(norm2(i));
        double m = 1e300;
        for (int a = 0; a < axes(); ++a) m = std::min(m, R_ - std::abs(coord(i, a)));
        return m;
    }

    // Offsets of the 2n axial neighbours pairs and the mixed-derivative pairs.
    struct MixedPair {
        int a, b;
    };
    const std::vector<MixedPair>& mixed_pairs() const { return mixed_; }

    // Offsets of every node the complex Hessian stencil reads (centre excluded).
    const std::vector<std::ptrdiff_t>& stencil_offsets() const { return stencil_; }

    // Index of the node nearest to a point (clamped to the array).
    std::size_t nearest_node(const std::array<double, 4>& x) const {
        std::size_t idx = 0;
        for (int a = 0; a < axes(); ++a) {
            long k = std::lround((x[a] + W_) / dx_ - 0.5);
            k = std::max(0L, std::min(static_cast<long>(N_ - 1), k));
            idx += static_cast<std::size_t>(k) * stride_[a];
        }
        return idx;
    }

private:
    bool inside(std::size_t i) const {
        if (shape_ == Shape::Ball) return norm2(i) < R_ * R_;
        for (int a = 0; a < axes(); ++a)
            if (std::abs(coord(i, a)) >= R_) return false;
        return true;
    }

    void build_offsets() {
        for (int a = 0; a < axes(); ++a) {
            stencil_.push_back(stride(a));
            stencil_.push_back(-stride(a));
        }
        if (n_ == 2) {
            // (x1,x2), (y1,y2), (x1,y2), (y1,x2): the pairs entering H_12.
            mixed_ = {{0, 2}, {1, 3}, {0, 3}, {1, 2}};
            for (const auto& pr : mixed_)
                for (int sa : {1, -1})
                    for (int sb : {1, -1}) stencil_.push_back(sa * stride(pr.a) + sb * stride(pr.b));
        }
    }

    int n_;
    double R_;
    int N_;
    Shape shape_;
    double dx_ = 0.0, W_ = 0.0;
    std::array<std::size_t, 4> stride_{};
    std::size_t size_ = 0;
    std::vector<std::uint8_t> interior_;
    std::vector<std::size_t> interior_nodes_;
    std::vector<MixedPair> mixed_;
    std::vector<std::ptrdiff_t> stencil_;
};

using DomainPtr = std::shared_ptr<const Domain>;

inline DomainPtr make_domain(int n, double radius, int nodes_per_axis, Shape shape = Shape::Ball) {
    return std::make_shared<const Domain>(n, radius, nodes_per_axis, shape);
}

}  // namespace mshenv
