#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mshenv {

using cplx = std::complex<double>;

// Coefficients of a real (1,1)-form in flat coordinates, n <= 3.
class HermitianForm {
public:
    static constexpr int kMaxDim = 3;

    HermitianForm() = default;
    explicit HermitianForm(int dim) : dim_(dim) {
        if (dim < 1 || dim > kMaxDim) throw DomainError("HermitianForm dimension must be 1..3");
    }

    static HermitianForm identity(int dim) {
        HermitianForm h(dim);
        for (int i = 0; i < dim; ++i) h(i, i) = 1.0;
        return h;
    }
    static HermitianForm diagonal(const std::vector<double>& d) {
        HermitianForm h(static_cast<int>(d.size()));
        for (int i = 0; i < h.dim(); ++i) h(i, i) = d[i];
        return h;
    }
    // Builds from a full matrix and rejects non-Hermitian input.
    static HermitianForm from_matrix(const std::vector<std::vector<cplx>>& a, double tol = 1e-12) {
        HermitianForm h(static_cast<int>(a.size()));
        for (int i = 0; i < h.dim(); ++i) {
            if (static_cast<int>(a[i].size()) != h.dim()) throw DomainError("matrix is not square");
            for (int j = 0; j < h.dim(); ++j) h(i, j) = a[i][j];
        }
        h.validate(tol);
        return h;
    }

    int dim() const { return dim_; }
    cplx& operator()(int i, int j) { return e_[i * kMaxDim + j]; }
    const cplx& operator()(int i, int j) const { return e_[i * kMaxDim + j]; }

    void validate(double tol = 1e-12) const {
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                const double scale = 1.0 + std::abs((*this)(i, j));
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol * scale)
                    throw DomainError("form is not Hermitian");
            }
    }

    HermitianForm& operator+=(const HermitianForm& o) {
        check_same(o);
        for (int i = 0; i < kMaxDim * kMaxDim; ++i) e_[i] += o.e_[i];
        return *this;
    }
    HermitianForm& operator-=(const HermitianForm& o) {
        check_same(o);
        for (int i = 0; i < kMaxDim * kMaxDim; ++i) e_[i] -= o.e_[i];
        return *this;
    }
    HermitianForm& operator*=(double s) {
        for (auto& x : e_) x *= s;
        return *this;
    }
    friend HermitianForm operator+(HermitianForm a, const HermitianForm& b) { return a += b; }
    friend HermitianForm operator-(HermitianForm a, const HermitianForm& b) { return a -= b; }
    friend HermitianForm operator*(double s, HermitianForm a) { return a *= s; }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < dim_; ++i) t += (*this)(i, i).real();
        return t;
    }
    double max_abs_entry() const {
        double m = 0.0;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

private:
    void check_same(const HermitianForm& o) const {
        if (o.dim_ != dim_) throw DomainError("form dimension mismatch");
    }

    int dim_ = 1;
    std::array<cplx, kMaxDim * kMaxDim> e_{};
};

// Sum of k x k principal minors, i.e. sigma_k of the eigenvalues, computed
// from the entries so that no eigen-solver error enters.
inline double sigma_k_form(const HermitianForm& H, int k) {
    const int n = H.dim();
    if (k < 1 || k > n) throw DomainError("sigma_k order out of range");
    auto d = [&](int i) { return H(i, i).real(); };
    auto minor2 = [&](int i, int j) { return d(i) * d(j) - std::norm(H(i, j)); };
    if (k == 1) return H.trace();
    if (k == 2) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += minor2(i, j);
        return s;
    }
    // k == 3 == n: determinant of a Hermitian 3x3 is real.
    const cplx det = H(0, 0) * (H(1, 1) * H(2, 2) - H(1, 2) * H(2, 1)) -
                     H(0, 1) * (H(1, 0) * H(2, 2) - H(1, 2) * H(2, 0)) +
                     H(0, 2) * (H(1, 0) * H(2, 1) - H(1, 1) * H(2, 0));
    return det.real();
}

// Elementary symmetric polynomial of a real vector (dynamic programming).
inline double sigma_k(const std::vector<double>& lambdas, int k) {
    const int n = static_cast<int>(lambdas.size());
    if (k < 1 || k > n) throw DomainError("sigma_k order out of range");
    std::vector<double> e(k + 1, 0.0);
    e[0] = 1.0;
    for (double l : lambdas)
        for (int j = k; j >= 1; --j) e[j] += l * e[j - 1];
    return e[k];
}

// Eigenvalues in ascending order via closed forms.
inline std::vector<double> eigenvalues(const HermitianForm& H) {
    const int n = H.dim();
    if (n == 1) return {H(0, 0).real()};
    if (n == 2) {
        const double a = H(0, 0).real(), b = H(1, 1).real();
        const double mid = 0.5 * (a + b);
        const double rad = std::hypot(0.5 * (a - b), std::abs(H(0, 1)));
        return {mid - rad, mid + rad};
    }
    // Trigonometric solution of the characteristic cubic with real coefficients.
    const double c2 = sigma_k_form(H, 1), c1 = sigma_k_form(H, 2), c0 = sigma_k_form(H, 3);
    const double m = c2 / 3.0;
    const double pp = std::max(0.0, m * m - c1 / 3.0);  // (sum (l_i - m)^2) / 6
    const double q = 0.5 * (c0 - c1 * m + 2.0 * m * m * m);  // det(H - m) / 2 with sign
    const double sp = std::sqrt(pp);
    std::vector<double> out(3, m);
    if (sp > 1e-300) {
        double r = q / (sp * sp * sp);
        r = std::clamp(r, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        out[0] = m + 2.0 * sp * std::cos(phi);
        out[2] = m + 2.0 * sp * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
        out[1] = 3.0 * m - out[0] - out[2];
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct ConeCheckReport {
    std::vector<double> sigma_values;  // sigma_1..sigma_m
    bool is_member = false;
    double margin = 0.0;  // min_k sigma_k / (1 + |lambda|_inf)^k
};

// Normalized cone margin min_k sigma_k / (1 + |lambda|_inf)^k, no validation.
inline double cone_margin(const HermitianForm& H, int m, std::vector<double>* sigmas = nullptr) {
    const auto lam = eigenvalues(H);
    const double linf = std::max(std::abs(lam.front()), std::abs(lam.back()));
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= m; ++k) {
        const double s = sigma_k_form(H, k);
        if (sigmas) sigmas->push_back(s);
        margin = std::min(margin, s / std::pow(1.0 + linf, k));
    }
    return margin;
}

inline ConeCheckReport is_m_positive(const HermitianForm& H, int m, double tol) {
    if (m < 1 || m > H.dim()) throw DomainError("cone order m out of range");
    H.validate(1e-12);
    ConeCheckReport rep;
    rep.margin = cone_margin(H, m, &rep.sigma_values);
    rep.is_member = rep.margin >= -tol;
    return rep;
}

inline bool m_dominates(const HermitianForm& T, const HermitianForm& S, int m, double tol) {
    if (T.dim() != S.dim()) throw DomainError("m_dominates: dimension mismatch");
    return is_m_positive(T - S, m, tol).is_member;
}

// Smallest root x of sigma_m(lambda - x 1); the shifted vector lies in the
// closed cone exactly for x <= that root.
inline double cone_shift_root(const std::vector<double>& lam_sorted, int m) {
    const int n = static_cast<int>(lam_sorted.size());
    const double s1 = sigma_k(lam_sorted, 1);
    if (m == 1) return s1 / n;
    if (m == n) return lam_sorted.front();
    if (n == 3 && m == 2) {
        const double s2 = sigma_k(lam_sorted, 2);
        return (s1 - std::sqrt(std::max(0.0, s1 * s1 - 3.0 * s2))) / 3.0;
    }
    throw DomainError("cone_shift_root: unsupported (n, m)");
}

// Bisection variant used to cross-check the closed forms.
inline double cone_shift_root_bisect(const std::vector<double>& lam_sorted, int m, double tol) {
    const int n = static_cast<int>(lam_sorted.size());
    double lo = lam_sorted.front();
    double hi = sigma_k(lam_sorted, 1) / n;
    auto inside = [&](double x) {
        std::vector<double> l(lam_sorted);
        for (auto& v : l) v -= x;
        for (int k = 1; k <= m; ++k)
            if (sigma_k(l, k) < 0.0) return false;
        return true;
    };
    while (hi - lo > tol * (1.0 + std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
    }
    return lo;
}

// Largest v with lambda(H) - v c (1,...,1) in the closed Gamma_m cone.
inline double max_shift_in_cone(const HermitianForm& H, int m, double c, double tol = 0.0) {
    if (!(c > 0.0)) throw DomainError("max_shift_in_cone needs c > 0");
    if (m < 1 || m > H.dim()) throw DomainError("cone order m out of range");
    const auto lam = eigenvalues(H);
    const double x = tol > 0.0 ? cone_shift_root_bisect(lam, m, tol) : cone_shift_root(lam, m);
    return x / c;
}

struct EllipticValue {
    double value = 0.0;
    bool factors_m_positive = true;
};

// m * P_m(A_1, ..., A_m): the full polarization of sigma_m. Equals the
// density of i ddbar g ^ T_1 ^ ... ^ T_{m-1} ^ omega^{n-m} in the raw
// sigma normalization (all factors = Id gives C(n-1, m-1) tr g).
inline double mixed_sigma(const std::vector<HermitianForm>& forms) {
    const int m = static_cast<int>(forms.size());
    if (m == 0) throw DomainError("mixed_sigma needs at least one form");
    const int n = forms.front().dim();
    if (m > n) throw DomainError("mixed_sigma: more forms than dimension");
    double total = 0.0;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        HermitianForm sum(n);
        int size = 0;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) {
                sum += forms[i];
                ++size;
            }
        const double sign = ((m - size) % 2 == 0) ? 1.0 : -1.0;
        total += sign * sigma_k_form(sum, m);
    }
    double fact = 1.0;
    for (int i = 2; i <= m; ++i) fact *= i;
    return static_cast<double>(m) * total / fact;
}

inline EllipticValue m_elliptic_apply(const std::vector<HermitianForm>& T_factors,
                                      const HermitianForm& g_hess, double tol = 1e-12) {
    const int n = g_hess.dim();
    const int m = static_cast<int>(T_factors.size()) + 1;
    if (m > n) throw DomainError("m_elliptic_apply: too many factors");
    EllipticValue out;
    std::vector<HermitianForm> forms{g_hess};
    for (const auto& t : T_factors) {
        if (t.dim() != n) throw DomainError("m_elliptic_apply: dimension mismatch");
        if (!is_m_positive(t, m, tol).is_member) out.factors_m_positive = false;
        forms.push_back(t);
    }
    std::vector<HermitianForm> id_forms{HermitianForm::identity(n)};
    id_forms.insert(id_forms.end(), T_factors.begin(), T_factors.end());
    if (!(mixed_sigma(id_forms) > 0.0))
        throw HypothesisViolation("m-elliptic operator has nonpositive trace coefficient");
    out.value = mixed_sigma(forms);
    return out;
}

}  // namespace mshenv
