#pragma once

#include <memory>
#include <vector>

#include "field.hpp"

namespace mshenv {

// g -> i ddbar g ^ T ^ omega^{n-m} with T = (i ddbar K)^{m-1} for a
// potential K, or T = omega^{m-1} when no potential is given.
class EllipticOperator {
public:
    EllipticOperator(int m, std::shared_ptr<const ScalarField> potential = nullptr)
        : m_(m), potential_(std::move(potential)) {
        if (m < 1) throw DomainError("elliptic operator order must be >= 1");
    }

    int m() const { return m_; }
    bool has_potential() const { return potential_ != nullptr; }
    const ScalarField* potential() const { return potential_.get(); }

    // True when the factors at `node` can be assembled.
    bool available(std::size_t node) const {
        return m_ == 1 || !potential_ || stencil_clear(*potential_, node, /*allow_ghost=*/true);
    }

    std::vector<HermitianForm> factors(const Domain& dom, std::size_t node) const {
        if (m_ == 1) return {};
        HermitianForm t = potential_ ? complex_hessian(*potential_, node, /*allow_ghost=*/true)
                                     : HermitianForm::identity(dom.n());
        return std::vector<HermitianForm>(static_cast<std::size_t>(m_ - 1), t);
    }

    EllipticValue apply(const Domain& dom, std::size_t node, const HermitianForm& g) const {
        return m_elliptic_apply(factors(dom, node), g);
    }

private:
    int m_;
    std::shared_ptr<const ScalarField> potential_;
};

}  // namespace mshenv
