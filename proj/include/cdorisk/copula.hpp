#pragma once

#include <Eigen/Dense>

#include "cdorisk/numerics.hpp"

namespace cdorisk {

/// Flat one-factor Gaussian copula correlation, 0 <= rho < 1.
struct CopulaParams {
    double rho = 0.0;
};

void validate(const CopulaParams& params);

/// P(default | z) = Φ((Φ⁻¹(p) - √ρ z) / √(1-ρ)). Low z means more defaults.
/// rho == 0 returns p exactly. p of 0 or 1 is passed through unchanged.
double conditional_default_prob(double p, double rho, double z);

/// Vectorized over all nodes of a grid.
Eigen::VectorXd conditional_default_prob(double p, double rho, const Eigen::VectorXd& z);

/// Σ weights · f(nodes).
template <typename F>
double integrate_over_factor(F&& f, const FactorGrid& grid) {
    return grid.expect(std::forward<F>(f));
}

}  // namespace cdorisk
