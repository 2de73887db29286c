#include "cdorisk/copula.hpp"

#include <cmath>

#include "cdorisk/error.hpp"

namespace cdorisk {

void validate(const CopulaParams& params) {
    if (!(params.rho >= 0.0 && params.rho < 1.0)) {
        throw DomainError("copula: rho must lie in [0,1)");
    }
}

double conditional_default_prob(double p, double rho, double z) {
    validate(CopulaParams{rho});
    if (rho == 0.0) return p;
    if (p == 0.0 || p == 1.0) return p;
    if (!(p > 0.0 && p < 1.0)) throw DomainError("conditional_default_prob: p must lie in [0,1]");
    return norm_cdf((norm_inv(p) - std::sqrt(rho) * z) / std::sqrt(1.0 - rho));
}

Eigen::VectorXd conditional_default_prob(double p, double rho, const Eigen::VectorXd& z) {
    validate(CopulaParams{rho});
    if (rho == 0.0 || p == 0.0 || p == 1.0) return Eigen::VectorXd::Constant(z.size(), p);
    if (!(p > 0.0 && p < 1.0)) throw DomainError("conditional_default_prob: p must lie in [0,1]");
    const double c = norm_inv(p);
    const double s = std::sqrt(rho), d = std::sqrt(1.0 - rho);
    return norm_cdf(((c - s * z.array()) / d).eval()).matrix();
}

}  // namespace cdorisk
