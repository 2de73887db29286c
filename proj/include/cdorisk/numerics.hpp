#pragma once

#include <cmath>
#include <concepts>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "cdorisk/error.hpp"

namespace cdorisk {

/// Standard normal density.
template <std::floating_point Scalar>
inline Scalar norm_pdf(Scalar x) {
    return std::exp(Scalar(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<Scalar> /
           std::numbers::sqrt2_v<Scalar>;
}

/// Standard normal cumulative distribution, via erfc so both tails keep full
/// relative precision.
template <std::floating_point Scalar>
inline Scalar norm_cdf(Scalar x) {
    return Scalar(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

/// Coefficient-wise Φ over an Eigen array expression.
template <typename Derived>
inline auto norm_cdf(const Eigen::ArrayBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    return x.unaryExpr([](Scalar v) { return norm_cdf(v); });
}

/// Inverse standard normal cdf. Throws DomainError unless 0 < p < 1.
double norm_inv(double p);

/// Quadrature rule for expectations over a standard normal variable.
/// Nodes strictly increasing, weights nonnegative and summing to one.
struct FactorGrid {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    [[nodiscard]] Eigen::Index size() const { return nodes.size(); }

    /// Σ w_k f(z_k), summed in node order.
    template <typename F>
    [[nodiscard]] double expect(F&& f) const {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < nodes.size(); ++k) sum += weights[k] * f(nodes[k]);
        return sum;
    }
};

inline constexpr std::size_t kDefaultFactorNodes = 96;

/// n-point Gauss-Hermite rule rescaled to the standard normal weight.
/// Nodes come from the Golub-Welsch eigenproblem, polished by Newton steps on
/// the orthonormal Hermite recurrence; weights are Christoffel numbers.
FactorGrid factor_grid(std::size_t n = kDefaultFactorNodes);

/// Bracketing root finder: Brent's inverse quadratic / secant steps with a
/// bisection fallback. Returns x with |f(x)| <= f_tol or a bracket narrower
/// than tol. Throws NoBracketError when f(lo) and f(hi) share a sign.
template <typename F>
double find_root(F&& f, double lo, double hi, double tol = 1e-12, double f_tol = 0.0,
                 int max_iter = 200) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        throw NoBracketError("find_root: f(lo) and f(hi) have the same sign");
    }
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || std::abs(fb) <= f_tol || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

}  // namespace cdorisk
