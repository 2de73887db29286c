#include "cdorisk/numerics.hpp"

#include <string>

#include <Eigen/Eigenvalues>

namespace cdorisk {

namespace {

// Horner evaluation, highest-order coefficient last.
template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double r = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) r = r * x + c[i];
    return r;
}

// Orthonormal probabilists' Hermite polynomials: returns (p_n(x), p_{n-1}(x)).
std::pair<double, double> hermite_pair(std::size_t n, double x) {
    double prev = 0.0, cur = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double next = (x * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
        prev = cur;
        cur = next;
    }
    return {cur, prev};
}

}  // namespace

double norm_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("norm_inv: p must lie in (0,1), got " + std::to_string(p));
    }
    // Wichura, Algorithm AS 241 (PPND16).
    static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                   1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                   4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                   3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[] = {1.0,
                                   4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                   5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                   3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                   5.2264952788528545610e+3};
    static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                   5.76949722146069140550e0, 3.64784832476320460504e0,
                                   1.27045825245236838258e0, 2.41780725177450611770e-1,
                                   2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[] = {1.0,
                                   2.05319162663775882187e0, 1.67638483018380384940e0,
                                   6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                   1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                   1.05075007164441684324e-9};
    static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                   1.78482653991729133580e0, 2.96560571828504891230e-1,
                                   2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                   2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[] = {1.0,
                                   5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                   1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                   1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                   2.04426310338993978564e-15};

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, r) / poly(b, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = poly(c, r) / poly(d, r);
    } else {
        r -= 5.0;
        x = poly(e, r) / poly(f, r);
    }
    return q < 0.0 ? -x : x;
}

FactorGrid factor_grid(std::size_t n) {
    if (n < 1) throw DomainError("factor_grid: node count must be at least 1");
    FactorGrid grid;
    if (n == 1) {
        grid.nodes = Eigen::VectorXd::Zero(1);
        grid.weights = Eigen::VectorXd::Ones(1);
        return grid;
    }

    // Jacobi matrix of the probabilists' Hermite recurrence.
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sub(m - 1);
    for (Eigen::Index k = 0; k < m - 1; ++k) sub[k] = std::sqrt(double(k + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    Eigen::VectorXd nodes = solver.eigenvalues();

    Eigen::VectorXd weights(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        double x = nodes[k];
        for (int it = 0; it < 4; ++it) {
            const auto [pn, pn1] = hermite_pair(n, x);
            const double step = pn / (std::sqrt(double(n)) * pn1);
            x -= step;
            if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
        }
        nodes[k] = x;
        // Christoffel number: 1 / Σ_{j<n} p_j(x)^2.
        double prev = 0.0, cur = 1.0, sum = 1.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double next = (x * cur - std::sqrt(double(j)) * prev) / std::sqrt(double(j + 1));
            prev = cur;
            cur = next;
            sum += cur * cur;
        }
        weights[k] = 1.0 / sum;
    }
    // Exact symmetry about zero.
    for (Eigen::Index k = 0; k < m / 2; ++k) {
        const double x = 0.5 * (nodes[m - 1 - k] - nodes[k]);
        const double w = 0.5 * (weights[m - 1 - k] + weights[k]);
        nodes[k] = -x;
        nodes[m - 1 - k] = x;
        weights[k] = weights[m - 1 - k] = w;
    }
    if (m % 2 == 1) nodes[m / 2] = 0.0;
    weights /= weights.sum();
    grid.nodes = std::move(nodes);
    grid.weights = std::move(weights);
    return grid;
}

}  // namespace cdorisk
