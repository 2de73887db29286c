#include "cdorisk/appendix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdorisk/copula.hpp"
#include "cdorisk/error.hpp"
#include "cdorisk/recovery.hpp"

namespace cdorisk {

namespace {

struct Moments {
    double default_mass = 0.0;  // E[p(z)]
    double first = 0.0;         // E[p(z) r(z)]
    double second = 0.0;        // E[p(z) r(z)²]
};

Moments x_moments(const SimplifiedVodParams& params, const FactorGrid& grid) {
    validate(params);
    Moments m;
    const auto cal =
        calibrate_beta(params.p, params.market_recovery, params.r_m, params.alpha, params.rho, grid);
    const Eigen::VectorXd q = conditional_default_prob(params.p, params.rho, grid.nodes);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double w = grid.weights[k] * q[k];
        const double r = conditional_recovery(cal, params.alpha, grid.nodes[k]);
        m.default_mass += w;
        m.first += w * r;
        m.second += w * r * r;
    }
    return m;
}

}  // namespace

void validate(const SimplifiedVodParams& params) {
    if (!(params.p >= 0.0 && params.p <= 1.0)) throw DomainError("appendix: p must lie in [0,1]");
    if (!(params.market_recovery >= 0.0 && params.market_recovery < 1.0)) {
        throw DomainError("appendix: market recovery must lie in [0,1)");
    }
    if (!(params.r_m >= params.market_recovery - 1e-12 && params.r_m <= 1.0)) {
        throw InfeasibleCalibration("appendix: need R <= R_m <= 1");
    }
    if (!(params.alpha >= 0.0)) throw DomainError("appendix: alpha must be nonnegative");
    if (!(params.rho >= 0.0 && params.rho < 1.0)) throw DomainError("appendix: rho must lie in [0,1)");
}

double simplified_vod(const SimplifiedVodParams& params, const FactorGrid& grid) {
    const auto m = x_moments(params, grid);
    const double lgd = 1.0 - params.market_recovery;
    // E[p(z)(1-r)²] = E[p(z)] - 2 E[p(z) r] + E[p(z) r²]
    return lgd * lgd - (m.default_mass - 2.0 * m.first + m.second);
}

double vod_alpha_limit(double p, double market_recovery, double r_m) {
    if (r_m == 0.0) throw DomainError("vod_alpha_limit: R_m must be nonzero");
    const double R = market_recovery;
    const double lgd = 1.0 - R;
    return lgd * lgd - (1.0 - r_m) * (1.0 - r_m) * p * R / r_m - p * (1.0 - R / r_m);
}

std::optional<double> k_r(double p, double market_recovery, double r_m) {
    if (!(r_m > 0.0 && r_m >= market_recovery && r_m <= 1.0)) {
        throw DomainError("k_r: need R <= R_m <= 1");
    }
    const double mass = p * (1.0 - market_recovery / r_m);
    if (mass <= 0.0) return std::nullopt;
    return norm_inv(mass);
}

double mean_of_X(const SimplifiedVodParams& params, const FactorGrid& grid) {
    return x_moments(params, grid).first;
}

double variance_of_X(const SimplifiedVodParams& params, const FactorGrid& grid) {
    const double pR = params.p * params.market_recovery;
    return x_moments(params, grid).second - pR * pR;
}

double lemma1_residual(const SimplifiedVodParams& params, double alpha1, double alpha2,
                       const FactorGrid& grid) {
    auto with = [&](double a) {
        auto q = params;
        q.alpha = a;
        return q;
    };
    const double lhs = simplified_vod(with(alpha1), grid) - simplified_vod(with(alpha2), grid);
    const double rhs = variance_of_X(with(alpha2), grid) - variance_of_X(with(alpha1), grid);
    return std::abs(lhs - rhs);
}

double lemma3_extremal_variance(double a, double b, double m) {
    if (!(a <= m && m <= b)) throw DomainError("lemma3_extremal_variance: need a <= m <= b");
    return (m - a) * (b - m);
}

double DiscreteDistribution::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
    return s;
}

double DiscreteDistribution::variance() const {
    const double mu = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * (values[i] - mu) * (values[i] - mu);
    return s;
}

DiscreteDistribution random_distribution_with_mean(std::mt19937_64& rng, double a, double b,
                                                   double m, int max_support) {
    if (!(a <= m && m <= b)) throw DomainError("random_distribution_with_mean: need a <= m <= b");
    std::uniform_int_distribution<int> support(1, std::max(1, max_support));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> gamma1(1.0);

    DiscreteDistribution d;
    const int k = support(rng);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        d.values.push_back(a + (b - a) * unit(rng));
        d.weights.push_back(gamma1(rng));
        total += d.weights.back();
    }
    for (double& w : d.weights) w /= total;

    const double mu = d.mean();
    double lambda = 1.0, anchor = a;
    if (mu > m) {
        lambda = (m - a) / (mu - a);
        anchor = a;
    } else if (mu < m) {
        lambda = (b - m) / (b - mu);
        anchor = b;
    }
    if (lambda < 1.0) {
        for (double& w : d.weights) w *= lambda;
        d.values.push_back(anchor);
        d.weights.push_back(1.0 - lambda);
    }
    return d;
}

Proposition1Scan proposition1_scan(const std::vector<double>& p_grid,
                                   const std::vector<double>& recovery_grid,
                                   const std::vector<double>& alpha_grid,
                                   const std::vector<double>& rho_grid, const FactorGrid& grid) {
    if (p_grid.empty() || recovery_grid.empty() || alpha_grid.empty() || rho_grid.empty()) {
        throw DomainError("proposition1_scan: grids must be nonempty");
    }
    Proposition1Scan scan;
    scan.min_vod = std::numeric_limits<double>::infinity();
    scan.min_claim1_margin = std::numeric_limits<double>::infinity();
    scan.min_claim2 = std::numeric_limits<double>::infinity();
    for (double R : recovery_grid) {
        for (double p : p_grid) {
            const double r_m = rm_regularized(p, R);
            const double limit = vod_alpha_limit(p, R, r_m);
            scan.min_claim2 = std::min(scan.min_claim2, limit);
            if (const auto kr = k_r(p, R, r_m)) {
                const double err = std::abs((p - norm_cdf(*kr)) - p * R / r_m);
                scan.max_lemma2_error = std::max(scan.max_lemma2_error, err);
            }
            for (double rho : rho_grid) {
                double prev_var = -std::numeric_limits<double>::infinity();
                for (double alpha : alpha_grid) {
                    const SimplifiedVodParams params{p, R, r_m, alpha, rho};
                    const double v = simplified_vod(params, grid);
                    ++scan.points;
                    if (v < scan.min_vod) {
                        scan.min_vod = v;
                        scan.argmin = params;
                    }
                    scan.min_claim1_margin = std::min(scan.min_claim1_margin, v - limit);
                    const double var = variance_of_X(params, grid);
                    if (var < prev_var - 1e-12) scan.variance_monotone_in_alpha = false;
                    prev_var = var;
                }
            }
        }
    }
    return scan;
}

AppendixSettings AppendixSettings::defaults() {
    AppendixSettings s;
    for (int k = 1; k <= 19; ++k) s.p_grid.push_back(0.05 * k);
    s.p_grid.push_back(0.99);
    return s;
}

AppendixReport verify_appendix(const AppendixSettings& settings, const FactorGrid& grid) {
    AppendixReport report;
    report.scan = proposition1_scan(settings.p_grid, settings.recovery_grid, settings.alpha_grid,
                                    settings.rho_grid, grid);

    std::mt19937_64 rng(settings.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < settings.lemma1_draws; ++i) {
        SimplifiedVodParams params;
        params.p = 0.01 + 0.98 * u(rng);
        params.market_recovery = 0.1 + 0.8 * u(rng);
        params.r_m = params.market_recovery + (1.0 - params.market_recovery) * u(rng);
        params.rho = 0.9 * u(rng);
        const double a1 = 10.0 * u(rng);
        const double a2 = 10.0 * u(rng);
        report.lemma1_max_residual =
            std::max(report.lemma1_max_residual, lemma1_residual(params, a1, a2, grid));
    }
    report.lemma1_draws = settings.lemma1_draws;

    report.lemma3_max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < settings.lemma3_draws; ++i) {
        double a = -5.0 + 10.0 * u(rng);
        double b = -5.0 + 10.0 * u(rng);
        if (a > b) std::swap(a, b);
        const double m = a + (b - a) * u(rng);
        const auto d = random_distribution_with_mean(rng, a, b, m);
        report.lemma3_max_excess =
            std::max(report.lemma3_max_excess, d.variance() - lemma3_extremal_variance(a, b, d.mean()));
    }
    report.lemma3_draws = settings.lemma3_draws;
    return report;
}

}  // namespace cdorisk
