#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cdorisk/numerics.hpp"

namespace cdorisk {

/// Single-name setting of the quadratic-payoff VOD: W(l) = l².
struct SimplifiedVodParams {
    double p = 0.0;
    double market_recovery = 0.4;
    double r_m = 1.0;
    double alpha = 1.0;
    double rho = 0.3;
};

void validate(const SimplifiedVodParams& params);

/// (1-R)² - E_z[p(z) (1 - r(z))²], recovery calibrated on the grid.
double simplified_vod(const SimplifiedVodParams& params, const FactorGrid& grid);

/// Closed form of the α → ∞ limit: (1-R)² - (1-R_m)² pR/R_m - p(1 - R/R_m).
double vod_alpha_limit(double p, double market_recovery, double r_m);

/// K_r with Φ(K_p) - Φ(K_r) = pR/R_m and Φ(K_p) = p, i.e. Φ⁻¹(p(1 - R/R_m)).
/// Empty when R_m == R (K_r = -∞).
std::optional<double> k_r(double p, double market_recovery, double r_m);

/// E_z[p(z) r(z)], the mean of X = 1{τ<t} r; equals pR after calibration.
double mean_of_X(const SimplifiedVodParams& params, const FactorGrid& grid);

/// Var(X) = E_z[p(z) r(z)²] - (pR)².
double variance_of_X(const SimplifiedVodParams& params, const FactorGrid& grid);

/// |(VOD(α1) - VOD(α2)) - (Var X(α2) - Var X(α1))|.
double lemma1_residual(const SimplifiedVodParams& params, double alpha1, double alpha2,
                       const FactorGrid& grid);

/// (m-a)(b-m): largest variance of a variable on [a,b] with mean m.
double lemma3_extremal_variance(double a, double b, double m);

struct DiscreteDistribution {
    std::vector<double> values;
    std::vector<double> weights;

    [[nodiscard]] double mean() const;
    [[nodiscard]] double variance() const;
};

/// Random distribution on [a,b] with mean exactly m (up to rounding): up to
/// `max_support` uniform atoms with Dirichlet weights, then mixed with a
/// point mass at a or b to move the mean onto m.
DiscreteDistribution random_distribution_with_mean(std::mt19937_64& rng, double a, double b,
                                                   double m, int max_support = 6);

struct Proposition1Scan {
    double min_vod = 0.0;               // min simplified VOD with regularized R_m
    SimplifiedVodParams argmin;
    double min_claim1_margin = 0.0;     // min of simplified_vod - vod_alpha_limit
    double min_claim2 = 0.0;            // min of vod_alpha_limit at regularized R_m
    double max_lemma2_error = 0.0;      // max |Φ(K_p) - Φ(K_r) - pR/R_m|
    bool variance_monotone_in_alpha = true;  // observed only
    std::size_t points = 0;
};

/// Scans the simplified VOD with R_m = rm_regularized(p, R) over the grids.
Proposition1Scan proposition1_scan(const std::vector<double>& p_grid,
                                   const std::vector<double>& recovery_grid,
                                   const std::vector<double>& alpha_grid,
                                   const std::vector<double>& rho_grid, const FactorGrid& grid);

struct AppendixReport {
    Proposition1Scan scan;
    double lemma1_max_residual = 0.0;
    double lemma3_max_excess = 0.0;  // max of Var - (m-a)(b-m) over random draws
    std::size_t lemma1_draws = 0;
    std::size_t lemma3_draws = 0;
};

struct AppendixSettings {
    std::vector<double> p_grid;
    std::vector<double> recovery_grid{0.2, 0.4, 0.6};
    std::vector<double> alpha_grid{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
    std::vector<double> rho_grid{0.0, 0.3, 0.6, 0.9};
    std::size_t lemma1_draws = 50;
    std::size_t lemma3_draws = 10000;
    std::uint64_t seed = 20090501;

    /// p grid {0.05, 0.10, ..., 0.95, 0.99}.
    static AppendixSettings defaults();
};

/// Runs every appendix check; the caller decides pass/fail from the report.
AppendixReport verify_appendix(const AppendixSettings& settings, const FactorGrid& grid);

}  // namespace cdorisk
