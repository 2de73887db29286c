#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cdorisk/market.hpp"
#include "cdorisk/numerics.hpp"
#include "cdorisk/recovery.hpp"

namespace cdorisk {

struct PricerConfig {
    std::size_t factor_nodes = kDefaultFactorNodes;
    std::size_t loss_buckets_per_name = 8;
    double discount_rate = 0.0;
    double premium_frequency = 4.0;
};

void validate(const PricerConfig& config);

/// Distribution of an amount (loss or recovered notional) on a uniform grid.
/// `cap` is the exact supremum of the true support; the mean-preserving split
/// can put mass on buckets above it, and payoffs are evaluated at
/// min(k * grid_unit, cap).
struct LossDistribution {
    double grid_unit = 1.0;
    Eigen::VectorXd probabilities = Eigen::VectorXd::Ones(1);
    double cap = 0.0;

    /// Adds an independent amount that is `amount` with probability q and 0
    /// otherwise, splitting off-grid amounts between adjacent buckets.
    void add(double q, double amount);

    [[nodiscard]] double mean() const;

    /// E[f(min(k u, cap))].
    template <typename F>
    [[nodiscard]] double expect(F&& f) const {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < probabilities.size(); ++k) {
            sum += probabilities[k] * f(std::min(double(k) * grid_unit, cap));
        }
        return sum;
    }

    /// E[f(L + X)] for X an independent two-point amount split as add()
    /// would, without materializing the result. Same clamping as add() then
    /// expect(): cap + amount when q > 0, cap otherwise.
    template <typename F>
    [[nodiscard]] double expect_with(double q, double amount, F&& f) const;
};

/// Grid unit: original notional / (original name count * buckets per name).
double loss_grid_unit(const Portfolio& portfolio, const PricerConfig& config);

/// Tranche loss (L - A)^+ - (L - B)^+ for a cumulative portfolio loss L.
double tranche_loss(double cumulative_loss, const Tranche& tranche);

/// Part of the tranche written down from the top by cumulative recoveries.
double recovery_writedown(double cumulative_recovered, const Tranche& tranche,
                          double original_notional);

/// Tranche after settlements have eaten into it.
struct TrancheState {
    double effective_attach = 0.0;  // remaining subordination
    double notional = 0.0;          // outstanding tranche notional
    double protection_paid = 0.0;   // cumulative protection payments
};

TrancheState tranche_state(const Tranche& tranche, const Portfolio& portfolio);

/// Loss distribution of the live names at horizon t conditional on factor z.
LossDistribution conditional_loss_distribution(const Portfolio& portfolio, double t,
                                               const RecoveryModel& model, double rho, double z,
                                               const PricerConfig& config = {});

/// E[tranche_loss(L_crystallized + L(t))].
double expected_tranche_loss(const Portfolio& portfolio, const Tranche& tranche, double t,
                             const RecoveryModel& model, double rho,
                             const PricerConfig& config = {});

/// Long-protection present value and its legs.
struct TranchePv {
    double protection_pv = 0.0;
    double premium_pv = 0.0;
    double pv = 0.0;
    double expected_loss = 0.0;  // expected cumulative tranche loss at maturity
};

TranchePv tranche_pv(const Portfolio& portfolio, const Tranche& tranche,
                     const RecoveryModel& model, double rho, const PricerConfig& config = {});

struct Settlement {
    Portfolio portfolio;
    TrancheState state;
    double protection_payment = 0.0;
};

/// Removes a live name at the given realized recovery. Throws NameError for
/// unknown or already-defaulted names.
Settlement settle_default(const Portfolio& portfolio, const Tranche& tranche,
                          const std::string& name_id, double realized_recovery);

/// Protection payment of the settlement plus the PV of the post-settlement
/// tranche. Settles at market recovery unless a realized recovery is given.
double pv_after_default(const Portfolio& portfolio, const Tranche& tranche,
                        const std::string& name_id, const RecoveryModel& model, double rho,
                        const PricerConfig& config = {},
                        std::optional<double> realized_recovery = std::nullopt);

// ---------------------------------------------------------------------------

template <typename F>
double LossDistribution::expect_with(double q, double amount, F&& f) const {
    const double top = cap + amount;
    const double keep_cap = q > 0.0 ? top : cap;
    double keep = 0.0, low = 0.0, high = 0.0;
    const double units = amount / grid_unit;
    const auto shift = static_cast<Eigen::Index>(std::floor(units));
    const double frac = units - double(shift);
    for (Eigen::Index k = 0; k < probabilities.size(); ++k) {
        const double pk = probabilities[k];
        if (pk == 0.0) continue;
        keep += pk * f(std::min(double(k) * grid_unit, keep_cap));
        if (q > 0.0) {
            low += pk * f(std::min(double(k + shift) * grid_unit, top));
            if (frac > 0.0) high += pk * f(std::min(double(k + shift + 1) * grid_unit, top));
        }
    }
    return (1.0 - q) * keep + q * ((1.0 - frac) * low + frac * high);
}

}  // namespace cdorisk
