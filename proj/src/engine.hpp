#pragma once

// Machinery shared by the pricer and the risk engine.

#include <cstddef>
#include <optional>
#include <vector>

#include "cdorisk/pricer.hpp"

namespace cdorisk::detail {

/// Factor grid of the requested size, built once per size.
const FactorGrid& shared_factor_grid(std::size_t n);

struct Schedule {
    std::vector<double> times;
    std::vector<double> accruals;
    std::vector<double> discounts;
};

/// Quarterly (premium_frequency) dates up to maturity, last period possibly
/// short. A zero-coupon tranche at zero rate collapses to the maturity date,
/// since discounted loss increments then telescope.
Schedule payment_schedule(const Tranche& tranche, const PricerConfig& config);

/// Premium leg needs the distribution of recovered notional too.
inline bool needs_recovered(const Tranche& tranche) {
    return !tranche.zero_coupon && tranche.coupon > 0.0;
}

/// Conditional default probability and loss / recovered amounts on each node.
struct NodeAmounts {
    Eigen::VectorXd q;
    Eigen::VectorXd loss;
    Eigen::VectorXd recovered;
};

NodeAmounts node_amounts(const CreditName& name, const CalibratedRecovery& cal, double alpha,
                         double rho, const FactorGrid& grid);

NodeAmounts node_amounts(const CreditName& name, double t, const RecoveryModel& model, double rho,
                         const FactorGrid& grid);

/// Per-node conditional distributions at one horizon.
struct NodeDistributions {
    std::vector<LossDistribution> loss;
    std::vector<LossDistribution> recovered;  // empty unless requested
};

NodeDistributions build_node_distributions(const Portfolio& portfolio,
                                           std::optional<std::size_t> skip, double t,
                                           const RecoveryModel& model, double rho,
                                           const FactorGrid& grid, double unit,
                                           bool with_recovered);

/// Expected tranche loss and expected recovery write-down at one date.
struct DateValues {
    double tranche_loss = 0.0;
    double writedown = 0.0;
};

/// Expectations over the factor of the tranche payoffs, for the given
/// distributions plus an optional extra name (given by its node amounts).
DateValues date_values(const NodeDistributions& dists, const NodeAmounts* extra,
                       const Tranche& tranche, const Portfolio& portfolio,
                       double crystallized_loss, double crystallized_recovered,
                       const FactorGrid& grid);

/// Combines per-date expectations into leg PVs.
TranchePv assemble_pv(const Tranche& tranche, const Schedule& schedule,
                      const std::vector<DateValues>& values, double crystallized_loss);

}  // namespace cdorisk::detail
