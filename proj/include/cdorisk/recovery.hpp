#pragma once

#include <optional>
#include <string>
#include <variant>

#include "cdorisk/numerics.hpp"

namespace cdorisk {

/// Recovery regime. Stochastic recovery follows the Andersen-Sidenius form
/// r(z) = R_m Φ(αz + β), with R_m either a constant or the regularized
/// function of the name's default probability.
struct RecoveryModel {
    enum class Kind { deterministic, stochastic };
    struct Constant {
        double value = 1.0;
    };
    struct Regularized {};
    using RmRule = std::variant<Constant, Regularized>;

    Kind kind = Kind::deterministic;
    double alpha = 0.0;
    RmRule rm = Constant{};

    static RecoveryModel deterministic() { return {}; }
    static RecoveryModel constant(double r_m, double alpha = 1.0) {
        return {Kind::stochastic, alpha, Constant{r_m}};
    }
    static RecoveryModel regularized(double alpha = 1.0) {
        return {Kind::stochastic, alpha, Regularized{}};
    }

    [[nodiscard]] bool is_deterministic() const { return kind == Kind::deterministic; }
    [[nodiscard]] bool is_regularized() const {
        return kind == Kind::stochastic && std::holds_alternative<Regularized>(rm);
    }
    /// R_m for a name with default probability p and market recovery R.
    [[nodiscard]] double rm_for(double p, double market_recovery) const;
    /// Short human-readable tag, e.g. "constant:1,alpha=1".
    [[nodiscard]] std::string label() const;
};

void validate(const RecoveryModel& model);

/// Calibrated single-name recovery at one horizon. An empty beta is the
/// β = +∞ state in which recovery is fixed at market recovery.
struct CalibratedRecovery {
    std::optional<double> beta;
    double r_m_effective = 0.0;
    double p = 0.0;
    double market_recovery = 0.0;

    [[nodiscard]] bool at_infinity() const { return !beta.has_value(); }
};

/// R_m(p) = 1 - (1-R) max(0, (R - (1-p)) / (R p)). Equal to 1 up to p = 1-R,
/// then decreasing to R at p = 1.
double rm_regularized(double p, double market_recovery);

/// Solves E_z[p(z) r_m Φ(αz + β)] = p R for β on the given grid.
/// r_m == R (within 1e-12) or p == 0 give the β = +∞ state.
/// Throws InfeasibleCalibration when r_m < R.
CalibratedRecovery calibrate_beta(double p, double market_recovery, double r_m, double alpha,
                                  double rho, const FactorGrid& grid);

/// Calibration under a model; deterministic models always give β = +∞.
CalibratedRecovery calibrate(const RecoveryModel& model, double p, double market_recovery,
                             double rho, const FactorGrid& grid);

/// E[r | default, z]: r_m Φ(αz + β), or market recovery when β = +∞.
double conditional_recovery(const CalibratedRecovery& cal, double alpha, double z);

/// Residual E_z[p(z) r(z)] - p R of a calibration.
double consistency_residual(const CalibratedRecovery& cal, double alpha, double rho,
                            const FactorGrid& grid);

/// Variance of realized recovery conditional on default.
double recovery_variance_given_default(double p, double market_recovery,
                                       const RecoveryModel& model, double rho,
                                       const FactorGrid& grid);

}  // namespace cdorisk
