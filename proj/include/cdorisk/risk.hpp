#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "cdorisk/market.hpp"
#include "cdorisk/pricer.hpp"
#include "cdorisk/recovery.hpp"

namespace cdorisk {

/// Everything a single-name risk measure is computed against.
struct RiskContext {
    Portfolio portfolio;
    Tranche tranche;
    RecoveryModel model;
    double rho = 0.0;
    PricerConfig config;
    double p_max = kDefaultPMax;
    double spread_bump = 1e-4;  // total central-difference width (1bp)
};

/// Reprices one tranche while a single name's spread moves and every other
/// name stays put. The conditional distributions of the other names are
/// built once; each reprice then folds the moving name in on every node.
/// PV after the name's default reuses the same distributions, so it cannot
/// depend on the name's pre-default spread.
class NameSweep {
public:
    NameSweep(const RiskContext& context, const std::string& name_id);
    ~NameSweep();
    NameSweep(NameSweep&&) noexcept;
    NameSweep& operator=(NameSweep&&) noexcept;

    [[nodiscard]] const CreditName& name() const;

    /// Tranche PV with the name's spread set to `spread`. Recovery is
    /// recalibrated at the bumped default probabilities.
    [[nodiscard]] double pv(double spread) const;
    /// Protection payment plus PV after the name settles at the given recovery.
    [[nodiscard]] double pv_after_default(double realized_recovery) const;
    [[nodiscard]] double pv_after_default() const;
    /// pv_after_default() - pv(spread).
    [[nodiscard]] double vod(double spread) const;
    /// PV change per 1bp of spread, central difference (forward near zero).
    [[nodiscard]] double cs01(double spread) const;
    /// VOD change per 1bp over the same stencil as cs01().
    [[nodiscard]] double vod_slope(double spread) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double credit_spread01(const std::string& name_id, const RiskContext& context);

double vod(const std::string& name_id, const RiskContext& context);

/// pv_after_default at market recovery + dR minus the same at market recovery.
double recovery01(const std::string& name_id, const RiskContext& context, double d_recovery = 0.01);

struct VodPoint {
    double probability = 0.0;  // default probability to maturity
    double spread = 0.0;
    double vod = 0.0;
};

/// VOD as the name's default probability to maturity sweeps the grid.
std::vector<VodPoint> vod_curve(const std::string& name_id, const RiskContext& context,
                                const std::vector<double>& probability_grid);

struct ContinuityGap {
    double gap = 0.0;
    double p_max = kDefaultPMax;
};

/// VOD with the name pushed to the near-default cap.
ContinuityGap continuity_gap(const std::string& name_id, const RiskContext& context);

/// max over the grid of |CS01 + dVOD/ds| on matching stencils.
double cs01_vod_identity_residual(const std::string& name_id, const RiskContext& context,
                                  const std::vector<double>& spread_grid);

struct WalkStep {
    std::string name_id;
    double pv_before = 0.0;
    double protection_payment = 0.0;
    double pv_after = 0.0;  // PV of the post-settlement tranche, excluding the payment
    double vod = 0.0;
};

struct DefaultWalk {
    double initial_pv = 0.0;
    double terminal_pv = 0.0;
    double total_payments = 0.0;
    std::vector<WalkStep> steps;

    [[nodiscard]] double sum_vod() const;
    [[nodiscard]] double min_vod() const;
};

/// Defaults names one at a time at market recovery, each VOD measured
/// against the tranche as left by the previous defaults.
DefaultWalk sequential_default_walk(const RiskContext& context,
                                    const std::vector<std::string>& order);

/// Per-name measures on one tranche.
struct RiskReport {
    std::vector<std::string> names;
    std::vector<double> cs01;
    std::vector<double> vod;
    std::vector<double> continuity_gap;
    std::vector<VodPoint> vod_curve;  // for the first name
    double p_max = kDefaultPMax;
};

RiskReport risk_report(const RiskContext& context, const std::vector<std::string>& names,
                       const std::vector<double>& probability_grid);

struct TrioFlags {
    bool risky_super_senior = false;
    bool positive_cs01 = false;
    bool continuous_on_default = false;

    [[nodiscard]] bool all() const {
        return risky_super_senior && positive_cs01 && continuous_on_default;
    }
    bool operator==(const TrioFlags&) const = default;
};

struct TrioSettings {
    Tranche super_senior;              // zero-coupon
    std::vector<Tranche> tranches;     // where CS01 and continuity are probed
    std::vector<double> probability_grid;
    double p_max = kDefaultPMax;
    double super_senior_threshold = 1e-6;  // x tranche notional
    double continuity_threshold = 1e-4;    // x tranche notional
    double cs01_tolerance = 1e-10;         // x tranche notional
};

/// Settings over the default 15-30% / 60-100% zero-coupon tranches.
TrioSettings default_trio_settings(const Portfolio& portfolio, double maturity = 5.0,
                                   double p_max = kDefaultPMax);

/// Default probing grid {0.01, 0.05, 0.10, ..., 0.95, 0.99, 0.999, p_max}.
std::vector<double> default_probability_grid(double p_max = kDefaultPMax);

struct TrioRow {
    RecoveryModel model;
    TrioFlags flags;
    double super_senior_pv = 0.0;
    double min_cs01 = 0.0;  // relative to the probing tranche's notional
    double min_cs01_probability = 0.0;
    double max_gap = 0.0;   // |gap| relative to the probing tranche's notional
};

struct TrioReport {
    std::vector<TrioRow> rows;
    /// No row has all three properties.
    [[nodiscard]] bool impossible_trio_holds() const;
};

TrioReport trio_report(const Portfolio& portfolio, const std::vector<RecoveryModel>& models,
                       double rho, const PricerConfig& config, const TrioSettings& settings);

/// Indices of names with distinct (spread, recovery, notional); names in one
/// class are interchangeable for any single-name measure.
std::vector<std::size_t> representative_names(const Portfolio& portfolio);

}  // namespace cdorisk
