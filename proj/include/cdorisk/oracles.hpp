#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cdorisk/market.hpp"
#include "cdorisk/numerics.hpp"
#include "cdorisk/recovery.hpp"

namespace cdorisk {

struct McConfig {
    std::size_t paths = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t threads = 0;  // 0: hardware concurrency; results do not depend on it
};

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;  // 0 for a single path
    std::size_t paths = 0;
};

/// Monte Carlo expected tranche loss at horizon t. Each path draws the
/// factor, then every name's idiosyncratic latent variable; a name defaults
/// when √ρ z + √(1-ρ) ε < Φ⁻¹(p) and recovers r(z). Every path has its own
/// counter-based stream, so the estimate depends only on (seed, paths).
/// Recovery calibration uses `grid`.
McEstimate mc_tranche_loss(const Portfolio& portfolio, const Tranche& tranche, double t,
                           const RecoveryModel& model, double rho, const McConfig& mc,
                           const FactorGrid& grid);

/// Several tranches priced on the same simulated paths.
std::vector<McEstimate> mc_tranche_losses(const Portfolio& portfolio,
                                          const std::vector<Tranche>& tranches, double t,
                                          const RecoveryModel& model, double rho,
                                          const McConfig& mc, const FactorGrid& grid);

inline constexpr std::size_t kMaxEnumerationNames = 12;

/// Expected tranche loss by summing over all 2^N default sets on every
/// factor node, with exact conditional losses and no loss grid.
/// Throws DomainError for more than 12 live names.
double enumerate_tranche_loss(const Portfolio& portfolio, const Tranche& tranche, double t,
                              const RecoveryModel& model, double rho, const FactorGrid& grid);

}  // namespace cdorisk
