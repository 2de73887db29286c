#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cdorisk/market.hpp"
#include "cdorisk/pricer.hpp"
#include "cdorisk/recovery.hpp"

namespace cdorisk {

/// CSV with header `id,spread_bp,recovery,notional` (any column order, no
/// other columns). Throws ParseError.
Portfolio read_portfolio_csv(std::istream& in);

/// JSON array of {id, spread_bp, recovery, notional}. Throws ParseError.
Portfolio read_portfolio_json(const nlohmann::json& doc);

/// Dispatches on extension: .json is JSON, anything else CSV.
Portfolio load_portfolio(const std::filesystem::path& path);

/// 125 names at 100bp, 40% recovery, notional 0.8.
Portfolio demo_portfolio();

/// Seeded heterogeneous portfolio: spreads 30-800bp, recoveries 20-60%,
/// notionals 0.5-2.
Portfolio random_portfolio(std::uint64_t seed, std::size_t size);

/// `deterministic`, `constant:<x>` or `regularized`, optionally followed by
/// `,alpha=<a>` (default alpha 1).
RecoveryModel parse_model_spec(std::string_view spec);

/// {"kind": "deterministic"} or {"kind": "stochastic", "rm": "constant:<x>" |
/// "regularized", "alpha": a}.
RecoveryModel parse_model_json(const nlohmann::json& doc);

/// "15%" is percent of the original notional, a bare number is currency.
double parse_strike(const nlohmann::json& value, double original_notional);

/// Everything a CLI run needs, after defaults are applied.
struct RunConfig {
    std::optional<std::filesystem::path> portfolio_path;
    Portfolio portfolio;
    Tranche tranche;
    std::vector<RecoveryModel> models;  // first one drives single-model commands
    bool models_given = false;
    double rho = 0.4;
    PricerConfig pricer;
    double p_max = kDefaultPMax;
    std::filesystem::path output_dir = ".";
    std::vector<double> probability_grid;
    std::optional<std::string> name_id;
    std::uint64_t seed = 1;
    std::size_t mc_paths = 1'000'000;
    double figure_recovery = 0.4;
    std::vector<Tranche> oracle_tranches;

    [[nodiscard]] const RecoveryModel& model() const { return models.front(); }
};

/// Overrides supplied on the command line; they win over the config file.
struct CliOverrides {
    std::optional<std::filesystem::path> config_path;
    std::optional<std::filesystem::path> portfolio_path;
    std::optional<std::filesystem::path> output_dir;
    std::vector<std::string> model_specs;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> nodes;
    std::optional<double> p_max;
};

/// Parses a config document (strict: unknown keys rejected) and applies
/// overrides and defaults. Throws ParseError or DomainError.
RunConfig make_run_config(const nlohmann::json& doc, const CliOverrides& overrides);

/// Reads the config file named in the overrides, if any.
RunConfig load_run_config(const CliOverrides& overrides);

}  // namespace cdorisk
