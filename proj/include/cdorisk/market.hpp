#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cdorisk {

/// One issuer: flat spread (decimal per year), market recovery and notional.
struct CreditName {
    std::string id;
    double spread = 0.0;
    double market_recovery = 0.4;
    double notional = 1.0;
};

/// Throws DomainError unless spread >= 0, 0 <= recovery < 1 and notional > 0.
void validate(const CreditName& name);

/// Live names plus the crystallized effect of past settlements. Losses are
/// written up from the bottom of the capital structure, recovered amounts
/// written down from the top.
struct Portfolio {
    std::vector<CreditName> names;
    std::vector<std::string> defaulted;
    double cumulative_loss = 0.0;
    double cumulative_recovered = 0.0;
    double original_notional = 0.0;

    /// Fresh portfolio; original notional is the sum of the names' notionals.
    static Portfolio from_names(std::vector<CreditName> names);

    [[nodiscard]] double live_notional() const;
    [[nodiscard]] std::size_t original_size() const { return names.size() + defaulted.size(); }
    /// Index of a live name, or names.size() if absent.
    [[nodiscard]] std::size_t find(const std::string& id) const;
    /// Total loss if every live name defaults at market recovery, on top of
    /// what has already been lost.
    [[nodiscard]] double max_loss_at_market_recovery() const;
};

/// Throws DomainError on any broken invariant, including notional conservation.
void validate(const Portfolio& portfolio);

/// Tranche [attach, detach] in currency on the portfolio's original notional.
struct Tranche {
    double attach = 0.0;
    double detach = 0.0;
    double maturity = 5.0;
    double coupon = 0.0;
    bool zero_coupon = true;

    [[nodiscard]] double notional() const { return detach - attach; }
    /// Strikes given in percent of the original notional.
    static Tranche from_percent(double attach_pct, double detach_pct, double original_notional,
                                double maturity = 5.0, double coupon = 0.0);
};

void validate(const Tranche& tranche, const Portfolio& portfolio);

/// Super senior in the sense that default of every live name at market
/// recovery leaves the attachment untouched.
[[nodiscard]] bool is_super_senior(const Tranche& tranche, const Portfolio& portfolio);

/// Flat hazard-rate curve.
struct CreditCurve {
    double hazard = 0.0;
};

/// Near-default cap standing in for an infinite spread.
inline constexpr double kDefaultPMax = 1.0 - 1e-4;

/// Credit triangle: hazard = spread / (1 - R).
CreditCurve curve_from_spread(double spread, double market_recovery);

/// 1 - exp(-hazard t).
double default_probability(const CreditCurve& curve, double t);

/// Spread whose flat curve gives default probability p at time t.
double spread_for_probability(double p, double market_recovery, double t);

/// Shorthand for default_probability(curve_from_spread(name), t).
double default_probability(const CreditName& name, double t);

}  // namespace cdorisk
