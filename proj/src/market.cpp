#include "cdorisk/market.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cdorisk/error.hpp"

namespace cdorisk {

void validate(const CreditName& name) {
    if (!(name.spread >= 0.0) || !std::isfinite(name.spread)) {
        throw DomainError("name " + name.id + ": spread must be finite and nonnegative");
    }
    if (!(name.market_recovery >= 0.0 && name.market_recovery < 1.0)) {
        throw DomainError("name " + name.id + ": market recovery must lie in [0,1)");
    }
    if (!(name.notional > 0.0) || !std::isfinite(name.notional)) {
        throw DomainError("name " + name.id + ": notional must be positive");
    }
}

Portfolio Portfolio::from_names(std::vector<CreditName> names) {
    Portfolio p;
    p.names = std::move(names);
    p.original_notional = p.live_notional();
    validate(p);
    return p;
}

double Portfolio::live_notional() const {
    return std::accumulate(names.begin(), names.end(), 0.0,
                           [](double s, const CreditName& n) { return s + n.notional; });
}

std::size_t Portfolio::find(const std::string& id) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].id == id) return i;
    }
    return names.size();
}

double Portfolio::max_loss_at_market_recovery() const {
    double loss = cumulative_loss;
    for (const auto& n : names) loss += (1.0 - n.market_recovery) * n.notional;
    return loss;
}

void validate(const Portfolio& portfolio) {
    if (!(portfolio.original_notional > 0.0)) {
        throw DomainError("portfolio: original notional must be positive");
    }
    if (portfolio.cumulative_loss < 0.0 || portfolio.cumulative_recovered < 0.0) {
        throw DomainError("portfolio: cumulative loss and recovery must be nonnegative");
    }
    for (std::size_t i = 0; i < portfolio.names.size(); ++i) {
        validate(portfolio.names[i]);
        for (std::size_t j = 0; j < i; ++j) {
            if (portfolio.names[j].id == portfolio.names[i].id) {
                throw DomainError("portfolio: duplicate name id " + portfolio.names[i].id);
            }
        }
    }
    const double total =
        portfolio.cumulative_loss + portfolio.cumulative_recovered + portfolio.live_notional();
    if (std::abs(total - portfolio.original_notional) > 1e-9 * portfolio.original_notional) {
        throw DomainError("portfolio: loss + recovered + live notional != original notional");
    }
}

Tranche Tranche::from_percent(double attach_pct, double detach_pct, double original_notional,
                              double maturity, double coupon) {
    Tranche t;
    t.attach = attach_pct / 100.0 * original_notional;
    t.detach = detach_pct / 100.0 * original_notional;
    t.maturity = maturity;
    t.coupon = coupon;
    t.zero_coupon = coupon == 0.0;
    return t;
}

void validate(const Tranche& tranche, const Portfolio& portfolio) {
    if (!(tranche.attach >= 0.0 && tranche.attach < tranche.detach)) {
        throw DomainError("tranche: need 0 <= attach < detach");
    }
    if (tranche.detach > portfolio.original_notional * (1.0 + 1e-12)) {
        throw DomainError("tranche: detach exceeds the portfolio's original notional");
    }
    if (!(tranche.maturity > 0.0)) throw DomainError("tranche: maturity must be positive");
    if (tranche.coupon < 0.0) throw DomainError("tranche: coupon must be nonnegative");
    if (tranche.zero_coupon && tranche.coupon != 0.0) {
        throw DomainError("tranche: zero-coupon tranche with nonzero coupon");
    }
}

bool is_super_senior(const Tranche& tranche, const Portfolio& portfolio) {
    return tranche.attach >= portfolio.max_loss_at_market_recovery();
}

CreditCurve curve_from_spread(double spread, double market_recovery) {
    if (!(market_recovery < 1.0)) throw DomainError("curve_from_spread: recovery must be < 1");
    if (!(spread >= 0.0)) throw DomainError("curve_from_spread: spread must be nonnegative");
    return CreditCurve{spread / (1.0 - market_recovery)};
}

double default_probability(const CreditCurve& curve, double t) {
    if (!(t >= 0.0)) throw DomainError("default_probability: negative time");
    return -std::expm1(-curve.hazard * t);
}

double spread_for_probability(double p, double market_recovery, double t) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw DomainError("spread_for_probability: p must lie in [0,1); use the near-default cap");
    }
    if (!(t > 0.0)) throw DomainError("spread_for_probability: t must be positive");
    if (!(market_recovery < 1.0)) throw DomainError("spread_for_probability: recovery must be < 1");
    return -(1.0 - market_recovery) * std::log1p(-p) / t;
}

double default_probability(const CreditName& name, double t) {
    return default_probability(curve_from_spread(name.spread, name.market_recovery), t);
}

}  // namespace cdorisk
