#include "cdorisk/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "cdorisk/copula.hpp"
#include "cdorisk/error.hpp"
#include "engine.hpp"

namespace cdorisk {

void validate(const PricerConfig& config) {
    if (config.factor_nodes < 32) throw DomainError("pricer: factor_nodes must be at least 32");
    if (config.loss_buckets_per_name < 1) {
        throw DomainError("pricer: loss_buckets_per_name must be at least 1");
    }
    if (!std::isfinite(config.discount_rate)) throw DomainError("pricer: discount rate not finite");
    if (!(config.premium_frequency > 0.0)) {
        throw DomainError("pricer: premium frequency must be positive");
    }
}

void LossDistribution::add(double q, double amount) {
    if (q <= 0.0) return;
    const double units = amount / grid_unit;
    const auto shift = static_cast<Eigen::Index>(std::floor(units));
    const double frac = units - double(shift);
    const Eigen::Index old_size = probabilities.size();
    const Eigen::Index new_size = old_size + shift + (frac > 0.0 ? 1 : 0);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(new_size);
    const double stay = 1.0 - q, lo = q * (1.0 - frac), hi = q * frac;
    for (Eigen::Index k = 0; k < old_size; ++k) {
        const double pk = probabilities[k];
        next[k] += stay * pk;
        next[k + shift] += lo * pk;
        if (frac > 0.0) next[k + shift + 1] += hi * pk;
    }
    probabilities = std::move(next);
    cap += amount;
}

double LossDistribution::mean() const {
    double m = 0.0;
    for (Eigen::Index k = 0; k < probabilities.size(); ++k) m += probabilities[k] * double(k);
    return m * grid_unit;
}

double loss_grid_unit(const Portfolio& portfolio, const PricerConfig& config) {
    const auto n = std::max<std::size_t>(portfolio.original_size(), 1);
    return portfolio.original_notional / (double(n) * double(config.loss_buckets_per_name));
}

double tranche_loss(double cumulative_loss, const Tranche& tranche) {
    return std::clamp(cumulative_loss - tranche.attach, 0.0, tranche.detach - tranche.attach);
}

double recovery_writedown(double cumulative_recovered, const Tranche& tranche,
                          double original_notional) {
    return std::clamp(cumulative_recovered - (original_notional - tranche.detach), 0.0,
                      tranche.detach - tranche.attach);
}

TrancheState tranche_state(const Tranche& tranche, const Portfolio& portfolio) {
    TrancheState s;
    s.effective_attach = std::max(0.0, tranche.attach - portfolio.cumulative_loss);
    s.notional = std::max(0.0, std::min(tranche.detach, portfolio.original_notional -
                                                            portfolio.cumulative_recovered) -
                                   std::max(tranche.attach, portfolio.cumulative_loss));
    s.protection_paid = tranche_loss(portfolio.cumulative_loss, tranche);
    return s;
}

namespace detail {

const FactorGrid& shared_factor_grid(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, FactorGrid> grids;
    std::lock_guard lock(mutex);
    auto it = grids.find(n);
    if (it == grids.end()) it = grids.emplace(n, factor_grid(n)).first;
    return it->second;
}

Schedule payment_schedule(const Tranche& tranche, const PricerConfig& config) {
    Schedule s;
    const double T = tranche.maturity;
    if (tranche.zero_coupon && config.discount_rate == 0.0) {
        s.times = {T};
        s.accruals = {T};
    } else {
        const double step = 1.0 / config.premium_frequency;
        double prev = 0.0;
        for (int k = 1;; ++k) {
            double t = double(k) * step;
            if (t > T - 1e-9) t = T;
            s.times.push_back(t);
            s.accruals.push_back(t - prev);
            prev = t;
            if (t == T) break;
        }
    }
    for (double t : s.times) s.discounts.push_back(std::exp(-config.discount_rate * t));
    return s;
}

NodeAmounts node_amounts(const CreditName& name, const CalibratedRecovery& cal, double alpha,
                         double rho, const FactorGrid& grid) {
    NodeAmounts a;
    a.q = conditional_default_prob(cal.p, rho, grid.nodes);
    a.loss.resize(grid.size());
    a.recovered.resize(grid.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double r = conditional_recovery(cal, alpha, grid.nodes[k]);
        a.recovered[k] = r * name.notional;
        a.loss[k] = (1.0 - r) * name.notional;
    }
    return a;
}

NodeAmounts node_amounts(const CreditName& name, double t, const RecoveryModel& model, double rho,
                         const FactorGrid& grid) {
    const double p = default_probability(name, t);
    const auto cal = calibrate(model, p, name.market_recovery, rho, grid);
    return node_amounts(name, cal, model.alpha, rho, grid);
}

NodeDistributions build_node_distributions(const Portfolio& portfolio,
                                           std::optional<std::size_t> skip, double t,
                                           const RecoveryModel& model, double rho,
                                           const FactorGrid& grid, double unit,
                                           bool with_recovered) {
    // Names sharing spread, recovery and notional share their node amounts.
    struct Profile {
        double spread, recovery, notional;
        NodeAmounts amounts;
    };
    std::vector<Profile> profiles;
    std::vector<const NodeAmounts*> per_name;
    for (std::size_t i = 0; i < portfolio.names.size(); ++i) {
        if (skip && *skip == i) continue;
        const auto& n = portfolio.names[i];
        auto it = std::find_if(profiles.begin(), profiles.end(), [&](const Profile& p) {
            return p.spread == n.spread && p.recovery == n.market_recovery &&
                   p.notional == n.notional;
        });
        if (it == profiles.end()) {
            profiles.push_back({n.spread, n.market_recovery, n.notional,
                                node_amounts(n, t, model, rho, grid)});
        }
    }
    for (std::size_t i = 0; i < portfolio.names.size(); ++i) {
        if (skip && *skip == i) continue;
        const auto& n = portfolio.names[i];
        auto it = std::find_if(profiles.begin(), profiles.end(), [&](const Profile& p) {
            return p.spread == n.spread && p.recovery == n.market_recovery &&
                   p.notional == n.notional;
        });
        per_name.push_back(&it->amounts);
    }

    NodeDistributions out;
    const auto nodes = static_cast<std::size_t>(grid.size());
    out.loss.resize(nodes);
    if (with_recovered) out.recovered.resize(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        LossDistribution loss;
        loss.grid_unit = unit;
        for (const NodeAmounts* a : per_name) loss.add(a->q[kk], a->loss[kk]);
        out.loss[k] = std::move(loss);
        if (with_recovered) {
            LossDistribution rec;
            rec.grid_unit = unit;
            for (const NodeAmounts* a : per_name) rec.add(a->q[kk], a->recovered[kk]);
            out.recovered[k] = std::move(rec);
        }
    }
    return out;
}

DateValues date_values(const NodeDistributions& dists, const NodeAmounts* extra,
                       const Tranche& tranche, const Portfolio& portfolio,
                       double crystallized_loss, double crystallized_recovered,
                       const FactorGrid& grid) {
    DateValues v;
    const double orig = portfolio.original_notional;
    auto tl = [&](double L) { return tranche_loss(crystallized_loss + L, tranche); };
    auto wd = [&](double R) { return recovery_writedown(crystallized_recovered + R, tranche, orig); };
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const double w = grid.weights[k];
        if (extra) {
            v.tranche_loss += w * dists.loss[idx].expect_with(extra->q[k], extra->loss[k], tl);
        } else {
            v.tranche_loss += w * dists.loss[idx].expect(tl);
        }
        if (!dists.recovered.empty()) {
            if (extra) {
                v.writedown +=
                    w * dists.recovered[idx].expect_with(extra->q[k], extra->recovered[k], wd);
            } else {
                v.writedown += w * dists.recovered[idx].expect(wd);
            }
        }
    }
    return v;
}

TranchePv assemble_pv(const Tranche& tranche, const Schedule& schedule,
                      const std::vector<DateValues>& values, double crystallized_loss) {
    TranchePv pv;
    double prev = tranche_loss(crystallized_loss, tranche);
    const double width = tranche.detach - tranche.attach;
    const bool premium = needs_recovered(tranche);
    for (std::size_t d = 0; d < schedule.times.size(); ++d) {
        const double df = schedule.discounts[d];
        pv.protection_pv += df * (values[d].tranche_loss - prev);
        prev = values[d].tranche_loss;
        if (premium) {
            const double outstanding = std::max(0.0, width - values[d].tranche_loss - values[d].writedown);
            pv.premium_pv += tranche.coupon * schedule.accruals[d] * df * outstanding;
        }
    }
    pv.expected_loss = prev;
    pv.pv = pv.protection_pv - pv.premium_pv;
    return pv;
}

}  // namespace detail

LossDistribution conditional_loss_distribution(const Portfolio& portfolio, double t,
                                               const RecoveryModel& model, double rho, double z,
                                               const PricerConfig& config) {
    validate(config);
    validate(model);
    const auto& grid = detail::shared_factor_grid(config.factor_nodes);
    LossDistribution dist;
    dist.grid_unit = loss_grid_unit(portfolio, config);
    FactorGrid point;
    point.nodes = Eigen::VectorXd::Constant(1, z);
    point.weights = Eigen::VectorXd::Ones(1);
    for (const auto& name : portfolio.names) {
        const double p = default_probability(name, t);
        const auto cal = calibrate(model, p, name.market_recovery, rho, grid);
        const auto a = detail::node_amounts(name, cal, model.alpha, rho, point);
        dist.add(a.q[0], a.loss[0]);
    }
    return dist;
}

double expected_tranche_loss(const Portfolio& portfolio, const Tranche& tranche, double t,
                             const RecoveryModel& model, double rho, const PricerConfig& config) {
    validate(config);
    validate(model);
    validate(tranche, portfolio);
    const auto& grid = detail::shared_factor_grid(config.factor_nodes);
    const auto dists = detail::build_node_distributions(
        portfolio, std::nullopt, t, model, rho, grid, loss_grid_unit(portfolio, config), false);
    return detail::date_values(dists, nullptr, tranche, portfolio, portfolio.cumulative_loss,
                               portfolio.cumulative_recovered, grid)
        .tranche_loss;
}

TranchePv tranche_pv(const Portfolio& portfolio, const Tranche& tranche,
                     const RecoveryModel& model, double rho, const PricerConfig& config) {
    validate(config);
    validate(model);
    validate(tranche, portfolio);
    const auto& grid = detail::shared_factor_grid(config.factor_nodes);
    const auto schedule = detail::payment_schedule(tranche, config);
    const double unit = loss_grid_unit(portfolio, config);
    const bool with_rec = detail::needs_recovered(tranche);
    std::vector<detail::DateValues> values;
    values.reserve(schedule.times.size());
    for (double t : schedule.times) {
        const auto dists = detail::build_node_distributions(portfolio, std::nullopt, t, model, rho,
                                                            grid, unit, with_rec);
        values.push_back(detail::date_values(dists, nullptr, tranche, portfolio,
                                             portfolio.cumulative_loss,
                                             portfolio.cumulative_recovered, grid));
    }
    return detail::assemble_pv(tranche, schedule, values, portfolio.cumulative_loss);
}

Settlement settle_default(const Portfolio& portfolio, const Tranche& tranche,
                          const std::string& name_id, double realized_recovery) {
    const std::size_t idx = portfolio.find(name_id);
    if (idx == portfolio.names.size()) {
        const bool dead = std::find(portfolio.defaulted.begin(), portfolio.defaulted.end(),
                                    name_id) != portfolio.defaulted.end();
        throw NameError(dead ? "settle_default: name " + name_id + " already defaulted"
                             : "settle_default: unknown name " + name_id);
    }
    if (!(realized_recovery >= 0.0 && realized_recovery < 1.0)) {
        throw DomainError("settle_default: realized recovery must lie in [0,1)");
    }
    Settlement s;
    s.portfolio = portfolio;
    const CreditName name = portfolio.names[idx];
    s.portfolio.names.erase(s.portfolio.names.begin() + static_cast<std::ptrdiff_t>(idx));
    s.portfolio.defaulted.push_back(name.id);
    s.portfolio.cumulative_loss += (1.0 - realized_recovery) * name.notional;
    s.portfolio.cumulative_recovered += realized_recovery * name.notional;
    s.protection_payment = tranche_loss(s.portfolio.cumulative_loss, tranche) -
                           tranche_loss(portfolio.cumulative_loss, tranche);
    s.state = tranche_state(tranche, s.portfolio);
    return s;
}

double pv_after_default(const Portfolio& portfolio, const Tranche& tranche,
                        const std::string& name_id, const RecoveryModel& model, double rho,
                        const PricerConfig& config, std::optional<double> realized_recovery) {
    const std::size_t idx = portfolio.find(name_id);
    const double realized = realized_recovery.value_or(
        idx < portfolio.names.size() ? portfolio.names[idx].market_recovery : 0.0);
    const auto s = settle_default(portfolio, tranche, name_id, realized);
    return s.protection_payment + tranche_pv(s.portfolio, tranche, model, rho, config).pv;
}

}  // namespace cdorisk
