#include "cdorisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cdorisk/error.hpp"
#include "engine.hpp"

namespace cdorisk {

struct NameSweep::Impl {
    RiskContext context;
    std::size_t index = 0;
    CreditName name;
    const FactorGrid* grid = nullptr;
    detail::Schedule schedule;
    std::vector<detail::NodeDistributions> others;  // one per schedule date

    std::vector<detail::DateValues> values_with(const CreditName& moved) const {
        std::vector<detail::DateValues> values;
        values.reserve(schedule.times.size());
        const auto& pf = context.portfolio;
        for (std::size_t d = 0; d < schedule.times.size(); ++d) {
            const auto amounts =
                detail::node_amounts(moved, schedule.times[d], context.model, context.rho, *grid);
            values.push_back(detail::date_values(others[d], &amounts, context.tranche, pf,
                                                 pf.cumulative_loss, pf.cumulative_recovered,
                                                 *grid));
        }
        return values;
    }
};

NameSweep::NameSweep(const RiskContext& context, const std::string& name_id)
    : impl_(std::make_unique<Impl>()) {
    validate(context.config);
    validate(context.model);
    validate(context.tranche, context.portfolio);
    auto& s = *impl_;
    s.context = context;
    s.index = context.portfolio.find(name_id);
    if (s.index == context.portfolio.names.size()) {
        throw NameError("risk: " + name_id + " is not a live name");
    }
    s.name = context.portfolio.names[s.index];
    s.grid = &detail::shared_factor_grid(context.config.factor_nodes);
    s.schedule = detail::payment_schedule(context.tranche, context.config);
    const double unit = loss_grid_unit(context.portfolio, context.config);
    const bool with_rec = detail::needs_recovered(context.tranche);
    for (double t : s.schedule.times) {
        s.others.push_back(detail::build_node_distributions(context.portfolio, s.index, t,
                                                            context.model, context.rho, *s.grid,
                                                            unit, with_rec));
    }
}

NameSweep::~NameSweep() = default;
NameSweep::NameSweep(NameSweep&&) noexcept = default;
NameSweep& NameSweep::operator=(NameSweep&&) noexcept = default;

const CreditName& NameSweep::name() const { return impl_->name; }

double NameSweep::pv(double spread) const {
    CreditName moved = impl_->name;
    moved.spread = spread;
    validate(moved);
    return detail::assemble_pv(impl_->context.tranche, impl_->schedule, impl_->values_with(moved),
                               impl_->context.portfolio.cumulative_loss)
        .pv;
}

double NameSweep::pv_after_default(double realized_recovery) const {
    if (!(realized_recovery >= 0.0 && realized_recovery < 1.0)) {
        throw DomainError("pv_after_default: realized recovery must lie in [0,1)");
    }
    const auto& s = *impl_;
    const auto& pf = s.context.portfolio;
    const double loss = pf.cumulative_loss + (1.0 - realized_recovery) * s.name.notional;
    const double recovered = pf.cumulative_recovered + realized_recovery * s.name.notional;
    const double payment =
        tranche_loss(loss, s.context.tranche) - tranche_loss(pf.cumulative_loss, s.context.tranche);
    std::vector<detail::DateValues> values;
    for (std::size_t d = 0; d < s.schedule.times.size(); ++d) {
        values.push_back(detail::date_values(s.others[d], nullptr, s.context.tranche, pf, loss,
                                             recovered, *s.grid));
    }
    return payment + detail::assemble_pv(s.context.tranche, s.schedule, values, loss).pv;
}

double NameSweep::pv_after_default() const {
    return pv_after_default(impl_->name.market_recovery);
}

double NameSweep::vod(double spread) const { return pv_after_default() - pv(spread); }

namespace {

// Stencil endpoints and the factor turning their difference into a per-bp value.
struct Stencil {
    double lo, hi, scale;
};

Stencil stencil(double spread, double bump) {
    constexpr double bp = 1e-4;
    if (spread >= 0.5 * bump) return {spread - 0.5 * bump, spread + 0.5 * bump, bp / bump};
    return {spread, spread + bump, bp / bump};
}

}  // namespace

double NameSweep::cs01(double spread) const {
    const auto st = stencil(spread, impl_->context.spread_bump);
    return (pv(st.hi) - pv(st.lo)) * st.scale;
}

double NameSweep::vod_slope(double spread) const {
    const auto st = stencil(spread, impl_->context.spread_bump);
    return (vod(st.hi) - vod(st.lo)) * st.scale;
}

double credit_spread01(const std::string& name_id, const RiskContext& context) {
    NameSweep sweep(context, name_id);
    return sweep.cs01(sweep.name().spread);
}

double vod(const std::string& name_id, const RiskContext& context) {
    NameSweep sweep(context, name_id);
    return sweep.vod(sweep.name().spread);
}

double recovery01(const std::string& name_id, const RiskContext& context, double d_recovery) {
    NameSweep sweep(context, name_id);
    const double R = sweep.name().market_recovery;
    if (!(R + d_recovery >= 0.0 && R + d_recovery < 1.0)) {
        throw DomainError("recovery01: bumped recovery outside [0,1)");
    }
    return sweep.pv_after_default(R + d_recovery) - sweep.pv_after_default(R);
}

std::vector<VodPoint> vod_curve(const std::string& name_id, const RiskContext& context,
                                const std::vector<double>& probability_grid) {
    NameSweep sweep(context, name_id);
    const double R = sweep.name().market_recovery;
    const double T = context.tranche.maturity;
    const double at_default = sweep.pv_after_default();
    std::vector<VodPoint> curve;
    curve.reserve(probability_grid.size());
    for (double p : probability_grid) {
        if (!(p > 0.0 && p <= context.p_max)) {
            throw DomainError("vod_curve: probabilities must lie in (0, p_max]");
        }
        VodPoint pt;
        pt.probability = p;
        pt.spread = spread_for_probability(p, R, T);
        pt.vod = at_default - sweep.pv(pt.spread);
        if (!curve.empty() && !(pt.spread > curve.back().spread)) {
            throw DomainError("vod_curve: probability grid must be strictly increasing");
        }
        curve.push_back(pt);
    }
    return curve;
}

ContinuityGap continuity_gap(const std::string& name_id, const RiskContext& context) {
    NameSweep sweep(context, name_id);
    const double s = spread_for_probability(context.p_max, sweep.name().market_recovery,
                                            context.tranche.maturity);
    return {sweep.vod(s), context.p_max};
}

double cs01_vod_identity_residual(const std::string& name_id, const RiskContext& context,
                                  const std::vector<double>& spread_grid) {
    NameSweep sweep(context, name_id);
    double worst = 0.0;
    for (std::size_t i = 0; i < spread_grid.size(); ++i) {
        if (i > 0 && !(spread_grid[i] > spread_grid[i - 1])) {
            throw DomainError("cs01_vod_identity_residual: grid must be strictly increasing");
        }
        worst = std::max(worst, std::abs(sweep.cs01(spread_grid[i]) + sweep.vod_slope(spread_grid[i])));
    }
    return worst;
}

double DefaultWalk::sum_vod() const {
    double s = 0.0;
    for (const auto& step : steps) s += step.vod;
    return s;
}

double DefaultWalk::min_vod() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& step : steps) m = std::min(m, step.vod);
    return m;
}

DefaultWalk sequential_default_walk(const RiskContext& context,
                                    const std::vector<std::string>& order) {
    const auto& names = context.portfolio.names;
    std::set<std::string> live, seen;
    for (const auto& n : names) live.insert(n.id);
    for (const auto& id : order) {
        if (!live.count(id) || !seen.insert(id).second) {
            throw NameError("sequential_default_walk: order is not a permutation of live names");
        }
    }
    if (seen.size() != live.size()) {
        throw NameError("sequential_default_walk: order is not a permutation of live names");
    }

    DefaultWalk walk;
    Portfolio state = context.portfolio;
    double pv = tranche_pv(state, context.tranche, context.model, context.rho, context.config).pv;
    walk.initial_pv = pv;
    for (const auto& id : order) {
        const double R = state.names[state.find(id)].market_recovery;
        auto settled = settle_default(state, context.tranche, id, R);
        WalkStep step;
        step.name_id = id;
        step.pv_before = pv;
        step.protection_payment = settled.protection_payment;
        step.pv_after =
            tranche_pv(settled.portfolio, context.tranche, context.model, context.rho, context.config)
                .pv;
        step.vod = step.protection_payment + step.pv_after - step.pv_before;
        walk.total_payments += step.protection_payment;
        walk.steps.push_back(step);
        state = std::move(settled.portfolio);
        pv = step.pv_after;
    }
    walk.terminal_pv = pv;
    return walk;
}

RiskReport risk_report(const RiskContext& context, const std::vector<std::string>& names,
                       const std::vector<double>& probability_grid) {
    RiskReport report;
    report.p_max = context.p_max;
    for (const auto& id : names) {
        NameSweep sweep(context, id);
        const double s = sweep.name().spread;
        report.names.push_back(id);
        report.cs01.push_back(sweep.cs01(s));
        report.vod.push_back(sweep.vod(s));
        report.continuity_gap.push_back(sweep.vod(spread_for_probability(
            context.p_max, sweep.name().market_recovery, context.tranche.maturity)));
    }
    if (!names.empty() && !probability_grid.empty()) {
        report.vod_curve = vod_curve(names.front(), context, probability_grid);
    }
    return report;
}

std::vector<double> default_probability_grid(double p_max) {
    std::vector<double> grid{0.01};
    for (int k = 1; k <= 19; ++k) grid.push_back(0.05 * k);
    for (double p : {0.99, 0.999}) {
        if (p < p_max) grid.push_back(p);
    }
    grid.push_back(p_max);
    return grid;
}

TrioSettings default_trio_settings(const Portfolio& portfolio, double maturity, double p_max) {
    TrioSettings s;
    const double N = portfolio.original_notional;
    s.super_senior = Tranche::from_percent(60, 100, N, maturity);
    s.tranches = {Tranche::from_percent(15, 30, N, maturity), s.super_senior};
    s.p_max = p_max;
    s.probability_grid = default_probability_grid(p_max);
    return s;
}

bool TrioReport::impossible_trio_holds() const {
    return std::none_of(rows.begin(), rows.end(), [](const TrioRow& r) { return r.flags.all(); });
}

std::vector<std::size_t> representative_names(const Portfolio& portfolio) {
    std::vector<std::size_t> reps;
    for (std::size_t i = 0; i < portfolio.names.size(); ++i) {
        const auto& n = portfolio.names[i];
        const bool dup = std::any_of(reps.begin(), reps.end(), [&](std::size_t j) {
            const auto& m = portfolio.names[j];
            return m.spread == n.spread && m.market_recovery == n.market_recovery &&
                   m.notional == n.notional;
        });
        if (!dup) reps.push_back(i);
    }
    return reps;
}

TrioReport trio_report(const Portfolio& portfolio, const std::vector<RecoveryModel>& models,
                       double rho, const PricerConfig& config, const TrioSettings& settings) {
    if (!settings.super_senior.zero_coupon) {
        throw DomainError("trio_report: the super senior probe must be zero-coupon");
    }
    if (!is_super_senior(settings.super_senior, portfolio)) {
        throw DomainError("trio_report: probe tranche is not super senior on this portfolio");
    }
    const auto reps = representative_names(portfolio);
    TrioReport report;
    for (const auto& model : models) {
        TrioRow row;
        row.model = model;
        const auto ss = tranche_pv(portfolio, settings.super_senior, model, rho, config);
        row.super_senior_pv = ss.protection_pv;
        row.flags.risky_super_senior =
            ss.protection_pv > settings.super_senior_threshold * settings.super_senior.notional();

        row.min_cs01 = std::numeric_limits<double>::infinity();
        for (const auto& tranche : settings.tranches) {
            RiskContext ctx{portfolio, tranche, model, rho, config, settings.p_max};
            const double width = tranche.notional();
            for (std::size_t idx : reps) {
                NameSweep sweep(ctx, portfolio.names[idx].id);
                const double R = sweep.name().market_recovery;
                std::vector<std::pair<double, double>> probes;  // (p, spread)
                probes.emplace_back(default_probability(sweep.name(), tranche.maturity),
                                    sweep.name().spread);
                for (double p : settings.probability_grid) {
                    probes.emplace_back(p, spread_for_probability(p, R, tranche.maturity));
                }
                for (const auto& [p, s] : probes) {
                    const double c = sweep.cs01(s) / width;
                    if (c < row.min_cs01) {
                        row.min_cs01 = c;
                        row.min_cs01_probability = p;
                    }
                }
                const double gap =
                    sweep.vod(spread_for_probability(settings.p_max, R, tranche.maturity)) / width;
                row.max_gap = std::max(row.max_gap, std::abs(gap));
            }
        }
        row.flags.positive_cs01 = row.min_cs01 >= -settings.cs01_tolerance;
        row.flags.continuous_on_default = row.max_gap < settings.continuity_threshold;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace cdorisk
