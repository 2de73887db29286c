#include "cdorisk/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "cdorisk/appendix.hpp"
#include "cdorisk/error.hpp"
#include "cdorisk/oracles.hpp"
#include "cdorisk/pricer.hpp"
#include "cdorisk/recovery.hpp"
#include "cdorisk/risk.hpp"

namespace cdorisk {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

class Csv {
public:
    explicit Csv(std::initializer_list<std::string_view> header) {
        bool first = true;
        for (auto h : header) {
            if (!first) os_ << ',';
            os_ << h;
            first = false;
        }
        os_ << '\n';
    }
    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            if (!first) os_ << ',';
            os_ << format_number(v);
            first = false;
        }
        os_ << '\n';
    }
    void row(const std::string& label, std::initializer_list<double> values) {
        os_ << label;
        for (double v : values) os_ << ',' << format_number(v);
        os_ << '\n';
    }
    [[nodiscard]] std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

RiskContext context_for(const RunConfig& rc, const RecoveryModel& model) {
    RiskContext ctx;
    ctx.portfolio = rc.portfolio;
    ctx.tranche = rc.tranche;
    ctx.model = model;
    ctx.rho = rc.rho;
    ctx.config = rc.pricer;
    ctx.p_max = rc.p_max;
    return ctx;
}

const std::string& subject_name(const RunConfig& rc) {
    if (rc.name_id) {
        if (rc.portfolio.find(*rc.name_id) == rc.portfolio.names.size()) {
            throw ParseError("unknown name '" + *rc.name_id + "'");
        }
        return *rc.name_id;
    }
    return rc.portfolio.names.front().id;
}

std::vector<double> probability_grid(const RunConfig& rc) {
    auto grid = rc.probability_grid.empty() ? default_probability_grid(rc.p_max) : rc.probability_grid;
    for (double p : grid) {
        if (!(p > 0.0 && p <= rc.p_max)) throw ParseError("probability grid must lie in (0, p_max]");
    }
    return grid;
}

/// The three models of the figures: deterministic, the first non-regularized
/// stochastic model given, the first regularized one. Missing ones default to
/// Constant(1) and regularized at the other's alpha (1 if neither is given).
struct FigureModels {
    RecoveryModel deterministic = RecoveryModel::deterministic();
    RecoveryModel unregularized;
    RecoveryModel regularized;
    bool any_stochastic = false;
};

FigureModels figure_models(const RunConfig& rc) {
    const RecoveryModel* unreg = nullptr;
    const RecoveryModel* reg = nullptr;
    for (const auto& m : rc.models) {
        if (m.is_regularized() && !reg) reg = &m;
        if (!m.is_deterministic() && !m.is_regularized() && !unreg) unreg = &m;
    }
    FigureModels f;
    const double alpha = unreg ? unreg->alpha : reg ? reg->alpha : 1.0;
    f.unregularized = unreg ? *unreg : RecoveryModel::constant(1.0, alpha);
    f.regularized = reg ? *reg : RecoveryModel::regularized(alpha);
    f.any_stochastic = !rc.models_given || unreg || reg;
    return f;
}

std::string pattern(const TrioFlags& f) {
    auto yn = [](bool b) { return b ? "Yes" : "No"; };
    return std::string("(") + yn(f.risky_super_senior) + "," + yn(f.positive_cs01) + "," +
           yn(f.continuous_on_default) + ")";
}

TrioFlags expected_flags(const RecoveryModel& m) {
    if (m.is_deterministic()) return {false, true, true};
    if (m.is_regularized()) return {true, false, true};
    return {true, true, false};
}

ordered_json tranche_json(const Tranche& t, double original_notional) {
    return {{"attach", t.attach},
            {"detach", t.detach},
            {"attach_pct", 100.0 * t.attach / original_notional},
            {"detach_pct", 100.0 * t.detach / original_notional},
            {"maturity", t.maturity},
            {"coupon", t.coupon}};
}

std::vector<Tranche> oracle_tranches(const RunConfig& rc, const Portfolio& pf) {
    if (!rc.oracle_tranches.empty()) {
        // strikes were resolved against the configured portfolio; keep percents
        std::vector<Tranche> out;
        for (auto t : rc.oracle_tranches) {
            const double scale = pf.original_notional / rc.portfolio.original_notional;
            t.attach *= scale;
            t.detach *= scale;
            out.push_back(t);
        }
        return out;
    }
    const double N = pf.original_notional, T = rc.tranche.maturity;
    return {Tranche::from_percent(0, 3, N, T), Tranche::from_percent(3, 15, N, T),
            Tranche::from_percent(15, 30, N, T), Tranche::from_percent(60, 100, N, T)};
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
    (void)ec;
    return std::string(buf, ptr);
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"price",   "cs01",    "vod-curve",
                                                "trio-report", "figure1", "figure2",
                                                "figure4", "appendix-verify", "oracle-check"};
    return names;
}

CommandOutput cmd_price(const RunConfig& rc) {
    const auto pv = tranche_pv(rc.portfolio, rc.tranche, rc.model(), rc.rho, rc.pricer);
    ordered_json j{{"protection_pv", pv.protection_pv},
                   {"premium_pv", pv.premium_pv},
                   {"pv", pv.pv},
                   {"expected_loss", pv.expected_loss}};
    return {"price.json", dump(j), {}};
}

CommandOutput cmd_cs01(const RunConfig& rc) {
    const auto ctx = context_for(rc, rc.model());
    std::vector<const CreditName*> names;
    if (rc.name_id) {
        names.push_back(&rc.portfolio.names[rc.portfolio.find(subject_name(rc))]);
    } else {
        for (const auto& n : rc.portfolio.names) names.push_back(&n);
    }
    // Names with identical terms share one computation.
    std::map<std::tuple<double, double, double>, double> cache;
    Csv csv{"name", "spread_bp", "cs01"};
    for (const auto* n : names) {
        const auto key = std::make_tuple(n->spread, n->market_recovery, n->notional);
        auto it = cache.find(key);
        if (it == cache.end()) {
            NameSweep sweep(ctx, n->id);
            it = cache.emplace(key, sweep.cs01(n->spread)).first;
        }
        csv.row(n->id, {n->spread * 1e4, it->second});
    }
    return {"cs01.csv", csv.str(), {}};
}

CommandOutput cmd_vod_curve(const RunConfig& rc) {
    const auto curve = vod_curve(subject_name(rc), context_for(rc, rc.model()), probability_grid(rc));
    Csv csv{"probability", "spread_bp", "vod"};
    for (const auto& pt : curve) csv.row({pt.probability, pt.spread * 1e4, pt.vod});
    return {"vod_curve.csv", csv.str(), {}};
}

CommandOutput cmd_trio(const RunConfig& rc, bool check) {
    std::vector<RecoveryModel> models = rc.models;
    if (!rc.models_given) {
        models = {RecoveryModel::deterministic(), RecoveryModel::constant(1.0, 1.0),
                  RecoveryModel::regularized(1.0)};
    }
    auto settings = default_trio_settings(rc.portfolio, rc.tranche.maturity, rc.p_max);
    if (!rc.probability_grid.empty()) settings.probability_grid = probability_grid(rc);
    const auto report = trio_report(rc.portfolio, models, rc.rho, rc.pricer, settings);

    CommandOutput out{"trio_report.json", {}, {}};
    ordered_json rows = ordered_json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"model", r.model.label()},
                        {"risky_super_senior", r.flags.risky_super_senior},
                        {"positive_cs01", r.flags.positive_cs01},
                        {"continuous_on_default", r.flags.continuous_on_default},
                        {"pattern", pattern(r.flags)},
                        {"super_senior_pv", r.super_senior_pv},
                        {"min_cs01_relative", r.min_cs01},
                        {"min_cs01_probability", r.min_cs01_probability},
                        {"max_gap_relative", r.max_gap}});
        if (!check) continue;
        const auto want = expected_flags(r.model);
        auto expect = [&](bool got, bool wanted, const char* flag) {
            if (got != wanted) {
                out.violations.push_back(r.model.label() + ": " + flag + " is " +
                                         (got ? "Yes" : "No") + ", expected " +
                                         (wanted ? "Yes" : "No"));
            }
        };
        expect(r.flags.risky_super_senior, want.risky_super_senior, "risky_super_senior");
        expect(r.flags.positive_cs01, want.positive_cs01, "positive_cs01");
        expect(r.flags.continuous_on_default, want.continuous_on_default, "continuous_on_default");
    }
    if (check && !report.impossible_trio_holds()) {
        out.violations.push_back("impossible_trio: a model has all three properties");
    }
    ordered_json j{{"correlation", rc.rho},
                   {"p_max", settings.p_max},
                   {"super_senior", tranche_json(settings.super_senior, rc.portfolio.original_notional)},
                   {"thresholds",
                    {{"super_senior", settings.super_senior_threshold},
                     {"continuity", settings.continuity_threshold},
                     {"cs01", settings.cs01_tolerance}}},
                   {"rows", rows},
                   {"impossible_trio_holds", report.impossible_trio_holds()}};
    if (check) j["violations"] = out.violations;
    out.body = dump(j);
    return out;
}

CommandOutput cmd_figure1(const RunConfig& rc) {
    const auto models = figure_models(rc);
    const auto& grid = factor_grid(rc.pricer.factor_nodes);
    std::vector<double> ps = rc.probability_grid;
    if (ps.empty()) {
        for (int k = 1; k <= 99; ++k) ps.push_back(0.01 * k);
        ps.insert(ps.end(), {0.995, 0.999, 1.0});
    }
    Csv csv{"p", "var_unregularized", "var_regularized"};
    for (double p : ps) {
        if (!models.any_stochastic) {
            csv.row({p, 0.0, 0.0});
            continue;
        }
        csv.row({p,
                 recovery_variance_given_default(p, rc.figure_recovery, models.unregularized, rc.rho, grid),
                 recovery_variance_given_default(p, rc.figure_recovery, models.regularized, rc.rho, grid)});
    }
    return {"figure1.csv", csv.str(), {}};
}

CommandOutput cmd_figure2(const RunConfig& rc) {
    const auto models = figure_models(rc);
    const auto grid = probability_grid(rc);
    const auto& name = subject_name(rc);
    const auto det = vod_curve(name, context_for(rc, models.deterministic), grid);
    const auto unreg = vod_curve(name, context_for(rc, models.unregularized), grid);
    const auto reg = vod_curve(name, context_for(rc, models.regularized), grid);
    Csv csv{"spread", "vod_deterministic", "vod_unregularized", "vod_regularized"};
    for (std::size_t i = 0; i < det.size(); ++i) {
        csv.row({det[i].spread * 1e4, det[i].vod, unreg[i].vod, reg[i].vod});
    }
    return {"figure2.csv", csv.str(), {}};
}

CommandOutput cmd_figure4(const RunConfig& rc) {
    const double R = rc.figure_recovery;
    if (!(R > 0.0 && R < 1.0)) throw ParseError("figure4: recovery must lie in (0,1)");
    std::vector<double> ps = rc.probability_grid;
    if (ps.empty()) {
        for (int k = 0; k <= 100; ++k) ps.push_back(0.01 * k);
    }
    Csv csv{"p", "rm"};
    for (double p : ps) csv.row({p, rm_regularized(p, R)});
    return {"figure4.csv", csv.str(), {}};
}

CommandOutput cmd_appendix_verify(const RunConfig& rc) {
    auto settings = AppendixSettings::defaults();
    settings.seed = rc.seed;
    const auto report = verify_appendix(settings, factor_grid(rc.pricer.factor_nodes));
    const auto& s = report.scan;

    CommandOutput out{"appendix.json", {}, {}};
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) out.violations.push_back(what);
    };
    require(s.min_vod >= -1e-6, "proposition1: simplified VOD below -1e-6");
    require(s.min_claim2 >= -1e-12, "claim2: alpha-limit VOD below -1e-12");
    require(s.min_claim1_margin >= -1e-8, "claim1: simplified VOD below the alpha limit");
    require(report.lemma1_max_residual < 1e-8, "lemma1: residual above 1e-8");
    require(report.lemma3_max_excess <= 1e-12, "lemma3: variance above (m-a)(b-m)");

    ordered_json j{
        {"proposition1",
         {{"min_vod", s.min_vod},
          {"argmin",
           {{"p", s.argmin.p},
            {"market_recovery", s.argmin.market_recovery},
            {"r_m", s.argmin.r_m},
            {"alpha", s.argmin.alpha},
            {"rho", s.argmin.rho}}},
          {"points", s.points}}},
        {"claim1_min_margin", s.min_claim1_margin},
        {"claim2_min_limit", s.min_claim2},
        {"lemma1_max_residual", report.lemma1_max_residual},
        {"lemma1_draws", report.lemma1_draws},
        {"lemma2_max_error", s.max_lemma2_error},
        {"lemma3_max_excess", report.lemma3_max_excess},
        {"lemma3_draws", report.lemma3_draws},
        {"variance_monotone_in_alpha", s.variance_monotone_in_alpha},
        {"seed", settings.seed},
        {"violations", out.violations},
        {"ok", out.violations.empty()}};
    out.body = dump(j);
    return out;
}

CommandOutput cmd_oracle_check(const RunConfig& rc) {
    const auto& grid = factor_grid(rc.pricer.factor_nodes);
    CommandOutput out{"oracle_check.json", {}, {}};
    const double T = rc.tranche.maturity;

    // Enumeration needs a small book: the configured one if it is small,
    // otherwise a seeded random 8-name portfolio.
    const bool small = rc.portfolio.names.size() <= kMaxEnumerationNames;
    const Portfolio enum_pf = small ? rc.portfolio : random_portfolio(rc.seed, 8);
    const double unit = loss_grid_unit(enum_pf, rc.pricer);

    ordered_json enumeration = ordered_json::array();
    ordered_json monte_carlo = ordered_json::array();
    for (const auto& model : rc.models) {
        for (const auto& t : oracle_tranches(rc, enum_pf)) {
            const double semi = expected_tranche_loss(enum_pf, t, T, model, rc.rho, rc.pricer);
            const double exact = enumerate_tranche_loss(enum_pf, t, T, model, rc.rho, grid);
            const double diff = semi - exact;
            const bool ok = std::abs(diff) <= unit;
            if (!ok) out.violations.push_back("enumeration " + model.label());
            enumeration.push_back({{"model", model.label()},
                                   {"tranche", tranche_json(t, enum_pf.original_notional)},
                                   {"semi_analytic", semi},
                                   {"enumeration", exact},
                                   {"diff", diff},
                                   {"tolerance", unit},
                                   {"ok", ok}});
        }

        const auto tranches = oracle_tranches(rc, rc.portfolio);
        McConfig mc;
        mc.paths = rc.mc_paths;
        mc.seed = rc.seed;
        const auto est = mc_tranche_losses(rc.portfolio, tranches, T, model, rc.rho, mc, grid);
        for (std::size_t i = 0; i < tranches.size(); ++i) {
            const double semi = expected_tranche_loss(rc.portfolio, tranches[i], T, model, rc.rho, rc.pricer);
            const double diff = semi - est[i].estimate;
            const bool ok = std::abs(diff) <= 3.0 * est[i].standard_error;
            if (!ok) out.violations.push_back("monte_carlo " + model.label());
            monte_carlo.push_back({{"model", model.label()},
                                   {"tranche", tranche_json(tranches[i], rc.portfolio.original_notional)},
                                   {"semi_analytic", semi},
                                   {"monte_carlo", est[i].estimate},
                                   {"standard_error", est[i].standard_error},
                                   {"diff", diff},
                                   {"z_score", est[i].standard_error > 0 ? diff / est[i].standard_error : 0.0},
                                   {"ok", ok}});
        }
    }
    ordered_json j{{"horizon", T},
                   {"correlation", rc.rho},
                   {"enumeration_portfolio", small ? "configured" : "random-8"},
                   {"grid_unit", unit},
                   {"enumeration", enumeration},
                   {"mc_paths", rc.mc_paths},
                   {"seed", rc.seed},
                   {"monte_carlo", monte_carlo},
                   {"violations", out.violations},
                   {"ok", out.violations.empty()}};
    out.body = dump(j);
    return out;
}

int run_command(std::string_view command, const RunConfig& rc, bool check, std::ostream& out,
                std::ostream& err) {
    CommandOutput result;
    try {
        if (command == "price") result = cmd_price(rc);
        else if (command == "cs01") result = cmd_cs01(rc);
        else if (command == "vod-curve") result = cmd_vod_curve(rc);
        else if (command == "trio-report") result = cmd_trio(rc, check);
        else if (command == "figure1") result = cmd_figure1(rc);
        else if (command == "figure2") result = cmd_figure2(rc);
        else if (command == "figure4") result = cmd_figure4(rc);
        else if (command == "appendix-verify") result = cmd_appendix_verify(rc);
        else if (command == "oracle-check") result = cmd_oracle_check(rc);
        else {
            err << "error: unknown command '" << command << "'\n";
            return kExitInput;
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::domain_error& e) {  // DomainError, InfeasibleCalibration
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NameError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    std::error_code ec;
    std::filesystem::create_directories(rc.output_dir, ec);
    const auto path = rc.output_dir / result.file_name;
    std::ofstream file(path, std::ios::binary);
    if (!file || !(file << result.body)) {
        err << "error: cannot write " << path.string() << '\n';
        return kExitInput;
    }
    out << result.body;
    for (const auto& v : result.violations) err << "violation: " << v << '\n';
    return result.violations.empty() ? kExitOk : kExitAssertion;
}

}  // namespace cdorisk
