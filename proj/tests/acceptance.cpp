// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdorisk/appendix.hpp"
#include "cdorisk/io.hpp"
#include "cdorisk/oracles.hpp"
#include "cdorisk/pricer.hpp"
#include "cdorisk/recovery.hpp"
#include "cdorisk/risk.hpp"

using namespace cdorisk;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

const FactorGrid& grid() {
    static const FactorGrid g = factor_grid();
    return g;
}

std::vector<RecoveryModel> three_models() {
    return {RecoveryModel::deterministic(), RecoveryModel::constant(1.0, 1.0), RecoveryModel::regularized(1.0)};
}

RiskContext context(const Portfolio& pf, const Tranche& t, const RecoveryModel& m, double rho = 0.4) {
    RiskContext ctx;
    ctx.portfolio = pf;
    ctx.tranche = t;
    ctx.model = m;
    ctx.rho = rho;
    return ctx;
}

const Portfolio& demo() {
    static const Portfolio pf = demo_portfolio();
    return pf;
}

Tranche demo_tranche(double a, double b) {
    return Tranche::from_percent(a, b, demo().original_notional);
}

Outcome super_senior() {
    const auto t = demo_tranche(60, 100);
    const double det = tranche_pv(demo(), t, RecoveryModel::deterministic(), 0.4).protection_pv;
    const double con = tranche_pv(demo(), t, RecoveryModel::constant(1.0), 0.4).protection_pv;
    return {det < 1e-10 * t.notional() && con > 1e-4 * t.notional(),
            "deterministic pv " + fmt(det) + ", constant(1) pv " + fmt(con) + " (notional " + fmt(t.notional()) + ")"};
}

Outcome calibration() {
    const double R = 0.4;
    double worst = 0.0;
    std::size_t points = 0;
    for (int i = 1; i <= 99; ++i) {
        const double p = i / 100.0;
        for (double alpha : {0.0, 0.5, 1.0, 2.0, 5.0}) {
            for (double rho : {0.0, 0.3, 0.6, 0.9}) {
                for (double r_m : {R, (R + 1.0) / 2.0, 1.0}) {
                    const auto cal = calibrate_beta(p, R, r_m, alpha, rho, grid());
                    worst = std::max(worst, std::abs(consistency_residual(cal, alpha, rho, grid())));
                    ++points;
                }
            }
        }
    }
    return {worst < 1e-8, "max residual " + fmt(worst) + " over " + std::to_string(points) + " points"};
}

Outcome identity() {
    std::vector<double> spreads;
    for (int k = 0; k < 20; ++k) spreads.push_back(spread_for_probability(0.01 + k * 0.98 / 19.0, 0.4, 5.0));
    double worst = 0.0;
    bool ok = true;
    for (const auto& m : three_models()) {
        for (const auto& t : {demo_tranche(15, 30), demo_tranche(60, 100)}) {
            const double r = cs01_vod_identity_residual("N1", context(demo(), t, m), spreads);
            ok = ok && r < 1e-9 * t.notional();
            worst = std::max(worst, r / t.notional());
        }
    }
    return {ok, "max residual / notional " + fmt(worst)};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CDORISK_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome trio() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cdorisk_acceptance_trio";
    fs::remove_all(dir);
    const int code = run_cli("trio-report --check --out " + dir.string());
    std::ifstream in(dir / "trio_report.json");
    std::string patterns;
    bool exact = false;
    if (in) {
        const auto doc = nlohmann::json::parse(in);
        std::vector<std::string> got;
        for (const auto& row : doc["rows"]) got.push_back(row["pattern"].get<std::string>());
        exact = got == std::vector<std::string>{"(No,Yes,Yes)", "(Yes,Yes,No)", "(Yes,No,Yes)"};
        for (const auto& g : got) patterns += g + " ";
    }

    bool invariant = true;
    const auto settings = default_trio_settings(demo());
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (double rho : {0.2, 0.4, 0.6}) {
            const auto report = trio_report(demo(),
                                            {RecoveryModel::deterministic(), RecoveryModel::constant(1.0, alpha),
                                             RecoveryModel::regularized(alpha)},
                                            rho, {}, settings);
            invariant = invariant && report.impossible_trio_holds();
        }
    }
    return {code == 0 && exact && invariant,
            "exit " + std::to_string(code) + ", patterns " + patterns + "; never three Yes over 9 (alpha, rho): " +
                (invariant ? "yes" : "no")};
}

Outcome continuity() {
    const double p_max = 1.0 - 1e-4;
    bool ok = true;
    std::ostringstream d;
    for (const auto& t : {demo_tranche(15, 30), demo_tranche(60, 100)}) {
        for (const auto& m : {RecoveryModel::deterministic(), RecoveryModel::regularized(1.0)}) {
            auto ctx = context(demo(), t, m);
            ctx.p_max = p_max;
            const double g = std::abs(continuity_gap("N1", ctx).gap) / t.notional();
            ok = ok && g < 1e-4;
            d << m.label() << " [" << fmt(t.attach) << "," << fmt(t.detach) << "] " << fmt(g) << "; ";
        }
        double prev = INFINITY;
        for (double pm : {0.99, 0.999, 0.9999}) {
            auto ctx = context(demo(), t, RecoveryModel::regularized(1.0));
            ctx.p_max = pm;
            const double g = std::abs(continuity_gap("N1", ctx).gap);
            ok = ok && g < prev;
            prev = g;
        }
    }
    const auto ss = demo_tranche(60, 100);
    auto ctx = context(demo(), ss, RecoveryModel::constant(1.0));
    ctx.p_max = p_max;
    const double g = std::abs(continuity_gap("N1", ctx).gap) / ss.notional();
    ok = ok && g > 10 * 1e-4;
    d << "constant(1) super senior " << fmt(g) << " (needs > 0.001)";
    return {ok, "|gap| / notional: " + d.str()};
}

Outcome negative_cs01() {
    const auto t = demo_tranche(15, 30);
    NameSweep sweep(context(demo(), t, RecoveryModel::regularized(1.0)), "N1");
    const auto probs = default_probability_grid();
    std::vector<double> cs01;
    for (double p : probs) cs01.push_back(sweep.cs01(spread_for_probability(p, 0.4, 5.0)));
    // smallest index from which every CS01 is negative
    std::size_t from = cs01.size();
    while (from > 0 && cs01[from - 1] < 0.0) --from;
    const bool ok = from < cs01.size() && from > 0;
    const double s = ok ? spread_for_probability(probs[from], 0.4, 5.0) : 0.0;
    return {ok, ok ? "CS01 < 0 from " + fmt(s * 1e4) + "bp (p " + fmt(probs[from]) + ") upward" : "no sign change"};
}

Outcome walk() {
    const auto t = demo_tranche(60, 100);
    const auto ctx = context(demo(), t, RecoveryModel::constant(1.0));
    std::vector<std::string> order;
    for (const auto& n : demo().names) order.push_back(n.id);
    std::mt19937_64 rng(7);
    bool ok = true;
    double worst = 0.0, min_vod = 0.0;
    for (int k = 0; k < 5; ++k) {
        std::shuffle(order.begin(), order.end(), rng);
        const auto w = sequential_default_walk(ctx, order);
        const double err = std::abs(w.sum_vod() + w.initial_pv);
        ok = ok && err < 1e-9 * t.notional() && w.min_vod() < 0.0;
        worst = std::max(worst, err);
        min_vod = std::min(min_vod, w.min_vod());
    }
    return {ok, "max |sum VOD + PV0| " + fmt(worst) + ", min VOD " + fmt(min_vod)};
}

const Proposition1Scan& scan() {
    static const Proposition1Scan s = [] {
        const auto st = AppendixSettings::defaults();
        return proposition1_scan(st.p_grid, st.recovery_grid, st.alpha_grid, st.rho_grid, grid());
    }();
    return s;
}

Outcome proposition1() {
    const auto& s = scan();
    return {s.min_vod >= -1e-6 && s.min_claim2 >= -1e-12,
            "min VOD " + fmt(s.min_vod) + ", min alpha-limit VOD " + fmt(s.min_claim2) + " over " +
                std::to_string(s.points) + " points"};
}

Outcome claim1() {
    const auto& s = scan();
    return {s.min_claim1_margin >= -1e-8, "min margin " + fmt(s.min_claim1_margin)};
}

Outcome lemmas() {
    const auto r = verify_appendix(AppendixSettings::defaults(), grid());
    return {r.lemma1_draws == 50 && r.lemma3_draws == 10000 && r.lemma1_max_residual < 1e-8 &&
                r.lemma3_max_excess <= 1e-12,
            "lemma 1 max residual " + fmt(r.lemma1_max_residual) + ", lemma 3 max excess " +
                fmt(r.lemma3_max_excess)};
}

Outcome oracles() {
    bool ok = true;
    double worst_units = 0.0, worst_z = 0.0;
    const auto small = random_portfolio(20090501, 8);
    const double unit = loss_grid_unit(small, {});
    const double pct[][2] = {{0, 3}, {3, 15}, {15, 30}, {60, 100}};
    for (const auto& m : three_models()) {
        for (const auto& [a, b] : pct) {
            const auto t = Tranche::from_percent(a, b, small.original_notional);
            const double diff = std::abs(expected_tranche_loss(small, t, 5.0, m, 0.4) -
                                         enumerate_tranche_loss(small, t, 5.0, m, 0.4, grid()));
            ok = ok && diff < unit;
            worst_units = std::max(worst_units, diff / unit);
        }
    }
    McConfig mc;
    mc.paths = 1'000'000;
    mc.seed = 1;
    std::vector<Tranche> tranches;
    for (const auto& [a, b] : pct) tranches.push_back(demo_tranche(a, b));
    for (const auto& m : three_models()) {
        const auto est = mc_tranche_losses(demo(), tranches, 5.0, m, 0.4, mc, grid());
        for (std::size_t i = 0; i < tranches.size(); ++i) {
            const double semi = expected_tranche_loss(demo(), tranches[i], 5.0, m, 0.4);
            const double diff = std::abs(semi - est[i].estimate);
            if (est[i].standard_error == 0.0) {
                ok = ok && diff < 1e-12;
            } else {
                ok = ok && diff < 3.0 * est[i].standard_error;
                worst_z = std::max(worst_z, diff / est[i].standard_error);
            }
        }
    }
    return {ok, "enumeration max diff " + fmt(worst_units) + " grid units, MC max " + fmt(worst_z) + " SE"};
}

Outcome convergence() {
    PricerConfig coarse, fine;
    coarse.loss_buckets_per_name = 8;
    fine.loss_buckets_per_name = 16;
    bool ok = true;
    double worst = 0.0;
    for (const auto& m : three_models()) {
        for (const auto& t : {demo_tranche(0, 3), demo_tranche(3, 15), demo_tranche(15, 30), demo_tranche(60, 100)}) {
            const double d = std::abs(tranche_pv(demo(), t, m, 0.4, coarse).pv - tranche_pv(demo(), t, m, 0.4, fine).pv);
            ok = ok && d < 1e-3 * t.notional();
            worst = std::max(worst, d / t.notional());
        }
    }
    return {ok, "max change / notional " + fmt(worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"super senior is riskless only under deterministic recovery", super_senior},
        {"recovery calibration holds the market mean", calibration},
        {"CS01 and VOD slope cancel", identity},
        {"trio report pattern and never three Yes", trio},
        {"continuity gaps", continuity},
        {"regularized CS01 turns negative", negative_cs01},
        {"sequential default walk", walk},
        {"regularized VOD is nonnegative", proposition1},
        {"VOD is bounded below by its alpha limit", claim1},
        {"variance lemmas", lemmas},
        {"oracle agreement", oracles},
        {"loss grid convergence", convergence},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
                  << " [" << fmt(secs) << "s]" << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
