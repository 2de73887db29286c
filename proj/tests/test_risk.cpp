#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cdorisk/error.hpp"
#include "cdorisk/io.hpp"
#include "cdorisk/risk.hpp"

using namespace cdorisk;

namespace {

RiskContext make_context(Portfolio pf, Tranche t, RecoveryModel m, double rho = 0.4) {
    RiskContext ctx;
    ctx.portfolio = std::move(pf);
    ctx.tranche = t;
    ctx.model = m;
    ctx.rho = rho;
    return ctx;
}

// 20 names at 40% recovery: the 60-100% tranche is super senior.
Portfolio small_book() {
    std::vector<CreditName> names;
    for (int i = 0; i < 20; ++i) names.push_back({"S" + std::to_string(i), 0.01 + 0.001 * i, 0.4, 5.0});
    return Portfolio::from_names(std::move(names));
}

const RecoveryModel kModels[] = {RecoveryModel::deterministic(), RecoveryModel::constant(1.0, 1.0),
                                 RecoveryModel::regularized(1.0)};

}  // namespace

TEST_CASE("cs01 on the full capital structure is positive") {
    const auto pf = random_portfolio(5, 10);
    for (const auto& m : kModels) {
        const auto ctx = make_context(pf, Tranche{0.0, pf.original_notional}, m);
        for (const auto& n : pf.names) CHECK(credit_spread01(n.id, ctx) > 0.0);
    }
}

TEST_CASE("cs01 sign by model") {
    const auto pf = demo_portfolio();
    const auto t = Tranche::from_percent(15, 30, pf.original_notional);

    NameSweep det(make_context(pf, t, RecoveryModel::deterministic()), "N1");
    for (double p : default_probability_grid()) {
        CHECK(det.cs01(spread_for_probability(p, 0.4, 5.0)) >= 0.0);
    }
    NameSweep reg(make_context(pf, t, RecoveryModel::regularized(1.0)), "N1");
    CHECK(reg.cs01(spread_for_probability(0.9, 0.4, 5.0)) < 0.0);
    CHECK(reg.cs01(0.01) > 0.0);
}

TEST_CASE("vod of a riskless name in the full tranche is its surprise loss") {
    auto pf = random_portfolio(3, 6);
    pf.names[2].spread = 0.0;
    const auto& n = pf.names[2];
    for (const auto& m : kModels) {
        const auto ctx = make_context(pf, Tranche{0.0, pf.original_notional}, m);
        CHECK(std::abs(vod(n.id, ctx) - (1.0 - n.market_recovery) * n.notional) < 1e-12);
    }
}

TEST_CASE("recovery01") {
    const auto pf = random_portfolio(9, 6);
    const double N = pf.original_notional;
    const auto& n = pf.names[0];
    for (const auto& m : kModels) {
        const auto full = make_context(pf, Tranche{0.0, N}, m);
        CHECK(std::abs(recovery01(n.id, full) - (-0.01 * n.notional)) < 1e-12);
        // loss sits inside [0, B]: more recovery cannot raise protection value
        const auto equity = make_context(pf, Tranche{0.0, 0.5 * N}, m);
        CHECK(recovery01(n.id, equity) <= 1e-15);
    }
    // first default on the demo book touches neither [15,30] via loss nor via recovery
    const auto demo = demo_portfolio();
    const auto mezz = make_context(demo, Tranche::from_percent(15, 30, demo.original_notional),
                                   RecoveryModel::constant(1.0));
    NameSweep sweep(mezz, "N1");
    CHECK(sweep.pv_after_default(0.41) - sweep.pv_after_default(0.40) ==
          doctest::Approx(recovery01("N1", mezz)).epsilon(1e-15));
    CHECK_THROWS_AS(recovery01("N1", mezz, 0.7), DomainError);
}

TEST_CASE("vod curves by model") {
    const auto pf = demo_portfolio();
    const auto t = Tranche::from_percent(15, 30, pf.original_notional);
    const auto grid = default_probability_grid();

    const auto det = vod_curve("N1", make_context(pf, t, RecoveryModel::deterministic()), grid);
    const auto con = vod_curve("N1", make_context(pf, t, RecoveryModel::constant(1.0)), grid);
    const auto reg = vod_curve("N1", make_context(pf, t, RecoveryModel::regularized()), grid);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(det[i].spread > det[i - 1].spread);
        CHECK(det[i].vod <= det[i - 1].vod);
        CHECK(con[i].vod <= con[i - 1].vod);
    }
    CHECK(std::abs(det.back().vod) < 1e-6 * t.notional());
    CHECK(con.back().vod < -1e-3 * t.notional());
    CHECK(std::abs(reg.back().vod) < 1e-4 * t.notional());
    const auto lowest = std::min_element(reg.begin(), reg.end(),
                                         [](const VodPoint& a, const VodPoint& b) { return a.vod < b.vod; });
    CHECK(lowest != reg.begin());
    CHECK(lowest != reg.end() - 1);
    CHECK(lowest->vod < reg.back().vod);

    CHECK_THROWS_AS(vod_curve("N1", make_context(pf, t, RecoveryModel::deterministic()), {0.5, 0.4}),
                    DomainError);
    CHECK_THROWS_AS(vod_curve("N1", make_context(pf, t, RecoveryModel::deterministic()), {1.0}),
                    DomainError);
}

TEST_CASE("continuity gaps") {
    const auto pf = demo_portfolio();
    const double N = pf.original_notional;
    for (const auto& t : {Tranche::from_percent(15, 30, N), Tranche::from_percent(60, 100, N)}) {
        const auto d = continuity_gap("N1", make_context(pf, t, RecoveryModel::deterministic()));
        CHECK(std::abs(d.gap) < 1e-6 * t.notional());
        CHECK(d.p_max == kDefaultPMax);

        double prev = 1e300;
        for (double p_max : {0.99, 0.999, 0.9999}) {
            auto ctx = make_context(pf, t, RecoveryModel::regularized());
            ctx.p_max = p_max;
            const double g = std::abs(continuity_gap("N1", ctx).gap);
            CHECK(g < prev);
            prev = g;
        }
    }
    // Constant(1) on the super senior: a jump that does not go away near default
    const auto ss = Tranche::from_percent(60, 100, N);
    double prev = 0.0;
    for (double p_max : {0.999, 0.9999, 0.99999}) {
        auto ctx = make_context(pf, ss, RecoveryModel::constant(1.0));
        ctx.p_max = p_max;
        const double g = continuity_gap("N1", ctx).gap;
        CHECK(g < -1e-5 * ss.notional());
        if (prev != 0.0) CHECK(std::abs(g - prev) < 0.05 * std::abs(prev));
        prev = g;
    }
}

TEST_CASE("cs01 and vod slope cancel") {
    const auto pf = demo_portfolio();
    std::vector<double> spreads;
    for (double p = 0.01; p < 0.99; p += 0.1) spreads.push_back(spread_for_probability(p, 0.4, 5.0));
    for (const auto& m : kModels) {
        const auto t = Tranche::from_percent(15, 30, pf.original_notional);
        CHECK(cs01_vod_identity_residual("N1", make_context(pf, t, m), spreads) < 1e-9 * t.notional());
    }
    CHECK_THROWS_AS(cs01_vod_identity_residual("N1", make_context(pf, Tranche{15, 30}, kModels[0]), {0.02, 0.01}),
                    DomainError);
    CHECK_THROWS_AS(NameSweep(make_context(pf, Tranche{15, 30}, kModels[0]), "nope"), NameError);
}

TEST_CASE("sequential default walk") {
    const auto pf = small_book();
    const auto ss = Tranche::from_percent(60, 100, pf.original_notional);
    std::vector<std::string> order;
    for (const auto& n : pf.names) order.push_back(n.id);
    std::mt19937_64 rng(3);
    std::shuffle(order.begin(), order.end(), rng);

    const auto walk = sequential_default_walk(make_context(pf, ss, RecoveryModel::constant(1.0)), order);
    CHECK(walk.initial_pv > 0.0);
    CHECK(std::abs(walk.sum_vod() - (walk.terminal_pv + walk.total_payments - walk.initial_pv)) < 1e-9 * ss.notional());
    CHECK(std::abs(walk.sum_vod() + walk.initial_pv) < 1e-9 * ss.notional());
    CHECK(walk.min_vod() < 0.0);

    const auto det = sequential_default_walk(make_context(pf, ss, RecoveryModel::deterministic()), order);
    for (const auto& step : det.steps) CHECK(step.vod == 0.0);

    const Tranche full{0.0, pf.original_notional};
    const auto fw = sequential_default_walk(make_context(pf, full, RecoveryModel::regularized()), order);
    double lgd = 0.0;
    for (const auto& n : pf.names) lgd += (1.0 - n.market_recovery) * n.notional;
    CHECK(std::abs(fw.sum_vod() - (lgd - fw.initial_pv)) < 1e-9 * full.notional());

    auto bad = order;
    bad.pop_back();
    CHECK_THROWS_AS(sequential_default_walk(make_context(pf, ss, kModels[0]), bad), NameError);
    bad.push_back(bad.front());
    CHECK_THROWS_AS(sequential_default_walk(make_context(pf, ss, kModels[0]), bad), NameError);
}

TEST_CASE("trio report") {
    const auto pf = demo_portfolio();
    const auto settings = default_trio_settings(pf);
    const auto only_det = trio_report(pf, {RecoveryModel::deterministic()}, 0.4, {}, settings);
    REQUIRE(only_det.rows.size() == 1);
    CHECK(only_det.rows[0].flags == TrioFlags{false, true, true});
    CHECK(only_det.impossible_trio_holds());

    const auto all = trio_report(pf, {kModels[0], kModels[1], kModels[2]}, 0.4, {}, settings);
    CHECK(all.rows[1].flags == TrioFlags{true, true, false});
    CHECK(all.rows[2].flags == TrioFlags{true, false, true});

    auto bad = settings;
    bad.super_senior = Tranche::from_percent(50, 100, pf.original_notional);
    CHECK_THROWS_AS(trio_report(pf, {kModels[0]}, 0.4, {}, bad), DomainError);

    CHECK(representative_names(pf).size() == 1);
    CHECK(representative_names(small_book()).size() == 20);
}

TEST_CASE("risk report") {
    const auto pf = small_book();
    const auto ctx = make_context(pf, Tranche::from_percent(0, 10, pf.original_notional), RecoveryModel::constant(1.0));
    const auto r = risk_report(ctx, {"S0", "S5"}, {0.1, 0.5, 0.9});
    CHECK(r.names.size() == 2);
    CHECK(r.cs01.size() == 2);
    CHECK(r.vod_curve.size() == 3);
    CHECK(r.cs01[0] == doctest::Approx(credit_spread01("S0", ctx)).epsilon(1e-14));
    CHECK(r.vod[1] == doctest::Approx(vod("S5", ctx)).epsilon(1e-14));
}
