#include <doctest.h>

#include <cmath>
#include <cstring>

#include "cdorisk/error.hpp"
#include "cdorisk/numerics.hpp"
#include "oracle_math.hpp"

using namespace cdorisk;

TEST_CASE("norm_cdf against the erf series") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(8.0) > 1.0 - 1e-14);
    CHECK(std::abs(norm_cdf(1.0) - 0.8413447461) < 1e-10);
    for (double x = -5.0; x <= 5.0; x += 0.05) {
        CHECK(std::abs(norm_cdf(x) - double(oracle::phi(x))) < 1e-12);
    }
}

TEST_CASE("norm_cdf symmetry and monotonicity") {
    double prev = 0.0;
    for (double x = -9.0; x <= 9.0; x += 0.01) {
        CHECK(std::abs(norm_cdf(-x) + norm_cdf(x) - 1.0) < 1e-14);
        CHECK(norm_cdf(x) >= prev);
        prev = norm_cdf(x);
    }
}

TEST_CASE("norm_cdf on Eigen arrays matches the scalar") {
    Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(41, -4, 4);
    Eigen::ArrayXd y = norm_cdf(x);
    for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(y[i] == norm_cdf(x[i]));
}

TEST_CASE("norm_inv") {
    CHECK(std::abs(norm_inv(0.5)) < 1e-15);
    const double bisected = oracle::inv_phi(0.3);
    CHECK(std::abs(bisected - (-0.5244005)) < 1e-7);
    CHECK(std::abs(norm_inv(0.3) - bisected) < 1e-12);
    for (int x = -3; x <= 3; ++x) CHECK(std::abs(norm_inv(norm_cdf(double(x))) - x) < 1e-9);
    for (double p : {1e-12, 1e-8, 1e-4, 0.01, 0.02425, 0.1, 0.7, 0.97575, 0.999, 1 - 1e-8}) {
        CHECK(std::abs(norm_cdf(norm_inv(p)) - p) < 1e-10 * std::max(1.0, p));
        CHECK(std::abs(norm_cdf(norm_inv(p)) - p) / p < 1e-12);
    }
    CHECK_THROWS_AS(norm_inv(0.0), DomainError);
    CHECK_THROWS_AS(norm_inv(1.0), DomainError);
    CHECK_THROWS_AS(norm_inv(-0.1), DomainError);
    CHECK_THROWS_AS(norm_inv(std::nan("")), DomainError);
}

TEST_CASE("factor_grid invariants") {
    const auto one = factor_grid(1);
    REQUIRE(one.size() == 1);
    CHECK(one.nodes[0] == 0.0);
    CHECK(one.weights[0] == 1.0);
    CHECK_THROWS_AS(factor_grid(0), DomainError);

    for (std::size_t n : {2u, 8u, 32u, 64u, 96u, 128u}) {
        const auto g = factor_grid(n);
        REQUIRE(std::size_t(g.size()) == n);
        CHECK(std::abs(g.weights.sum() - 1.0) < 1e-12);
        CHECK((g.weights.array() >= 0.0).all());
        for (Eigen::Index k = 1; k < g.size(); ++k) CHECK(g.nodes[k] > g.nodes[k - 1]);
    }
}

TEST_CASE("factor_grid moments") {
    const auto g96 = factor_grid(96);
    CHECK(std::abs(g96.expect([](double z) { return z; })) < 1e-10);
    CHECK(std::abs(g96.expect([](double z) { return z * z; }) - 1.0) < 1e-10);
    CHECK(std::abs(g96.expect([](double z) { return std::pow(z, 4); }) - 3.0) < 1e-9);

    const auto g64 = factor_grid(64);
    CHECK(std::abs(g64.expect([](double z) { return norm_cdf(z); }) - 0.5) < 1e-10);

    const double moments[] = {1, 0, 1, 0, 3, 0, 15};
    for (std::size_t n = 32; n <= 128; n += 16) {
        const auto g = factor_grid(n);
        for (int k = 0; k <= 6; ++k) {
            CHECK(std::abs(g.expect([k](double z) { return std::pow(z, k); }) - moments[k]) < 1e-8);
        }
    }
}

TEST_CASE("find_root") {
    CHECK(std::abs(find_root([](double x) { return x - 2.0; }, 0.0, 5.0) - 2.0) < 1e-12);
    const double r = find_root([](double x) { return norm_cdf(x) - 0.3; }, -10.0, 10.0);
    CHECK(std::abs(r - oracle::inv_phi(0.3)) < 1e-11);
    CHECK(std::abs(r - (-0.5244005)) < 1e-7);
    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 2.0), NoBracketError);
    CHECK(find_root([](double x) { return x; }, 0.0, 1.0) == 0.0);

    auto f = [](double x) { return std::exp(x) - 3.0; };
    const double a = find_root(f, -5.0, 5.0);
    const double b = find_root(f, -5.0, 5.0);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    CHECK(std::abs(a - std::log(3.0)) < 1e-12);

    // a step function still converges by bisection
    const double s = find_root([](double x) { return x < 0.7 ? -1.0 : 1.0; }, 0.0, 1.0);
    CHECK(std::abs(s - 0.7) < 1e-11);
}
