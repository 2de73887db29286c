#include "cdorisk/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdorisk/copula.hpp"
#include "cdorisk/error.hpp"

namespace cdorisk {

namespace {

constexpr double kSentinelTol = 1e-12;
constexpr double kBetaBracket = 40.0;

}  // namespace

double RecoveryModel::rm_for(double p, double market_recovery) const {
    if (kind == Kind::deterministic) return market_recovery;
    if (const auto* c = std::get_if<Constant>(&rm)) return c->value;
    return rm_regularized(p, market_recovery);
}

std::string RecoveryModel::label() const {
    if (kind == Kind::deterministic) return "deterministic";
    std::ostringstream os;
    if (const auto* c = std::get_if<Constant>(&rm)) {
        os << "constant:" << c->value;
    } else {
        os << "regularized";
    }
    os << ",alpha=" << alpha;
    return os.str();
}

void validate(const RecoveryModel& model) {
    if (model.kind == RecoveryModel::Kind::deterministic) {
        if (model.alpha != 0.0) throw DomainError("recovery model: deterministic takes no alpha");
        return;
    }
    if (!(model.alpha >= 0.0) || !std::isfinite(model.alpha)) {
        throw DomainError("recovery model: alpha must be finite and nonnegative");
    }
    if (const auto* c = std::get_if<RecoveryModel::Constant>(&model.rm)) {
        if (!(c->value > 0.0 && c->value <= 1.0)) {
            throw DomainError("recovery model: constant R_m must lie in (0,1]");
        }
    }
}

double rm_regularized(double p, double market_recovery) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("rm_regularized: p must lie in [0,1]");
    if (!(market_recovery > 0.0 && market_recovery < 1.0)) {
        throw DomainError("rm_regularized: market recovery must lie in (0,1)");
    }
    const double R = market_recovery;
    const double excess = R - (1.0 - p);
    if (excess <= 0.0) return 1.0;
    if (p == 1.0) return R;
    return 1.0 - (1.0 - R) * (excess / (R * p));
}

CalibratedRecovery calibrate_beta(double p, double market_recovery, double r_m, double alpha,
                                  double rho, const FactorGrid& grid) {
    const double R = market_recovery;
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("calibrate_beta: p must lie in [0,1]");
    if (!(R >= 0.0 && R < 1.0)) throw DomainError("calibrate_beta: recovery must lie in [0,1)");
    if (!(r_m <= 1.0)) throw DomainError("calibrate_beta: R_m must not exceed 1");
    if (!(alpha >= 0.0)) throw DomainError("calibrate_beta: alpha must be nonnegative");
    if (r_m < R - kSentinelTol) {
        std::ostringstream os;
        os << "calibrate_beta: R_m " << r_m << " below market recovery " << R;
        throw InfeasibleCalibration(os.str());
    }

    CalibratedRecovery cal;
    cal.p = p;
    cal.market_recovery = R;
    cal.r_m_effective = R;
    if (std::abs(r_m - R) <= kSentinelTol || p == 0.0) return cal;

    const Eigen::VectorXd q = conditional_default_prob(p, rho, grid.nodes);
    const Eigen::ArrayXd qw = q.array() * grid.weights.array();
    const double target = p * R;
    auto objective = [&](double beta) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < qw.size(); ++k) {
            sum += qw[k] * norm_cdf(alpha * grid.nodes[k] + beta);
        }
        return r_m * sum - target;
    };

    double lo = -kBetaBracket, hi = kBetaBracket;
    while (objective(hi) < 0.0) {
        // Only reachable when r_m - R is at rounding level: Φ is already 1 on
        // every node, so recovery cannot be told apart from market recovery.
        if (hi > 1e4) return cal;
        hi *= 2.0;
    }
    while (objective(lo) > 0.0) {
        if (lo < -1e4) throw InfeasibleCalibration("calibrate_beta: no lower bracket for beta");
        lo *= 2.0;
    }
    cal.r_m_effective = r_m;
    cal.beta = find_root(objective, lo, hi, 1e-14, 1e-15 * std::max(target, 1e-300));
    return cal;
}

CalibratedRecovery calibrate(const RecoveryModel& model, double p, double market_recovery,
                             double rho, const FactorGrid& grid) {
    if (model.is_deterministic()) {
        CalibratedRecovery cal;
        cal.p = p;
        cal.market_recovery = market_recovery;
        cal.r_m_effective = market_recovery;
        return cal;
    }
    return calibrate_beta(p, market_recovery, model.rm_for(p, market_recovery), model.alpha, rho,
                          grid);
}

double conditional_recovery(const CalibratedRecovery& cal, double alpha, double z) {
    if (cal.at_infinity()) return cal.market_recovery;
    return cal.r_m_effective * norm_cdf(alpha * z + *cal.beta);
}

double consistency_residual(const CalibratedRecovery& cal, double alpha, double rho,
                            const FactorGrid& grid) {
    const double mean = grid.expect([&](double z) {
        return conditional_default_prob(cal.p, rho, z) * conditional_recovery(cal, alpha, z);
    });
    return mean - cal.p * cal.market_recovery;
}

double recovery_variance_given_default(double p, double market_recovery,
                                       const RecoveryModel& model, double rho,
                                       const FactorGrid& grid) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw DomainError("recovery_variance_given_default: p must lie in (0,1]");
    }
    const auto cal = calibrate(model, p, market_recovery, rho, grid);
    if (cal.at_infinity()) return 0.0;
    const Eigen::VectorXd q = conditional_default_prob(p, rho, grid.nodes);
    double mass = 0.0, first = 0.0, second = 0.0;
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double w = grid.weights[k] * q[k];
        const double r = conditional_recovery(cal, model.alpha, grid.nodes[k]);
        mass += w;
        first += w * r;
        second += w * r * r;
    }
    const double mean = first / mass;
    return std::max(0.0, second / mass - mean * mean);
}

}  // namespace cdorisk
