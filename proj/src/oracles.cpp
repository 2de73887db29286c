#include "cdorisk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "cdorisk/copula.hpp"
#include "cdorisk/error.hpp"
#include "cdorisk/pricer.hpp"

namespace cdorisk {

namespace {

// SplitMix64 keyed by (seed, path): an independent stream per path.
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path)
        : state_(mix(seed ^ mix(path + 0x632BE59BD9B4E019ULL))) {}

    double uniform() {
        // (0,1) exclusive: 53 random bits, offset by half an ulp of the grid.
        return (double(next() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t next() { return mix(state_ += 0x9E3779B97F4A7C15ULL); }

    std::uint64_t state_;
};

struct NameDraw {
    double threshold;  // Φ⁻¹(p), -inf when p == 0
    double notional;
    CalibratedRecovery cal;
};

std::vector<NameDraw> calibrate_names(const Portfolio& portfolio, double t,
                                      const RecoveryModel& model, double rho,
                                      const FactorGrid& grid) {
    std::vector<NameDraw> out;
    for (const auto& n : portfolio.names) {
        const double p = default_probability(n, t);
        NameDraw d;
        d.threshold = p > 0.0 ? norm_inv(p) : -std::numeric_limits<double>::infinity();
        d.notional = n.notional;
        d.cal = calibrate(model, p, n.market_recovery, rho, grid);
        out.push_back(d);
    }
    return out;
}

constexpr std::size_t kChunk = 4096;

}  // namespace

std::vector<McEstimate> mc_tranche_losses(const Portfolio& portfolio,
                                          const std::vector<Tranche>& tranches, double t,
                                          const RecoveryModel& model, double rho,
                                          const McConfig& mc, const FactorGrid& grid) {
    if (mc.paths < 1) throw DomainError("mc_tranche_loss: need at least one path");
    validate(model);
    if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("mc_tranche_loss: rho must lie in [0,1)");
    const auto names = calibrate_names(portfolio, t, model, rho, grid);
    const double loading = std::sqrt(rho), idio = std::sqrt(1.0 - rho);
    const double crystallized = portfolio.cumulative_loss;
    const std::size_t m = tranches.size();

    const std::size_t chunks = (mc.paths + kChunk - 1) / kChunk;
    // sums[c * m + j], one slot per (chunk, tranche), reduced in chunk order
    std::vector<double> sums(chunks * m, 0.0), squares(chunks * m, 0.0);
    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * kChunk, end = std::min(mc.paths, begin + kChunk);
        double* s = sums.data() + c * m;
        double* s2 = squares.data() + c * m;
        for (std::size_t path = begin; path < end; ++path) {
            PathStream rng(mc.seed, path);
            const double z = norm_inv(rng.uniform());
            double loss = 0.0;
            for (const auto& n : names) {
                const double eps = norm_inv(rng.uniform());
                if (loading * z + idio * eps < n.threshold) {
                    loss += (1.0 - conditional_recovery(n.cal, model.alpha, z)) * n.notional;
                }
            }
            for (std::size_t j = 0; j < m; ++j) {
                const double payoff = tranche_loss(crystallized + loss, tranches[j]);
                s[j] += payoff;
                s2[j] += payoff * payoff;
            }
        }
    };

    std::size_t threads = mc.threads ? mc.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, chunks);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += threads) run_chunk(c);
        });
    }
    for (auto& th : pool) th.join();

    std::vector<McEstimate> out(m);
    const double n = double(mc.paths);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sums[c * m + j];
            s2 += squares[c * m + j];
        }
        auto& est = out[j];
        est.paths = mc.paths;
        est.estimate = s / n;
        if (mc.paths > 1) {
            const double var = std::max(0.0, (s2 - n * est.estimate * est.estimate) / (n - 1.0));
            est.standard_error = std::sqrt(var / n);
        }
    }
    return out;
}

McEstimate mc_tranche_loss(const Portfolio& portfolio, const Tranche& tranche, double t,
                           const RecoveryModel& model, double rho, const McConfig& mc,
                           const FactorGrid& grid) {
    return mc_tranche_losses(portfolio, {tranche}, t, model, rho, mc, grid).front();
}

double enumerate_tranche_loss(const Portfolio& portfolio, const Tranche& tranche, double t,
                              const RecoveryModel& model, double rho, const FactorGrid& grid) {
    const std::size_t n = portfolio.names.size();
    if (n > kMaxEnumerationNames) {
        throw DomainError("enumerate_tranche_loss: at most 12 live names");
    }
    validate(model);
    const auto names = calibrate_names(portfolio, t, model, rho, grid);
    std::vector<double> q(n), loss(n);
    double total = 0.0;
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        const double z = grid.nodes[k];
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = conditional_default_prob(names[i].cal.p, rho, z);
            loss[i] = (1.0 - conditional_recovery(names[i].cal, model.alpha, z)) * names[i].notional;
        }
        double conditional = 0.0;
        for (std::uint32_t set = 0; set < (1u << n); ++set) {
            double prob = 1.0, l = portfolio.cumulative_loss;
            for (std::size_t i = 0; i < n; ++i) {
                if (set & (1u << i)) {
                    prob *= q[i];
                    l += loss[i];
                } else {
                    prob *= 1.0 - q[i];
                }
            }
            conditional += prob * tranche_loss(l, tranche);
        }
        total += grid.weights[k] * conditional;
    }
    return total;
}

}  // namespace cdorisk
