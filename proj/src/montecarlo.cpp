#include "illiquid/montecarlo.hpp"

#include "illiquid/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <variant>

namespace illiquid::mc {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// uniform on the open interval (0, 1)
double open_uniform(SplitMix64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

struct Pair {
    double up;
    double down;  // mirrored Gaussian draws
};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class PathSampler {
public:
    PathSampler(const levy::LevyModel& model, double sigma, double maturity, int steps)
        : model_(model), sigma_(sigma), dt_(maturity / steps), steps_(steps) {
        drift_ = -0.5 * sigma * sigma - levy::exponential_compensator(model);
    }

    // log-return X_T for one draw and its antithetic partner
    Pair draw(SplitMix64& rng) const {
        std::normal_distribution<double> normal;
        double up = 0.0;
        double down = 0.0;
        const double sdt = sigma_ * std::sqrt(dt_);
        for (int k = 0; k < steps_; ++k) {
            const double z = normal(rng);
            up += drift_ * dt_ + sdt * z;
            down += drift_ * dt_ - sdt * z;
            std::visit(overloaded{
                           [](const levy::ZeroJumps&) {},
                           [&](const levy::Merton& m) {
                               std::poisson_distribution<int> count(m.intensity * dt_);
                               for (int n = count(rng); n > 0; --n) {
                                   const double e = normal(rng);
                                   up += m.mean + m.stdev * e;
                                   down += m.mean - m.stdev * e;
                               }
                           },
                           [&](const levy::Kou& kou) {
                               std::poisson_distribution<int> count(kou.intensity * dt_);
                               for (int n = count(rng); n > 0; --n) {
                                   const double u = open_uniform(rng);
                                   const double y = u >= 1.0 - kou.p_up
                                                        ? -std::log((1.0 - u) / kou.p_up) / kou.rate_up
                                                        : std::log(u / (1.0 - kou.p_up)) / kou.rate_down;
                                   up += y;
                                   down += y;
                               }
                           },
                           [&](const levy::VarianceGamma& vg) {
                               std::gamma_distribution<double> clock(dt_ / vg.kappa, vg.kappa);
                               const double g = clock(rng);
                               const double e = normal(rng);
                               up += vg.theta * g + vg.sigma * std::sqrt(g) * e;
                               down += vg.theta * g - vg.sigma * std::sqrt(g) * e;
                           },
                       },
                       model_.params());
        }
        return {up, down};
    }

private:
    const levy::LevyModel& model_;
    double sigma_;
    double dt_;
    int steps_;
    double drift_ = 0.0;
};

constexpr std::uint64_t kBlock = 4096;

}  // namespace

void McConfig::validate() const {
    if (paths < 1) throw Error(Errc::invalid_argument, "mc.paths must be >= 1");
    if (steps < 1) throw Error(Errc::invalid_argument, "mc.steps must be >= 1");
    if (antithetic && paths % 2 != 0) throw Error(Errc::invalid_argument, "mc.paths must be even with antithetic");
}

SplitMix64::result_type SplitMix64::operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
}

SplitMix64 path_stream(std::uint64_t seed, std::uint64_t path) { return SplitMix64(mix64(seed) ^ mix64(~path)); }

std::vector<double> simulate_terminal(const levy::LevyModel& model, double sigma, double r, double maturity,
                                      double spot, const McConfig& cfg) {
    cfg.validate();
    const PathSampler sampler(model, sigma, maturity, cfg.steps);
    std::vector<double> out(cfg.paths);
    const std::uint64_t units = cfg.antithetic ? cfg.paths / 2 : cfg.paths;
    const double carry = r * maturity;
#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < static_cast<std::int64_t>(units); ++u) {
        SplitMix64 rng = path_stream(cfg.seed, static_cast<std::uint64_t>(u));
        const Pair x = sampler.draw(rng);
        if (cfg.antithetic) {
            out[2 * u] = spot * std::exp(carry + x.up);
            out[2 * u + 1] = spot * std::exp(carry + x.down);
        } else {
            out[u] = spot * std::exp(carry + x.up);
        }
    }
    return out;
}

McResult price_put_mc(const levy::LevyModel& model, double sigma, double r, double maturity, double spot,
                      double strike, const McConfig& cfg) {
    cfg.validate();
    const PathSampler sampler(model, sigma, maturity, cfg.steps);
    const std::uint64_t units = cfg.antithetic ? cfg.paths / 2 : cfg.paths;
    const std::uint64_t blocks = (units + kBlock - 1) / kBlock;
    const double carry = r * maturity;
    std::vector<double> sum(blocks), sumsq(blocks);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(blocks); ++b) {
        const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBlock;
        const std::uint64_t hi = std::min(units, lo + kBlock);
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t u = lo; u < hi; ++u) {
            SplitMix64 rng = path_stream(cfg.seed, u);
            const Pair x = sampler.draw(rng);
            double payoff = std::max(strike - spot * std::exp(carry + x.up), 0.0);
            if (cfg.antithetic) payoff = 0.5 * (payoff + std::max(strike - spot * std::exp(carry + x.down), 0.0));
            s += payoff;
            s2 += payoff * payoff;
        }
        sum[b] = s;
        sumsq[b] = s2;
    }

    double s = 0.0, s2 = 0.0;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        s += sum[b];
        s2 += sumsq[b];
    }
    const double n = static_cast<double>(units);
    const double mean = s / n;
    const double var = units > 1 ? std::max(s2 / n - mean * mean, 0.0) * n / (n - 1.0) : 0.0;
    const double disc = std::exp(-r * maturity);
    return {disc * mean, disc * std::sqrt(var / n), cfg.paths, cfg.seed};
}

}  // namespace illiquid::mc
