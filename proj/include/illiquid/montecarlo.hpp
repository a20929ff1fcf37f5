#pragma once

#include "illiquid/levy.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace illiquid::mc {

struct McConfig {
    std::uint64_t paths = 100000;
    int steps = 1;
    std::uint64_t seed = 42;
    bool antithetic = true;

    void validate() const;
};

/// SplitMix64 stream; satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

private:
    std::uint64_t state_;
};

/// Independent stream for one path index.
SplitMix64 path_stream(std::uint64_t seed, std::uint64_t path);

/// Terminal prices S_T = S0 exp(rT + X_T) with E[exp(X_T)] = 1. With antithetic sampling consecutive
/// entries form a pair driven by mirrored Gaussian draws.
std::vector<double> simulate_terminal(const levy::LevyModel& model, double sigma, double r, double maturity,
                                      double spot, const McConfig& cfg);

struct McResult {
    double price = 0.0;
    double se = 0.0;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
};

/// Discounted put price. Partial sums run over fixed blocks of paths, so the result does not depend on the
/// thread count.
McResult price_put_mc(const levy::LevyModel& model, double sigma, double r, double maturity, double spot,
                      double strike, const McConfig& cfg);

}  // namespace illiquid::mc
