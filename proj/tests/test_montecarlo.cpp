#include "illiquid/error.hpp"
#include "illiquid/implied_vol.hpp"
#include "illiquid/montecarlo.hpp"

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <numeric>

using namespace illiquid;
using namespace illiquid::mc;

namespace {

// Merton's series: Poisson mixture of Black-Scholes prices.
double merton_put(double s, double k, double r, double t, double sigma, double lam, double m, double d) {
    const double kappa = std::exp(m + 0.5 * d * d) - 1.0;
    const double lam2 = lam * (1.0 + kappa);
    double total = 0.0, weight = std::exp(-lam2 * t);
    for (int n = 0; n < 60; ++n) {
        if (n > 0) weight *= lam2 * t / n;
        const double vol = std::sqrt(sigma * sigma + n * d * d / t);
        const double rate = r - lam * kappa + n * std::log1p(kappa) / t;
        total += weight * iv::bs_put(s, k, rate, t, vol);
    }
    return total;
}

McConfig config(std::uint64_t paths, std::uint64_t seed = 42, bool antithetic = true) {
    return McConfig{paths, 1, seed, antithetic};
}

}  // namespace

TEST(MonteCarlo, RejectsOddPathCountWithAntithetic) {
    EXPECT_THROW(config(1001).validate(), Error);
    EXPECT_NO_THROW(config(1001, 42, false).validate());
    EXPECT_THROW(config(0).validate(), Error);
    EXPECT_THROW(price_put_mc(levy::LevyModel::zero(), 0.12, 0.0, 1.0, 100.0, 100.0, config(7)), Error);
}

TEST(MonteCarlo, StreamsAreDeterministic) {
    auto a = path_stream(42, 7), b = path_stream(42, 7), c = path_stream(42, 8);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
}

TEST(MonteCarlo, ResultDoesNotDependOnThreadCount) {
    const auto model = levy::LevyModel::variance_gamma(-0.33, 0.12, 0.16);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = price_put_mc(model, 0.12, 0.0, 1.0, 100.0, 100.0, config(200000));
    omp_set_num_threads(3);
    const auto three = price_put_mc(model, 0.12, 0.0, 1.0, 100.0, 100.0, config(200000));
    omp_set_num_threads(saved);
    EXPECT_EQ(one.price, three.price);
    EXPECT_EQ(one.se, three.se);
    EXPECT_EQ(one.paths, 200000u);
    EXPECT_EQ(one.seed, 42u);
}

TEST(MonteCarlo, SeedChangesTheEstimate) {
    const auto model = levy::LevyModel::zero();
    const auto a = price_put_mc(model, 0.12, 0.0, 1.0, 100.0, 100.0, config(20000, 1));
    const auto b = price_put_mc(model, 0.12, 0.0, 1.0, 100.0, 100.0, config(20000, 2));
    EXPECT_NE(a.price, b.price);
}

TEST(MonteCarlo, BlackScholesAgreesWithClosedForm) {
    for (double k : {85.0, 100.0, 115.0}) {
        const auto r = price_put_mc(levy::LevyModel::zero(), 0.2, 0.03, 1.0, 100.0, k, config(400000));
        EXPECT_NEAR(r.price, iv::bs_put(100.0, k, 0.03, 1.0, 0.2), 4.0 * r.se) << "K=" << k;
        EXPECT_GT(r.se, 0.0);
    }
}

TEST(MonteCarlo, MertonAgreesWithSeries) {
    const auto model = levy::LevyModel::merton(0.5, -0.1, 0.2);
    for (double k : {90.0, 100.0, 110.0}) {
        const auto r = price_put_mc(model, 0.12, 0.02, 1.0, 100.0, k, config(400000));
        EXPECT_NEAR(r.price, merton_put(100.0, k, 0.02, 1.0, 0.12, 0.5, -0.1, 0.2), 4.0 * r.se) << "K=" << k;
    }
}

TEST(MonteCarlo, ForwardIsAMartingale) {
    for (const auto& model : {levy::LevyModel::merton(0.5, -0.1, 0.2), levy::LevyModel::kou(3.0, 0.4, 10.0, 5.0),
                              levy::LevyModel::variance_gamma(-0.33, 0.12, 0.16)}) {
        const auto st = simulate_terminal(model, 0.12, 0.05, 1.0, 100.0, config(400000, 3));
        const double n = static_cast<double>(st.size());
        const double mean = std::accumulate(st.begin(), st.end(), 0.0) / n;
        double var = 0.0;
        for (double x : st) var += (x - mean) * (x - mean);
        const double se = std::sqrt(var / (n - 1.0) / n);
        // antithetic pairs are negatively correlated, so the iid standard error is conservative
        EXPECT_NEAR(mean, 100.0 * std::exp(0.05), 4.0 * se) << model.name();
    }
}

TEST(MonteCarlo, AntitheticDiffusionDrawsAreMirrored) {
    const auto st = simulate_terminal(levy::LevyModel::zero(), 0.2, 0.0, 1.0, 100.0, config(10));
    for (std::size_t n = 0; n < st.size(); n += 2) {
        // without jumps the log-returns are mirrored around the drift -sigma^2/2
        EXPECT_NEAR(std::log(st[n] / 100.0) + std::log(st[n + 1] / 100.0), -0.04, 1e-12);
    }
}
