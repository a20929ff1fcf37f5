#include "illiquid/error.hpp"
#include "illiquid/implied_vol.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace illiquid;
using namespace illiquid::iv;

TEST(ImpliedVol, NormCdfMatchesErfc) {
    for (double x = -9.0; x <= 9.0; x += 0.37)
        EXPECT_NEAR(norm_cdf(x), 0.5 * std::erfc(-x / std::numbers::sqrt2), 1e-14) << "x=" << x;
    EXPECT_EQ(norm_cdf(0.0), 0.5);
}

TEST(ImpliedVol, AtTheMoneyPut) { EXPECT_NEAR(bs_put(100.0, 100.0, 0.0, 1.0, 0.12), 4.78444, 5e-6); }

TEST(ImpliedVol, PutCallParity) {
    // call from the direct formula
    const double s = 104.0, k = 97.0, r = 0.04, t = 0.7, v = 0.25;
    const double sd = v * std::sqrt(t);
    const double d1 = (std::log(s / k) + (r + 0.5 * v * v) * t) / sd;
    const double call = s * norm_cdf(d1) - k * std::exp(-r * t) * norm_cdf(d1 - sd);
    EXPECT_NEAR(call - bs_put(s, k, r, t, v), s - k * std::exp(-r * t), 1e-12);
}

TEST(ImpliedVol, RoundTrip) {
    for (double k : {70.0, 90.0, 100.0, 115.0, 140.0})
        for (double v : {0.05, 0.12, 0.3, 0.8}) {
            const double p = bs_put(100.0, k, 0.01, 1.0, v);
            EXPECT_NEAR(implied_vol(p, 100.0, k, 0.01, 1.0), v, 1e-6) << "K=" << k << " v=" << v;
        }
}

TEST(ImpliedVol, PricesOutsideTheBandHaveNoSolution) {
    for (double p : {19.0, 20.0, 100.0, 150.0}) {
        try {
            implied_vol(p, 80.0, 100.0, 0.0, 1.0);
            FAIL() << p;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::no_solution);
        }
    }
}

TEST(ImpliedVol, BlackScholesPricesGiveAFlatSmile) {
    std::vector<double> strikes, prices;
    for (double k = 80.0; k <= 120.0; k += 5.0) {
        strikes.push_back(k);
        prices.push_back(bs_put(100.0, k, 0.0, 1.0, 0.12));
    }
    const auto c = smile(strikes, prices, 100.0, 0.0, 1.0, "bs");
    EXPECT_EQ(c.source, "bs");
    ASSERT_EQ(c.vols.size(), strikes.size());
    for (double v : c.vols) EXPECT_NEAR(v, 0.12, 1e-6);
}

TEST(ImpliedVol, RejectsInvalidInputs) {
    EXPECT_THROW(bs_put(0.0, 100.0, 0.0, 1.0, 0.1), Error);
    EXPECT_THROW(bs_put(100.0, 100.0, 0.0, 1.0, 0.0), Error);
}
