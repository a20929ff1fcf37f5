#include "illiquid/implied_vol.hpp"

#include "illiquid/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace illiquid::iv {

double norm_cdf(double x) {
    const double a = std::abs(x);
    double tail = 0.0;
    if (a <= 37.0) {
        const double e = std::exp(-0.5 * a * a);
        if (a < 7.07106781186547) {
            double num = 3.52624965998911e-02 * a + 0.700383064443688;
            num = num * a + 6.37396220353165;
            num = num * a + 33.912866078383;
            num = num * a + 112.079291497871;
            num = num * a + 221.213596169931;
            num = num * a + 220.206867912376;
            double den = 8.83883476483184e-02 * a + 1.75566716318264;
            den = den * a + 16.064177579207;
            den = den * a + 86.7807322029461;
            den = den * a + 296.564248779674;
            den = den * a + 637.333633378831;
            den = den * a + 793.826512519948;
            den = den * a + 440.413735824752;
            tail = e * num / den;
        } else {
            double cf = a + 0.65;
            cf = a + 4.0 / cf;
            cf = a + 3.0 / cf;
            cf = a + 2.0 / cf;
            cf = a + 1.0 / cf;
            tail = e / cf / 2.506628274631;
        }
    }
    return x > 0.0 ? 1.0 - tail : tail;
}

double bs_put(double spot, double strike, double r, double maturity, double sigma) {
    if (!(spot > 0.0) || !(strike > 0.0) || !(maturity > 0.0) || !(sigma > 0.0))
        throw Error(Errc::invalid_argument, "bs_put: S, K, T and sigma must be > 0");
    const double sd = sigma * std::sqrt(maturity);
    const double d1 = (std::log(spot / strike) + (r + 0.5 * sigma * sigma) * maturity) / sd;
    const double d2 = d1 - sd;
    return strike * std::exp(-r * maturity) * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

double implied_vol(double price, double spot, double strike, double r, double maturity) {
    const double disc_k = strike * std::exp(-r * maturity);
    const double floor = std::max(disc_k - spot, 0.0);
    auto reject = [&](const char* why) {
        std::ostringstream os;
        os << "implied_vol: price " << price << " " << why << " (K=" << strike << ", band (" << floor << ", "
           << disc_k << "))";
        throw Error(Errc::no_solution, os.str());
    };
    if (!(price > floor) || !(price < disc_k)) reject("outside the arbitrage band");

    double lo = 1e-4;
    double hi = 5.0;
    if (price < bs_put(spot, strike, r, maturity, lo)) reject("below the price at sigma = 1e-4");
    if (price > bs_put(spot, strike, r, maturity, hi)) reject("above the price at sigma = 5");

    const double tol = 1e-8 * strike;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double diff = bs_put(spot, strike, r, maturity, mid) - price;
        if (std::abs(diff) <= tol && hi - lo <= 1e-10) break;
        (diff > 0.0 ? hi : lo) = mid;
    }
    return mid;
}

SmileCurve smile(const std::vector<double>& strikes, const std::vector<double>& prices, double spot, double r,
                 double maturity, std::string source) {
    if (strikes.size() != prices.size()) throw Error(Errc::invalid_argument, "smile: strikes and prices differ in size");
    SmileCurve out{strikes, std::vector<double>(strikes.size()), std::move(source)};
    for (std::size_t n = 0; n < strikes.size(); ++n)
        out.vols[n] = implied_vol(prices[n], spot, strikes[n], r, maturity);
    return out;
}

}  // namespace illiquid::iv
