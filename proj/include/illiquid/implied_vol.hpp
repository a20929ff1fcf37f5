#pragma once

#include <string>
#include <vector>

namespace illiquid::iv {

/// Standard normal CDF, double-precision rational approximation (Hart 5666 as arranged by West).
double norm_cdf(double x);

double bs_put(double spot, double strike, double r, double maturity, double sigma);

/// Bisection on [1e-4, 5]. Throws Error{no_solution} outside the arbitrage band.
double implied_vol(double price, double spot, double strike, double r, double maturity);

struct SmileCurve {
    std::vector<double> strikes;
    std::vector<double> vols;
    std::string source;
};

SmileCurve smile(const std::vector<double>& strikes, const std::vector<double>& prices, double spot, double r,
                 double maturity, std::string source);

}  // namespace illiquid::iv
