#pragma once

#include "illiquid/levy.hpp"

#include <functional>

namespace illiquid {

struct MarketParams {
    double sigma = 0.12;          // diffusion volatility
    double r = 0.0;               // risk-free rate
    double rho = 0.0;             // liquidity parameter
    double strike = 100.0;
    double maturity = 1.0;
    double mu = 0.0;              // physical drift, only used by drift_b
    double strategy_bound = 1.0;  // L = sup |S dphi/dS|

    void validate() const;  // throws Error{invalid_argument}
};

namespace feedback {

/// Large-trader holding phi(t, S).
using Strategy = std::function<double(double t, double s)>;

/// Jump displacement provider H(t, z, S).
using HProvider = std::function<double(double t, double z, double s)>;

struct FixedPointOptions {
    double tol = 1e-10;  // absolute, in currency
    int max_iter = 100;
    double damping = 1.0;  // halved automatically when the residual grows
};

struct FixedPointResult {
    double h = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Solves H = S(e^z - 1) + rho S [phi(t, S + H) - phi(t, S)] by successive substitution from H0 = S(e^z - 1).
FixedPointResult solve_H_fixed_point(const Strategy& phi, double t, double z, double s, double rho,
                                     const FixedPointOptions& opts = {});

/// S(e^z - 1) + rho S [phi(t, S e^z) - phi(t, S)].
double approx_H_first_order(const Strategy& phi, double t, double z, double s, double rho);

/// sigma / (1 - rho dpsi); throws Error{blow_up} when rho dpsi >= 1.
double effective_vol(double sigma, double rho, double dpsi);

/// ln(1 + H/S); throws Error{domain} when 1 + H/S <= 0.
double xi_from_ratio(double h_over_s);

/// Transformed jump ln(1 + H(T - tau, z, K e^x) e^{-x} / K).
double xi(double tau, double z, double x, const HProvider& h, const MarketParams& m);

/// sum_k H(T - tau, z_k, K e^x) e^{-x} nu_k / K.
double omega(double tau, double x, const levy::JumpQuadrature& q, const HProvider& h, const MarketParams& m);

/// Physical drift [mu + rho (phi_t + v^2 S^2 phi_SS / 2)] / (1 - rho S phi_S).
double drift_b(double s, double phi_t, double phi_s, double phi_ss, double v, double mu, double rho);

/// H provider built from a strategy: first-order or fixed-point.
HProvider first_order_provider(Strategy phi, double rho);
HProvider fixed_point_provider(Strategy phi, double rho, FixedPointOptions opts = {});

}  // namespace feedback
}  // namespace illiquid
