#pragma once

#include "illiquid/levy.hpp"
#include "illiquid/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace illiquid::hedging {

/// V(t, .) at one time level of a surface, C^1 in S: cubic Hermite in x through the node values with
/// central-difference node slopes. Beyond the lattice the boundary function is used.
class PriceCurve {
public:
    explicit PriceCurve(const Surface& s, int level = -1);  // default: tau = T, i.e. t = 0

    double value(double spot) const;
    double delta(double spot) const;
    double tau() const noexcept { return tau_; }

private:
    double hermite(double x, double& slope) const;

    std::vector<double> u_;
    std::vector<double> slope_;
    double dx_ = 0.0;
    double x0_ = 0.0;
    double strike_ = 0.0;
    double rate_ = 0.0;
    double tau_ = 0.0;
};

struct VarianceRate {
    double diffusion = 0.0;  // v^2 S^2 (V_S - alpha)^2
    double jump = 0.0;       // sum_k (V(S + H_k) - V(S) - alpha H_k)^2 nu_k
    double total() const noexcept { return diffusion + jump; }
};

/// Central-difference delta of V at S.
double delta_strategy(const PriceCurve& v, double spot);

/// Variance rate of the tracking error for holding alpha; h(z) is the jump displacement at S.
VarianceRate variance_rate(double spot, double alpha, const PriceCurve& v, double vol, const levy::JumpQuadrature& q,
                           const std::function<double(double z)>& h);

/// Strategy minimizing the variance rate at rho = 0.
double optimal_strategy_zeroth(double spot, const PriceCurve& v, double sigma, const levy::JumpQuadrature& q);

struct ImplicitStrategy {
    double phi = 0.0;
    double vol = 0.0;             // v = sigma / (1 - rho S dphi/dS) at the spot
    std::vector<double> h;        // H(z_k) at the spot, aligned with the quadrature
    int iterations = 0;
    double residual = 0.0;
};

/// Solves the coupled strategy equation with H defined implicitly through phi. phi lives on a log-price lattice
/// around the spot with the quadrature step; outer iteration damped by halving when the residual grows.
/// Throws Error{iteration} without convergence, Error{blow_up} if 1 - rho S dphi/dS <= 0.
ImplicitStrategy optimal_strategy_implicit(double spot, const PriceCurve& v, double sigma, double rho,
                                           const levy::JumpQuadrature& q, double tol = 1e-10, int max_iter = 500);

/// phi0 + rho phi1 from the small-rho expansion.
double optimal_strategy_first_order(double spot, const PriceCurve& v, double sigma, double rho,
                                    const levy::JumpQuadrature& q);

enum class HedgeMode { delta, optimal_implicit, optimal_first_order };

std::string to_string(HedgeMode mode);

struct HedgeRow {
    double spot = 0.0;
    HedgeMode mode = HedgeMode::delta;
    double phi = 0.0;
    VarianceRate rate;
};

/// One row per spot and mode.
std::vector<HedgeRow> hedge_report(const PriceCurve& v, const std::vector<double>& spots,
                                   const std::vector<HedgeMode>& modes, double sigma, double rho,
                                   const levy::JumpQuadrature& q);

}  // namespace illiquid::hedging
