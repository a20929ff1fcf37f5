#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace illiquid::levy {

// Jump measures nu(dz) on log-jump sizes z, each given by its density.

struct ZeroJumps {};

/// Gaussian log-jumps: lambda * N(m, delta^2) density.
struct Merton {
    double intensity;  // jumps per year
    double mean;       // mean log-jump m
    double stdev;      // log-jump standard deviation delta
};

/// Double-exponential log-jumps.
struct Kou {
    double intensity;  // jumps per year
    double p_up;       // probability of an upward jump
    double rate_up;    // decay of positive jumps, lambda+
    double rate_down;  // decay of negative jumps, lambda-
};

/// Variance Gamma: nu(dz) = exp(A z - B |z|) / (kappa |z|) dz.
struct VarianceGamma {
    double theta;  // drift of the subordinated Brownian motion
    double sigma;  // volatility of the subordinated Brownian motion
    double kappa;  // variance rate of the gamma subordinator

    double a() const;  // A = theta / sigma^2
    double b() const;  // B = sqrt(theta^2 + 2 sigma^2 / kappa) / sigma^2
};

using Variant = std::variant<ZeroJumps, Merton, Kou, VarianceGamma>;

/// Validated jump measure. Immutable after construction.
class LevyModel {
public:
    LevyModel() = default;
    LevyModel(Variant v);  // throws Error{invalid_argument} on bad parameters

    static LevyModel zero() { return LevyModel{}; }
    static LevyModel merton(double intensity, double mean, double stdev);
    static LevyModel kou(double intensity, double p_up, double rate_up, double rate_down);
    static LevyModel variance_gamma(double theta, double sigma, double kappa);

    const Variant& params() const noexcept { return v_; }
    bool is_zero() const noexcept { return std::holds_alternative<ZeroJumps>(v_); }
    bool finite_activity() const noexcept { return !std::holds_alternative<VarianceGamma>(v_); }
    std::string name() const;

private:
    Variant v_{ZeroJumps{}};
};

/// Growth bound h(z) = C |z|^-alpha (e^{D- z} 1{z>=0} + e^{D+ z} 1{z<0}) e^{-mu z^2}.
struct AdmissibleEnvelope {
    double c = 1.0;
    double alpha = 0.0;
    double d_minus = 0.0;
    double d_plus = 0.0;
    double mu = 0.0;

    double shape(double z) const;  // h(z) / C
    double operator()(double z) const { return c * shape(z); }
    bool exponential_moment_finite() const;  // integrability of e^z h(z) at +infinity
};

struct JumpQuadrature {
    double dx = 0.0;
    int k_left = 0;   // <= 0
    int k_right = 0;  // >= 0
    std::vector<double> weights;  // nu_k for k = k_left..k_right
    bool finite_activity = true;

    std::size_t size() const noexcept { return weights.size(); }
    double node(std::size_t n) const noexcept { return (k_left + static_cast<int>(n)) * dx; }
    double weight(int k) const noexcept { return weights[static_cast<std::size_t>(k - k_left)]; }
    std::vector<double> nodes() const;
};

double density(const LevyModel& model, double z);

AdmissibleEnvelope envelope_params(const LevyModel& model);

bool check_admissible(const LevyModel& model, const AdmissibleEnvelope& env, std::span<const double> samples);

/// Midpoint-average weights nu_k = (nu(z_{k+1/2}) + nu(z_{k-1/2})) dx / 2 covering [b_left, b_right].
/// For infinite-activity measures the k = 0 node is excluded with weight 0.
JumpQuadrature build_quadrature(const LevyModel& model, double b_left, double b_right, double dx);

/// Symmetric truncation bound B_r such that the density at +-B_r has fallen below
/// `rel_tol` times its peak over the scanned range. Capped at `b_max`.
double default_truncation(const LevyModel& model, double dx, double rel_tol = 1e-10, double b_max = 10.0);

/// Quadrature on [-B, B] with B = default_truncation(model, dx).
JumpQuadrature build_default_quadrature(const LevyModel& model, double dx);

double total_intensity(const JumpQuadrature& q);

/// gamma = -sigma^2/2 - int (e^y - 1 - y 1{|y|<=1}) nu(dy), by fine midpoint quadrature.
double martingale_drift(const LevyModel& model, double sigma);

/// int (e^y - 1) nu(dy). Finite for every built-in measure with a finite exponential moment.
double exponential_compensator(const LevyModel& model);

/// int_{|y|<=1} y nu(dy).
double small_jump_mean(const LevyModel& model);

}  // namespace illiquid::levy
