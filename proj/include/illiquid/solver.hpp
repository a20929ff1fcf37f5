#pragma once

#include "illiquid/feedback.hpp"
#include "illiquid/levy.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace illiquid {

enum class Payoff { put, call };
enum class Activity { automatic, finite, infinite };
enum class HMode { first_order, fixed_point };

// Value of u at x_i + xi: linear interpolation between nodes, or the one-sided Taylor rule
// u_i + (u_{i+1} - u_i) xi / dx.
enum class ShiftRule { interpolate, taylor };

// central: centered convection with upwind fallback when |a| dx > sigma_i^2. upwind: one-sided throughout.
enum class Convection { central, upwind };

struct SchemeOptions {
    Activity activity = Activity::automatic;
    HMode h_mode = HMode::first_order;
    ShiftRule shift = ShiftRule::interpolate;
    Convection convection = Convection::central;
    Payoff payoff = Payoff::put;
    double rho_dpsi_cap = 0.95;  // ceiling on |rho Dpsi| after the strategy-bound clamp
    double ratio_floor = 1e-12;  // 1 + H/S is floored at this value inside the march
    // Replace omega by the drift that makes each discrete row exact on the stock price e^x.
    bool martingale_drift = true;
};

/// Log-price lattice x_i = i dx, i = -N+1..N-1, with M steps of size dt in tau = T - t.
struct SolverGrid {
    int n_half = 800;
    int steps = 200;
    double dx = 0.01;
    double dt = 0.005;

    int size() const noexcept { return 2 * n_half - 1; }
    int index(int i) const noexcept { return i + n_half - 1; }
    double x(int i) const noexcept { return i * dx; }
    int first() const noexcept { return -n_half + 1; }
    int last() const noexcept { return n_half - 1; }
    int interior_lo() const noexcept { return -n_half / 2 + 1; }
    int interior_hi() const noexcept { return n_half / 2 - 1; }
    bool interior(int i) const noexcept { return i >= interior_lo() && i <= interior_hi(); }
    double tau(int j) const noexcept { return j * dt; }
    double maturity() const noexcept { return steps * dt; }
};

/// Throws Error{invalid_argument} unless N is even and positive, dx, dt > 0 and T / dt is an integer.
SolverGrid make_grid(double maturity, double dx, double dt, int n_half = 800);

struct MarchDiagnostics {
    std::size_t bound_clamps = 0;    // |Dpsi| clamped to the strategy bound L
    std::size_t cap_clamps = 0;      // |rho Dpsi| clamped to rho_dpsi_cap
    std::size_t ratio_floors = 0;    // jump/node pairs with 1 + H/S floored
    std::size_t upwind_rows = 0;     // rows that fell back to upwind convection
    std::size_t rows = 0;            // assembled rows
    double min_dominance = 0.0;      // min over rows of diag - |minus| - |plus|
    bool all_dominant = true;
};

struct Problem {
    MarketParams market;
    levy::LevyModel model;
    SolverGrid grid;
    SchemeOptions scheme;
    levy::JumpQuadrature quadrature;

    bool infinite_scheme() const noexcept { return scheme.activity == Activity::infinite; }
};

/// Validates the inputs and builds the jump quadrature on the solver step. Truncation bounds default to
/// levy::default_truncation. Resolves Activity::automatic from the model; a finite scheme with an
/// infinite-activity model throws Error{activity_class}.
Problem make_problem(const MarketParams& market, const levy::LevyModel& model, const SolverGrid& grid,
                     const SchemeOptions& scheme, std::optional<double> b_left = {},
                     std::optional<double> b_right = {});

struct Surface {
    SolverGrid grid;
    double strike = 100.0;
    double rate = 0.0;
    std::vector<double> u;    // (steps + 1) x size, row-major by time level
    std::vector<double> psi;  // same layout
    MarchDiagnostics diagnostics;

    std::span<const double> level(int j) const;
    std::span<const double> strategy(int j) const;
};

// Per-node building blocks. The serial reference march is composed from these.

double payoff_h(double x, double strike, Payoff payoff = Payoff::put);

/// Boundary value h(x + r tau).
double boundary_g(double tau, double x, double strike, double r, Payoff payoff = Payoff::put);

struct Row {
    double minus = 0.0;
    double diag = 1.0;
    double plus = 0.0;
    bool upwind = true;
};

/// Coefficients of beta_- u_{i-1} + beta_i u_i + beta_+ u_{i+1}. A lambda adds dt*lambda to the diagonal.
Row assemble_row(double sigma_i, double omega_i, std::optional<double> lambda, double dx, double dt, double r,
                 Convection convection = Convection::central);

/// Row with the drift chosen so that the discrete operator maps e^x to r e^x. jump_mean is
/// sum_k (E_k - 1) nu_k with E_k the shift rule applied to e^x at the shifted point, relative to e^{x_i}.
Row assemble_row_consistent(double sigma_i, double jump_mean, std::optional<double> lambda, double dx, double dt,
                            double r, Convection convection = Convection::central);

/// e^{x_i + xi} / e^{x_i} as seen through the shift rule; used for the discrete drift.
double shifted_exp(int i, double xi, const SolverGrid& grid, ShiftRule rule);

struct StrategyLevel {
    std::vector<double> psi;        // delta in S at each node
    std::vector<double> dpsi;       // forward difference of psi in x, clamped
    std::vector<double> sigma;      // effective volatility
    std::vector<double> psi_bound;  // psi rebuilt from the clamped differences (Lipschitz in x with constant L)
    std::size_t bound_clamps = 0;
    std::size_t cap_clamps = 0;
};

StrategyLevel strategy_update(std::span<const double> u, const SolverGrid& grid, double tau, const MarketParams& m,
                              double rho_dpsi_cap = 0.95);

/// Jump ratios H/S at node i for every quadrature node under the given H-mode.
void jump_ratios(int i, const StrategyLevel& level, const SolverGrid& grid, const levy::JumpQuadrature& q,
                 double rho, HMode mode, std::span<double> ratio);

/// H/S at node n solving r = base + rho (psi_bound(x_n + ln(1 + r)) - psi_bound(x_n)). Substitution first, then a
/// bracketing search when it stalls. Returns -1 + 1e-12 when no root lies above -1, NaN on failure.
double fixed_point_ratio(std::span<const double> psi_bound, int n, double base, double rho, double dx) noexcept;

/// omega_i and xi_k from the ratios; xi written in place of the ratios. Returns the number of floored ratios.
std::size_t shifts_from_ratios(std::span<double> ratio_to_xi, const levy::JumpQuadrature& q, double floor,
                               double& omega_i);

/// u(tau_j, x_i + xi) under the shift rule; nodes beyond the lattice take the boundary value.
double shifted_value(std::span<const double> u, const SolverGrid& grid, int i, double xi, double tau, double strike,
                     double r, Payoff payoff, ShiftRule rule);

/// dt * sum_k u(x_i + xi_k) nu_k.
double integral_term_finite(int i, std::span<const double> u, const SolverGrid& grid, const levy::JumpQuadrature& q,
                            std::span<const double> xi, double tau, const MarketParams& m, const SchemeOptions& s);

/// dt * sum_k [u(x_i + xi_k) - u_i] nu_k.
double integral_term_infinite(int i, std::span<const double> u, const SolverGrid& grid,
                              const levy::JumpQuadrature& q, std::span<const double> xi, double tau,
                              const MarketParams& m, const SchemeOptions& s);

/// Fused OpenMP march.
Surface march(const Problem& p);

/// Serial march built from the per-node operations; kept as the test oracle for march().
Surface march_reference(const Problem& p);

/// e^{-rT} times u at tau = T, linearly interpolated in x. Throws Error{out_of_band} outside the interior band.
double price_at(const Surface& s, double spot);

}  // namespace illiquid
