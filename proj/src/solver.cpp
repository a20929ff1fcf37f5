#include "illiquid/solver.hpp"

#include "illiquid/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace illiquid {

SolverGrid make_grid(double maturity, double dx, double dt, int n_half) {
    if (!(maturity > 0.0)) throw Error(Errc::invalid_argument, "grid: maturity must be > 0");
    if (!(dx > 0.0)) throw Error(Errc::invalid_argument, "grid: dx must be > 0");
    if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "grid: dt must be > 0");
    if (n_half < 4 || n_half % 2 != 0) throw Error(Errc::invalid_argument, "grid: N must be even and >= 4");
    const double m = maturity / dt;
    const long steps = std::lround(m);
    if (steps < 1 || std::abs(m - static_cast<double>(steps)) > 1e-9 * m)
        throw Error(Errc::invalid_argument, "grid: maturity / dt must be a positive integer");
    return SolverGrid{n_half, static_cast<int>(steps), dx, dt};
}

Problem make_problem(const MarketParams& market, const levy::LevyModel& model, const SolverGrid& grid,
                     const SchemeOptions& scheme, std::optional<double> b_left, std::optional<double> b_right) {
    market.validate();
    const SolverGrid checked = make_grid(grid.maturity(), grid.dx, grid.dt, grid.n_half);
    if (std::abs(checked.maturity() - market.maturity) > 1e-9 * market.maturity)
        throw Error(Errc::invalid_argument, "grid: steps * dt must equal the maturity");
    if (!(scheme.rho_dpsi_cap > 0.0 && scheme.rho_dpsi_cap < 1.0))
        throw Error(Errc::invalid_argument, "scheme: rho_dpsi_cap must lie in (0, 1)");
    if (!(scheme.ratio_floor > 0.0 && scheme.ratio_floor < 1.0))
        throw Error(Errc::invalid_argument, "scheme: ratio_floor must lie in (0, 1)");

    Problem p{market, model, checked, scheme, {}};
    if (p.scheme.activity == Activity::automatic)
        p.scheme.activity = model.finite_activity() ? Activity::finite : Activity::infinite;
    if (p.scheme.activity == Activity::finite && !model.finite_activity())
        throw Error(Errc::activity_class, "scheme: the finite-activity scheme needs a finite-activity measure (" +
                                              model.name() + " has infinite activity)");

    const double dx = checked.dx;
    if (model.is_zero()) {
        p.quadrature = levy::build_quadrature(model, -dx, dx, dx);
    } else {
        const double b = levy::default_truncation(model, dx);
        p.quadrature = levy::build_quadrature(model, b_left.value_or(-b), b_right.value_or(b), dx);
    }
    return p;
}

std::span<const double> Surface::level(int j) const {
    const auto n = static_cast<std::size_t>(grid.size());
    return std::span<const double>(u).subspan(static_cast<std::size_t>(j) * n, n);
}

std::span<const double> Surface::strategy(int j) const {
    const auto n = static_cast<std::size_t>(grid.size());
    return std::span<const double>(psi).subspan(static_cast<std::size_t>(j) * n, n);
}

double payoff_h(double x, double strike, Payoff payoff) {
    const double s = strike * std::exp(x);
    return payoff == Payoff::put ? std::max(strike - s, 0.0) : std::max(s - strike, 0.0);
}

double boundary_g(double tau, double x, double strike, double r, Payoff payoff) {
    return payoff_h(x + r * tau, strike, payoff);
}

namespace {

Row row_from_drift(double s2, double a, std::optional<double> lambda, double dx, double dt, bool central) {
    const double diffusion = dt * s2 / (2.0 * dx * dx);
    Row row;
    if (central) {
        row.minus = -diffusion + dt * a / (2.0 * dx);
        row.plus = -diffusion - dt * a / (2.0 * dx);
        row.upwind = false;
    } else {
        row.minus = -diffusion + dt / dx * std::min(a, 0.0);
        row.plus = -diffusion - dt / dx * std::max(a, 0.0);
    }
    row.diag = 1.0 - (row.minus + row.plus);
    if (lambda) row.diag += dt * *lambda;
    return row;
}

}  // namespace

Row assemble_row(double sigma_i, double omega_i, std::optional<double> lambda, double dx, double dt, double r,
                 Convection convection) {
    const double s2 = sigma_i * sigma_i;
    const double a = r - 0.5 * s2 - omega_i;
    return row_from_drift(s2, a, lambda, dx, dt, convection == Convection::central && std::abs(a) * dx <= s2);
}

Row assemble_row_consistent(double sigma_i, double jump_mean, std::optional<double> lambda, double dx, double dt,
                            double r, Convection convection) {
    const double s2 = sigma_i * sigma_i;
    const double curvature = 2.0 * (std::cosh(dx) - 1.0) / (dx * dx);
    const double target = r - 0.5 * s2 * curvature - jump_mean;
    const double central = target * dx / std::sinh(dx);
    if (convection == Convection::central && std::abs(central) * dx <= s2)
        return row_from_drift(s2, central, lambda, dx, dt, true);
    const double a = target >= 0.0 ? target * dx / std::expm1(dx) : -target * dx / std::expm1(-dx);
    return row_from_drift(s2, a, lambda, dx, dt, false);
}

double shifted_exp(int i, double xi, const SolverGrid& grid, ShiftRule rule) {
    if (rule == ShiftRule::taylor) return 1.0 + std::expm1(grid.dx) / grid.dx * xi;
    const double pos = grid.index(i) + xi / grid.dx;
    const int last = grid.size() - 1;
    if (pos < 0.0 || pos > last) return std::exp(xi);
    const int lo = std::min(static_cast<int>(pos), last - 1);
    const double w = pos - lo;
    const int rel = lo - grid.index(i);
    return (1.0 - w) * std::exp(rel * grid.dx) + w * std::exp((rel + 1) * grid.dx);
}

StrategyLevel strategy_update(std::span<const double> u, const SolverGrid& grid, double tau, const MarketParams& m,
                              double rho_dpsi_cap) {
    const int size = grid.size();
    StrategyLevel out;
    out.psi.assign(size, 0.0);
    out.dpsi.assign(size, 0.0);
    out.sigma.assign(size, m.sigma);
    out.psi_bound.assign(size, 0.0);

    const double disc = std::exp(-m.r * tau) / m.strike;
    for (int n = 1; n < size - 1; ++n) {
        const double x = grid.x(n - grid.n_half + 1);
        out.psi[n] = disc * std::exp(-x) * (u[n + 1] - u[n - 1]) / (2.0 * grid.dx);
    }
    out.psi[0] = out.psi[1];
    out.psi[size - 1] = out.psi[size - 2];

    for (int n = 0; n < size - 1; ++n) {
        double d = (out.psi[n + 1] - out.psi[n]) / grid.dx;
        if (m.rho > 0.0) {
            if (std::abs(d) > m.strategy_bound) {
                d = std::copysign(m.strategy_bound, d);
                ++out.bound_clamps;
            }
            if (std::abs(m.rho * d) > rho_dpsi_cap) {
                d = std::copysign(rho_dpsi_cap / m.rho, d);
                ++out.cap_clamps;
            }
        }
        out.dpsi[n] = d;
        out.sigma[n] = feedback::effective_vol(m.sigma, m.rho, d);
    }
    out.psi_bound[0] = out.psi[0];
    for (int n = 0; n < size - 1; ++n) out.psi_bound[n + 1] = out.psi_bound[n] + out.dpsi[n] * grid.dx;
    return out;
}

namespace {

double interp_nodes(std::span<const double> v, double pos) {
    const int last = static_cast<int>(v.size()) - 1;
    if (pos <= 0.0) return v[0];
    if (pos >= last) return v[last];
    const int lo = std::min(static_cast<int>(pos), last - 1);
    const double w = pos - lo;
    return (1.0 - w) * v[lo] + w * v[lo + 1];
}

}  // namespace

double fixed_point_ratio(std::span<const double> psi_bound, int n, double base, double rho, double dx) noexcept {
    const double anchor = psi_bound[static_cast<std::size_t>(n)];
    const double lowest = -1.0 + 1e-12;
    auto map = [&](double r) {
        return base + rho * (interp_nodes(psi_bound, n + std::log1p(std::max(r, lowest)) / dx) - anchor);
    };
    double r = base;
    for (int it = 0; it < 100; ++it) {
        const double next = map(r);
        if (std::abs(next - r) <= 1e-13) return next;
        r = next;
    }

    // substitution stalled: walk g(r) = r - T(r) until it changes sign, then bisect
    r = std::max(r, lowest);
    const double dir = map(r) > r ? 1.0 : -1.0;
    double a = r;
    double b = r;
    for (;;) {
        b = std::max(a + dir * 1e-3, lowest);
        if ((b - map(b)) * dir >= 0.0) break;
        if (b == lowest) return lowest;  // no root above -1: the ratio is floored downstream
        a = b;
        if (std::abs(a - base) > 1e3) return std::nan("");
    }
    for (int it = 0; it < 200 && std::abs(b - a) > 1e-14; ++it) {
        const double mid = 0.5 * (a + b);
        ((mid - map(mid)) * dir >= 0.0 ? b : a) = mid;
    }
    return 0.5 * (a + b);
}

void jump_ratios(int i, const StrategyLevel& level, const SolverGrid& grid, const levy::JumpQuadrature& q,
                 double rho, HMode mode, std::span<double> ratio) {
    const int n = grid.index(i);
    const int size = grid.size();
    for (std::size_t k = 0; k < q.size(); ++k) {
        const int offset = q.k_left + static_cast<int>(k);
        const double base = std::expm1(offset * q.dx);
        if (rho == 0.0) {
            ratio[k] = base;
        } else if (mode == HMode::first_order) {
            const int m = std::clamp(n + offset, 0, size - 1);
            ratio[k] = base + rho * (level.psi[m] - level.psi[n]);
        } else {
            ratio[k] = fixed_point_ratio(level.psi_bound, n, base, rho, grid.dx);
            if (std::isnan(ratio[k])) {
                std::ostringstream os;
                os << "jump_ratios: H fixed point failed at i=" << i << ", z=" << offset * q.dx;
                throw Error(Errc::contraction, os.str());
            }
        }
    }
}

std::size_t shifts_from_ratios(std::span<double> ratio_to_xi, const levy::JumpQuadrature& q, double floor,
                               double& omega_i) {
    std::size_t floored = 0;
    double om = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        double r = ratio_to_xi[k];
        om += r * q.weights[k];
        if (1.0 + r < floor) {
            r = floor - 1.0;
            if (q.weights[k] > 0.0) ++floored;
        }
        ratio_to_xi[k] = std::log1p(r);
    }
    omega_i = om;
    return floored;
}

double shifted_value(std::span<const double> u, const SolverGrid& grid, int i, double xi, double tau, double strike,
                     double r, Payoff payoff, ShiftRule rule) {
    const int n = grid.index(i);
    if (rule == ShiftRule::taylor) return u[n] + (u[n + 1] - u[n]) / grid.dx * xi;
    const double pos = n + xi / grid.dx;
    const int last = grid.size() - 1;
    if (pos < 0.0 || pos > last) return boundary_g(tau, grid.x(i) + xi, strike, r, payoff);
    const int lo = std::min(static_cast<int>(pos), last - 1);
    const double w = pos - lo;
    return (1.0 - w) * u[lo] + w * u[lo + 1];
}

double integral_term_finite(int i, std::span<const double> u, const SolverGrid& grid, const levy::JumpQuadrature& q,
                            std::span<const double> xi, double tau, const MarketParams& m, const SchemeOptions& s) {
    double sum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q.weights[k] == 0.0) continue;
        sum += shifted_value(u, grid, i, xi[k], tau, m.strike, m.r, s.payoff, s.shift) * q.weights[k];
    }
    return grid.dt * sum;
}

double integral_term_infinite(int i, std::span<const double> u, const SolverGrid& grid,
                              const levy::JumpQuadrature& q, std::span<const double> xi, double tau,
                              const MarketParams& m, const SchemeOptions& s) {
    const double ui = u[grid.index(i)];
    double sum = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q.weights[k] == 0.0) continue;
        sum += (shifted_value(u, grid, i, xi[k], tau, m.strike, m.r, s.payoff, s.shift) - ui) * q.weights[k];
    }
    return grid.dt * sum;
}

double price_at(const Surface& s, double spot) {
    if (!(spot > 0.0)) throw Error(Errc::invalid_argument, "price_at: spot must be > 0");
    const SolverGrid& g = s.grid;
    const double x = std::log(spot / s.strike);
    const double lo = g.x(g.interior_lo());
    const double hi = g.x(g.interior_hi());
    if (x < lo - 1e-12 || x > hi + 1e-12) {
        std::ostringstream os;
        os << "price_at: S=" << spot << " lies outside the interior band [" << s.strike * std::exp(lo) << ", "
           << s.strike * std::exp(hi) << "]";
        throw Error(Errc::out_of_band, os.str());
    }
    const auto u = s.level(g.steps);
    const double pos = g.index(0) + x / g.dx;
    const int n = static_cast<int>(std::floor(pos));
    const double w = pos - n;
    const double v = w == 0.0 ? u[n] : (1.0 - w) * u[n] + w * u[n + 1];
    return std::exp(-s.rate * g.maturity()) * v;
}

}  // namespace illiquid
