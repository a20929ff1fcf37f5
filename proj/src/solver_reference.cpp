#include "illiquid/error.hpp"
#include "illiquid/solver.hpp"
#include "illiquid/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace illiquid {

Surface march_reference(const Problem& p) {
    const SolverGrid& g = p.grid;
    const MarketParams& m = p.market;
    const levy::JumpQuadrature& q = p.quadrature;
    const int size = g.size();
    const int lo = g.interior_lo();
    const int hi = g.interior_hi();
    const int rows = hi - lo + 1;
    const bool jumps = !p.model.is_zero();
    std::optional<double> lambda;
    if (!p.infinite_scheme()) lambda = jumps ? levy::total_intensity(q) : 0.0;

    Surface s;
    s.grid = g;
    s.strike = m.strike;
    s.rate = m.r;
    s.u.assign(static_cast<std::size_t>(g.steps + 1) * size, 0.0);
    s.psi.assign(s.u.size(), 0.0);
    s.diagnostics.min_dominance = std::numeric_limits<double>::infinity();

    for (int i = g.first(); i <= g.last(); ++i) s.u[g.index(i)] = payoff_h(g.x(i), m.strike, p.scheme.payoff);

    std::vector<double> xi(q.size()), lower(rows), diag(rows), upper(rows), rhs(rows), scratch(rows);
    for (int j = 0; j < g.steps; ++j) {
        const double tau = g.tau(j);
        const auto u = s.level(j);
        const StrategyLevel level = strategy_update(u, g, tau, m, p.scheme.rho_dpsi_cap);
        std::copy(level.psi.begin(), level.psi.end(), s.psi.begin() + static_cast<std::ptrdiff_t>(j) * size);
        s.diagnostics.bound_clamps += level.bound_clamps;
        s.diagnostics.cap_clamps += level.cap_clamps;

        for (int i = lo; i <= hi; ++i) {
            const int n = g.index(i);
            double om = 0.0;
            double integral = 0.0;
            if (jumps) {
                jump_ratios(i, level, g, q, m.rho, p.scheme.h_mode, xi);
                s.diagnostics.ratio_floors += shifts_from_ratios(xi, q, p.scheme.ratio_floor, om);
                integral = p.infinite_scheme() ? integral_term_infinite(i, u, g, q, xi, tau, m, p.scheme)
                                               : integral_term_finite(i, u, g, q, xi, tau, m, p.scheme);
            }
            Row row;
            if (p.scheme.martingale_drift) {
                double jump_mean = 0.0;
                if (jumps)
                    for (std::size_t k = 0; k < q.size(); ++k)
                        if (q.weights[k] != 0.0)
                            jump_mean += (shifted_exp(i, xi[k], g, p.scheme.shift) - 1.0) * q.weights[k];
                row = assemble_row_consistent(level.sigma[n], jump_mean, lambda, g.dx, g.dt, m.r, p.scheme.convection);
            } else {
                row = assemble_row(level.sigma[n], om, lambda, g.dx, g.dt, m.r, p.scheme.convection);
            }
            const double margin = row.diag - std::abs(row.minus) - std::abs(row.plus);
            s.diagnostics.min_dominance = std::min(s.diagnostics.min_dominance, margin);
            ++s.diagnostics.rows;
            if (row.upwind) ++s.diagnostics.upwind_rows;
            if (!(margin > 0.0) || row.minus > 0.0 || row.plus > 0.0) {
                std::ostringstream os;
                os << "march: row i=" << i << " at level " << j << " is not diagonally dominant (margin " << margin
                   << ")";
                throw Error(Errc::scheme_instability, os.str());
            }
            const int r = i - lo;
            lower[r] = row.minus;
            diag[r] = row.diag;
            upper[r] = row.plus;
            rhs[r] = u[n] + integral;
        }

        const double tau1 = g.tau(j + 1);
        auto next = s.u.begin() + static_cast<std::ptrdiff_t>(j + 1) * size;
        for (int i = g.first(); i <= g.last(); ++i)
            if (!g.interior(i)) next[g.index(i)] = boundary_g(tau1, g.x(i), m.strike, m.r, p.scheme.payoff);
        rhs[0] -= lower[0] * next[g.index(lo - 1)];
        rhs[rows - 1] -= upper[rows - 1] * next[g.index(hi + 1)];
        solve_tridiagonal(lower, diag, upper, rhs, scratch);
        std::copy(rhs.begin(), rhs.end(), next + g.index(lo));
    }

    const StrategyLevel last = strategy_update(s.level(g.steps), g, g.maturity(), m, p.scheme.rho_dpsi_cap);
    std::copy(last.psi.begin(), last.psi.end(), s.psi.begin() + static_cast<std::ptrdiff_t>(g.steps) * size);
    return s;
}

}  // namespace illiquid
