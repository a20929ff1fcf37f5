#include "illiquid/error.hpp"
#include "illiquid/solver.hpp"
#include "illiquid/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace illiquid {

namespace {

struct LevelScratch {
    std::vector<double> psi, dpsi, sigma, psi_bound;
};

// Fused strategy pass: psi, clamped differences and effective vol in two parallel sweeps.
void strategy_kernel(std::span<const double> u, const SolverGrid& g, double tau, const MarketParams& m, double cap,
                     LevelScratch& w, std::size_t& bound_clamps, std::size_t& cap_clamps) {
    const int size = g.size();
    const double disc = std::exp(-m.r * tau) / m.strike;
    double* psi = w.psi.data();
#pragma omp parallel for schedule(static)
    for (int n = 1; n < size - 1; ++n) {
        const double x = g.x(n - g.n_half + 1);
        psi[n] = disc * std::exp(-x) * (u[n + 1] - u[n - 1]) / (2.0 * g.dx);
    }
    psi[0] = psi[1];
    psi[size - 1] = psi[size - 2];

    std::size_t nb = 0, nc = 0;
    double* dpsi = w.dpsi.data();
    double* sigma = w.sigma.data();
#pragma omp parallel for schedule(static) reduction(+ : nb, nc)
    for (int n = 0; n < size - 1; ++n) {
        double d = (psi[n + 1] - psi[n]) / g.dx;
        if (m.rho > 0.0) {
            if (std::abs(d) > m.strategy_bound) {
                d = std::copysign(m.strategy_bound, d);
                ++nb;
            }
            if (std::abs(m.rho * d) > cap) {
                d = std::copysign(cap / m.rho, d);
                ++nc;
            }
        }
        dpsi[n] = d;
        sigma[n] = m.sigma / (1.0 - m.rho * d);
    }
    dpsi[size - 1] = 0.0;
    sigma[size - 1] = m.sigma;
    bound_clamps += nb;
    cap_clamps += nc;

    w.psi_bound[0] = psi[0];
    for (int n = 0; n < size - 1; ++n) w.psi_bound[n + 1] = w.psi_bound[n] + dpsi[n] * g.dx;
}

}  // namespace

Surface march(const Problem& p) {
    const SolverGrid& g = p.grid;
    const MarketParams& m = p.market;
    const SchemeOptions& opt = p.scheme;
    const levy::JumpQuadrature& q = p.quadrature;
    const int size = g.size();
    const int lo = g.interior_lo();
    const int hi = g.interior_hi();
    const int rows = hi - lo + 1;
    const bool jumps = !p.model.is_zero();
    const bool infinite = p.infinite_scheme();
    const double lambda = (!infinite && jumps) ? levy::total_intensity(q) : 0.0;

    // active quadrature nodes only
    std::vector<int> offset;
    std::vector<double> weight, base;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q.weights[k] == 0.0) continue;
        const int off = q.k_left + static_cast<int>(k);
        offset.push_back(off);
        weight.push_back(q.weights[k]);
        base.push_back(std::expm1(off * q.dx));
    }
    const int nk = static_cast<int>(offset.size());

    // e^{rel dx} for relative node offsets reachable by a shift
    const int rel_lo = q.k_left - 2;
    const int rel_hi = q.k_right + 2;
    std::vector<double> growth(static_cast<std::size_t>(rel_hi - rel_lo + 1));
    for (int rel = rel_lo; rel <= rel_hi; ++rel) growth[static_cast<std::size_t>(rel - rel_lo)] = std::exp(rel * g.dx);
    auto grow_at = [&](int rel) {
        return rel >= rel_lo && rel <= rel_hi ? growth[static_cast<std::size_t>(rel - rel_lo)] : std::exp(rel * g.dx);
    };

    Surface s;
    s.grid = g;
    s.strike = m.strike;
    s.rate = m.r;
    s.u.assign(static_cast<std::size_t>(g.steps + 1) * size, 0.0);
    s.psi.assign(s.u.size(), 0.0);
    MarchDiagnostics& diag_out = s.diagnostics;

    for (int i = g.first(); i <= g.last(); ++i) s.u[g.index(i)] = payoff_h(g.x(i), m.strike, opt.payoff);

    LevelScratch w{std::vector<double>(size), std::vector<double>(size), std::vector<double>(size),
                   std::vector<double>(size)};
    std::vector<double> lower(rows), diag(rows), upper(rows), rhs(rows), scratch(rows);
    double min_margin = std::numeric_limits<double>::infinity();

    for (int j = 0; j < g.steps; ++j) {
        const double tau = g.tau(j);
        const double* u = s.u.data() + static_cast<std::ptrdiff_t>(j) * size;
        strategy_kernel({u, static_cast<std::size_t>(size)}, g, tau, m, opt.rho_dpsi_cap, w, diag_out.bound_clamps,
                        diag_out.cap_clamps);
        std::copy(w.psi.begin(), w.psi.end(), s.psi.begin() + static_cast<std::ptrdiff_t>(j) * size);

        const double* psi = w.psi.data();
        const double* psib = w.psi_bound.data();
        const double* sig = w.sigma.data();
        std::size_t floors = 0, upwind = 0, bad_row = 0;
        double margin_min = std::numeric_limits<double>::infinity();
        int bad_i = 0;

#pragma omp parallel for schedule(static) reduction(+ : floors, upwind) reduction(min : margin_min)
        for (int i = lo; i <= hi; ++i) {
            const int n = g.index(i);
            const double xi_node = g.x(i);
            double om = 0.0;
            double sum = 0.0;
            double jump_mean = 0.0;
            for (int k = 0; k < nk; ++k) {
                double r = base[k];
                if (m.rho != 0.0) {
                    if (opt.h_mode == HMode::first_order) {
                        const int idx = std::clamp(n + offset[k], 0, size - 1);
                        r = base[k] + m.rho * (psi[idx] - psi[n]);
                    } else {
                        r = fixed_point_ratio({psib, static_cast<std::size_t>(size)}, n, base[k], m.rho, g.dx);
                        if (std::isnan(r)) {
#pragma omp atomic write
                            bad_row = 1;
                            r = base[k];
                        }
                    }
                }
                om += r * weight[k];
                if (1.0 + r < opt.ratio_floor) {
                    r = opt.ratio_floor - 1.0;
                    ++floors;
                }
                const double xi = std::log1p(r);
                double shifted;
                double grow;
                if (opt.shift == ShiftRule::taylor) {
                    shifted = u[n] + (u[n + 1] - u[n]) / g.dx * xi;
                    grow = 1.0 + std::expm1(g.dx) / g.dx * xi;
                } else {
                    const double pos = n + xi / g.dx;
                    if (pos < 0.0 || pos > size - 1) {
                        shifted = boundary_g(tau, xi_node + xi, m.strike, m.r, opt.payoff);
                        grow = std::exp(xi);
                    } else {
                        const int l = std::min(static_cast<int>(pos), size - 2);
                        const double a = pos - l;
                        shifted = (1.0 - a) * u[l] + a * u[l + 1];
                        grow = (1.0 - a) * grow_at(l - n) + a * grow_at(l + 1 - n);
                    }
                }
                if (opt.martingale_drift) jump_mean += (grow - 1.0) * weight[k];
                sum += infinite ? (shifted - u[n]) * weight[k] : shifted * weight[k];
            }

            const std::optional<double> lam = infinite ? std::nullopt : std::optional<double>(lambda);
            const Row row = opt.martingale_drift
                                ? assemble_row_consistent(sig[n], jump_mean, lam, g.dx, g.dt, m.r, opt.convection)
                                : assemble_row(sig[n], om, lam, g.dx, g.dt, m.r, opt.convection);
            if (row.upwind) ++upwind;
            const double minus = row.minus, plus = row.plus, d = row.diag;
            double margin = d - std::abs(minus) - std::abs(plus);
            if (minus > 0.0 || plus > 0.0) margin = std::min(margin, 0.0);
            margin_min = std::min(margin_min, margin);
            if (!(margin > 0.0)) {
#pragma omp atomic write
                bad_i = i;
            }

            const int r = i - lo;
            lower[r] = minus;
            diag[r] = d;
            upper[r] = plus;
            rhs[r] = u[n] + g.dt * sum;
        }

        if (bad_row) throw Error(Errc::contraction, "march: H fixed point failed to converge");
        diag_out.ratio_floors += floors;
        diag_out.upwind_rows += upwind;
        diag_out.rows += static_cast<std::size_t>(rows);
        min_margin = std::min(min_margin, margin_min);
        if (!(margin_min > 0.0)) {
            std::ostringstream os;
            os << "march: row i=" << bad_i << " at level " << j << " is not diagonally dominant (margin "
               << margin_min << ")";
            throw Error(Errc::scheme_instability, os.str());
        }

        const double tau1 = g.tau(j + 1);
        double* next = s.u.data() + static_cast<std::ptrdiff_t>(j + 1) * size;
        for (int i = g.first(); i <= g.last(); ++i)
            if (!g.interior(i)) next[g.index(i)] = boundary_g(tau1, g.x(i), m.strike, m.r, opt.payoff);
        rhs[0] -= lower[0] * next[g.index(lo - 1)];
        rhs[rows - 1] -= upper[rows - 1] * next[g.index(hi + 1)];
        solve_tridiagonal(lower, diag, upper, rhs, scratch);
        std::copy(rhs.begin(), rhs.end(), next + g.index(lo));
    }

    std::size_t nb = 0, nc = 0;
    strategy_kernel(s.level(g.steps), g, g.maturity(), m, opt.rho_dpsi_cap, w, nb, nc);
    std::copy(w.psi.begin(), w.psi.end(), s.psi.begin() + static_cast<std::ptrdiff_t>(g.steps) * size);
    diag_out.min_dominance = min_margin;
    diag_out.all_dominant = min_margin > 0.0;
    return s;
}

}  // namespace illiquid
