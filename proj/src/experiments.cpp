#include "illiquid/experiments.hpp"

#include "illiquid/error.hpp"
#include "illiquid/hedging.hpp"
#include "illiquid/montecarlo.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>

namespace illiquid {

Problem build_problem(const RunConfig& c, const RunSpec& run) {
    MarketParams m = c.market;
    m.rho = run.rho;
    SchemeOptions scheme = c.scheme;
    const levy::LevyModel model = run.jumps ? c.model : levy::LevyModel::zero();
    if (!run.jumps) scheme.activity = Activity::automatic;
    return make_problem(m, model, c.solver_grid(), scheme, c.grid.b_left, c.grid.b_right);
}

Surface solve(const RunConfig& c, const RunSpec& run) { return march(build_problem(c, run)); }

std::vector<Surface> solve_all(const RunConfig& c, const std::vector<RunSpec>& runs) {
    std::vector<Surface> out(runs.size());
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(runs.size());
#pragma omp parallel for schedule(dynamic, 1) if (n > 1)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            out[static_cast<std::size_t>(k)] = solve(c, runs[static_cast<std::size_t>(k)]);
        } catch (...) {
#pragma omp critical(solve_all_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

Table price_table(const RunConfig& c) {
    Table t{{"S", "V"}, {}};
    if (c.spots.empty()) return t;
    const Surface s = solve(c, {c.market.rho, true});
    for (double spot : c.spots) t.add({spot, price_at(s, spot)});
    return t;
}

Table table1(const RunConfig& c) {
    Table t{{"S", "bs", "fs", "bs_pide", "fs_pide"}, {}};
    if (c.spots.empty()) return t;
    const double rho = c.market.rho;
    const auto s = solve_all(c, {{0.0, false}, {rho, false}, {0.0, true}, {rho, true}});
    for (double spot : c.spots)
        t.add({spot, price_at(s[0], spot), price_at(s[1], spot), price_at(s[2], spot), price_at(s[3], spot)});
    return t;
}

Table table2(const RunConfig& c) {
    Table t{{"S"}, {}};
    std::vector<RunSpec> runs;
    for (double rho : c.rhos) {
        char label[32];
        std::snprintf(label, sizeof label, "%g", rho);
        t.header.push_back(std::string("fs_rho") + label);
        t.header.push_back(std::string("fs_pide_rho") + label);
        runs.push_back({rho, false});
        runs.push_back({rho, true});
    }
    if (c.spots.empty()) return t;
    const auto s = solve_all(c, runs);
    for (double spot : c.spots) {
        std::vector<Cell> row{spot};
        for (const auto& surface : s) row.emplace_back(price_at(surface, spot));
        t.add(std::move(row));
    }
    return t;
}

std::vector<double> prices_over_strikes(const Surface& s, double spot, const std::vector<double>& strikes) {
    std::vector<double> out;
    out.reserve(strikes.size());
    for (double k : strikes) out.push_back(k / s.strike * price_at(s, spot * s.strike / k));
    return out;
}

SmileRun smile_curves(const RunConfig& c) {
    const double rho = c.market.rho;
    const char* names[] = {"fs", "pide", "fs_pide"};
    const auto surfaces = solve_all(c, {{rho, false}, {0.0, true}, {rho, true}});
    SmileRun run;
    for (std::size_t n = 0; n < surfaces.size(); ++n) {
        const auto prices = prices_over_strikes(surfaces[n], c.smile_spot, c.strikes);
        iv::SmileCurve curve{c.strikes, std::vector<double>(c.strikes.size()), names[n]};
        for (std::size_t k = 0; k < prices.size(); ++k) {
            try {
                curve.vols[k] = iv::implied_vol(prices[k], c.smile_spot, c.strikes[k], c.market.r, c.market.maturity);
            } catch (const Error& e) {
                curve.vols[k] = std::nan("");
                run.failures.push_back(std::string(names[n]) + " K=" + format_cell(c.strikes[k]) + ": " + e.what());
            }
        }
        run.curves.push_back(std::move(curve));
    }
    return run;
}

Table smile_table(const SmileRun& run) {
    Table t{{"K", "iv", "source"}, {}};
    for (const auto& curve : run.curves)
        for (std::size_t k = 0; k < curve.strikes.size(); ++k) t.add({curve.strikes[k], curve.vols[k], curve.source});
    return t;
}

Table hedge_table(const RunConfig& c) {
    Table t{{"S", "mode", "phi", "var_rate_diff", "var_rate_jump"}, {}};
    if (c.hedge.spots.empty() || c.hedge.modes.empty()) return t;
    const Problem p = build_problem(c, {c.market.rho, true});
    const Surface s = march(p);
    const hedging::PriceCurve curve(s);
    const auto rows =
        hedging::hedge_report(curve, c.hedge.spots, c.hedge.modes, c.market.sigma, c.market.rho, p.quadrature);
    for (const auto& r : rows) t.add({r.spot, hedging::to_string(r.mode), r.phi, r.rate.diffusion, r.rate.jump});
    return t;
}

Table mc_table(const RunConfig& c) {
    Table t{{"price", "se", "paths", "seed"}, {}};
    const auto r = mc::price_put_mc(c.model, c.market.sigma, c.market.r, c.market.maturity, c.mc.spot,
                                    c.market.strike, c.mc.sim);
    const Cell seed = r.seed <= static_cast<std::uint64_t>(INT64_MAX) ? Cell{static_cast<std::int64_t>(r.seed)}
                                                                     : Cell{std::to_string(r.seed)};
    t.add({r.price, r.se, static_cast<std::int64_t>(r.paths), seed});
    return t;
}

Table surface_table(const Surface& s) {
    Table t{{"tau", "x", "S", "u", "V", "psi"}, {}};
    const SolverGrid& g = s.grid;
    t.rows.reserve(static_cast<std::size_t>(g.steps + 1) * static_cast<std::size_t>(g.size()));
    for (int j = 0; j <= g.steps; ++j) {
        const auto u = s.level(j);
        const auto psi = s.strategy(j);
        const double tau = g.tau(j);
        const double disc = std::exp(-s.rate * tau);
        for (int i = g.first(); i <= g.last(); ++i) {
            const auto n = static_cast<std::size_t>(g.index(i));
            const double x = g.x(i);
            t.rows.push_back({tau, x, s.strike * std::exp(x), u[n], disc * u[n], psi[n]});
        }
    }
    return t;
}

}  // namespace illiquid
