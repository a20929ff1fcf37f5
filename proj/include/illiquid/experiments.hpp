#pragma once

#include "illiquid/config.hpp"
#include "illiquid/implied_vol.hpp"
#include "illiquid/solver.hpp"
#include "illiquid/table.hpp"

#include <string>
#include <vector>

namespace illiquid {

/// One march: the config's model when `jumps` is set, no jumps otherwise, at liquidity `rho`.
struct RunSpec {
    double rho = 0.0;
    bool jumps = false;
};

Problem build_problem(const RunConfig& c, const RunSpec& run);

Surface solve(const RunConfig& c, const RunSpec& run);

/// Independent marches dispatched in parallel; results in input order.
std::vector<Surface> solve_all(const RunConfig& c, const std::vector<RunSpec>& runs);

/// S,V at the config spots for the config model and rho.
Table price_table(const RunConfig& c);

/// S,bs,fs,bs_pide,fs_pide: no jumps / jumps crossed with rho = 0 / the config rho.
Table table1(const RunConfig& c);

/// S followed by fs and fs_pide columns for every rho in c.rhos.
Table table2(const RunConfig& c);

/// Put prices at strike K' from a surface marched at strike K, by homogeneity: V(S; K') = (K'/K) V(S K / K'; K).
std::vector<double> prices_over_strikes(const Surface& s, double spot, const std::vector<double>& strikes);

struct SmileRun {
    std::vector<iv::SmileCurve> curves;  // fs, pide, fs_pide; failed inversions hold NaN
    std::vector<std::string> failures;
};

/// Implied-vol curves of the F-S (config rho, no jumps), classical PIDE (rho = 0) and F-S PIDE (config rho) prices.
SmileRun smile_curves(const RunConfig& c);

Table smile_table(const SmileRun& run);

/// S,mode,phi,var_rate_diff,var_rate_jump on the F-S PIDE surface at t = 0.
Table hedge_table(const RunConfig& c);

/// price,se,paths,seed for the config model at rho = 0.
Table mc_table(const RunConfig& c);

/// tau,x,S,u,V,psi, row-major by time level.
Table surface_table(const Surface& s);

}  // namespace illiquid
