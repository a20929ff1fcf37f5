#include "illiquid/error.hpp"
#include "illiquid/implied_vol.hpp"
#include "illiquid/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace illiquid;

namespace {

double bs_put_delta(double s, double k, double sigma, double tau) {
    const double d1 = (std::log(s / k) + 0.5 * sigma * sigma * tau) / (sigma * std::sqrt(tau));
    return iv::norm_cdf(d1) - 1.0;
}

MarketParams market(double rho) {
    MarketParams m;
    m.rho = rho;
    return m;
}

const levy::LevyModel kVG = levy::LevyModel::variance_gamma(-0.33, 0.12, 0.16);
const levy::LevyModel kMerton = levy::LevyModel::merton(0.5, -0.1, 0.2);

// coarse grid for the more expensive comparisons
SolverGrid coarse() { return make_grid(1.0, 0.02, 0.01, 200); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) d = std::max(d, std::abs(a[n] - b[n]));
    return d;
}

}  // namespace

TEST(Grid, Construction) {
    const auto g = make_grid(1.0, 0.01, 0.005);
    EXPECT_EQ(g.steps, 200);
    EXPECT_EQ(g.size(), 1599);
    EXPECT_EQ(g.index(g.first()), 0);
    EXPECT_EQ(g.interior_lo(), -399);
    EXPECT_EQ(g.interior_hi(), 399);
    EXPECT_FALSE(g.interior(-400));
    EXPECT_THROW(make_grid(1.0, 0.01, 0.003), Error);
    EXPECT_THROW(make_grid(1.0, 0.01, 0.005, 801), Error);
    EXPECT_THROW(make_grid(1.0, -0.01, 0.005), Error);
}

TEST(Solver, ActivityMismatchIsRejected) {
    SchemeOptions s;
    s.activity = Activity::finite;
    try {
        make_problem(market(0.0), kVG, coarse(), s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::activity_class);
    }
}

TEST(Solver, AutomaticActivityFollowsTheModel) {
    EXPECT_TRUE(make_problem(market(0.0), kVG, coarse(), {}).infinite_scheme());
    EXPECT_FALSE(make_problem(market(0.0), kMerton, coarse(), {}).infinite_scheme());
}

TEST(Solver, PayoffAndBoundary) {
    EXPECT_DOUBLE_EQ(payoff_h(std::log(0.8), 100.0), 20.0);
    EXPECT_DOUBLE_EQ(payoff_h(0.1, 100.0), 0.0);
    EXPECT_NEAR(payoff_h(0.1, 100.0, Payoff::call), 100.0 * std::expm1(0.1), 1e-12);
    EXPECT_NEAR(boundary_g(0.5, -0.3, 100.0, 0.04), 100.0 - 100.0 * std::exp(-0.3 + 0.02), 1e-12);
}

TEST(Rows, DiffusionOnlyRowSumsToOne) {
    const Row row = assemble_row(0.12, 0.0, std::nullopt, 0.01, 0.005, 0.0);
    EXPECT_NEAR(row.diag + row.minus + row.plus, 1.0, 1e-14);
    EXPECT_LE(row.minus, 0.0);
    EXPECT_LE(row.plus, 0.0);
    EXPECT_GE(row.diag, 1.0);
}

TEST(Rows, IntensityRaisesTheDiagonal) {
    const Row a = assemble_row(0.12, 0.01, std::nullopt, 0.01, 0.005, 0.0);
    const Row b = assemble_row(0.12, 0.01, 0.1, 0.01, 0.005, 0.0);
    EXPECT_NEAR(b.diag - a.diag, 0.005 * 0.1, 1e-15);
    EXPECT_EQ(a.minus, b.minus);
    EXPECT_EQ(a.plus, b.plus);
}

TEST(Rows, UpwindCoversBothDriftSigns) {
    const double dx = 0.01, dt = 0.005, s = 0.05;
    const double diffusion = dt / (2.0 * dx * dx) * s * s;
    // a = r - s^2/2 - omega; positive drift loads the forward neighbour
    const Row up = assemble_row(s, -1.0, std::nullopt, dx, dt, 0.0, Convection::upwind);
    const double a_up = 0.0 - 0.5 * s * s + 1.0;
    EXPECT_NEAR(up.minus, -diffusion, 1e-15);
    EXPECT_NEAR(up.plus, -diffusion - dt / dx * a_up, 1e-15);
    const Row down = assemble_row(s, 1.0, std::nullopt, dx, dt, 0.0, Convection::upwind);
    const double a_down = -0.5 * s * s - 1.0;
    EXPECT_NEAR(down.minus, -diffusion + dt / dx * a_down, 1e-15);
    EXPECT_NEAR(down.plus, -diffusion, 1e-15);
    EXPECT_TRUE(up.upwind);
}

TEST(Rows, CentralFallsBackToUpwindForStrongDrift) {
    EXPECT_FALSE(assemble_row(0.12, 0.0, std::nullopt, 0.01, 0.005, 0.0).upwind);
    EXPECT_TRUE(assemble_row(0.12, 5.0, std::nullopt, 0.01, 0.005, 0.0).upwind);
}

TEST(Rows, ConsistentRowIsExactOnTheStockPrice) {
    // the discrete operator applied to e^x reproduces the drift r with the jump mean removed
    const double dx = 0.01, dt = 0.005, r = 0.03, s = 0.15, jm = 0.02;
    for (auto conv : {Convection::central, Convection::upwind}) {
        const Row row = assemble_row_consistent(s, jm, std::nullopt, dx, dt, r, conv);
        const double applied = row.minus * std::exp(-dx) + row.diag + row.plus * std::exp(dx);
        // (u^{j+1} - u^j) / dt = L u  with  L e^x = (r - jm) e^x, evaluated at x = 0
        EXPECT_NEAR((1.0 - applied) / dt, r - jm, 1e-9);
    }
}

TEST(Rows, AllRowsAreDiagonallyDominant) {
    for (double s : {0.01, 0.12, 1.0})
        for (double om : {-3.0, 0.0, 0.5})
            for (auto conv : {Convection::central, Convection::upwind}) {
                const Row row = assemble_row(s, om, 0.2, 0.01, 0.005, 0.05, conv);
                EXPECT_GT(row.diag, std::abs(row.minus) + std::abs(row.plus));
            }
}

TEST(Strategy, MatchesClosedFormDeltaOnTheLinearSurface) {
    const auto p = make_problem(market(0.0), levy::LevyModel::zero(), make_grid(1.0, 0.01, 0.005), {});
    const Surface s = march(p);
    const SolverGrid& g = s.grid;
    const auto psi = s.strategy(g.steps);
    double worst = 0.0;
    for (int i = -50; i <= 50; ++i) {
        const double spot = 100.0 * std::exp(g.x(i));
        worst = std::max(worst, std::abs(psi[g.index(i)] - bs_put_delta(spot, 100.0, 0.12, 1.0)));
    }
    EXPECT_LT(worst, 1e-3);
    // deep out of the money
    EXPECT_NEAR(psi[g.index(300)], 0.0, 1e-9);
}

TEST(Strategy, ClampsKeepTheEffectiveVolatilityFinite) {
    const auto g = make_grid(1.0, 0.01, 0.005, 200);
    std::vector<double> u(g.size());
    for (int i = g.first(); i <= g.last(); ++i) u[g.index(i)] = payoff_h(g.x(i), 100.0);
    const StrategyLevel lvl = strategy_update(u, g, 0.0, market(0.3));
    EXPECT_GT(lvl.bound_clamps, 0u);
    for (double d : lvl.dpsi) EXPECT_LE(std::abs(d), 1.0);
    for (double v : lvl.sigma) EXPECT_TRUE(std::isfinite(v) && v > 0.0);
}

TEST(Surface, PriceAtNodeAndOutOfBand) {
    const auto p = make_problem(market(0.0), levy::LevyModel::zero(), make_grid(1.0, 0.01, 0.005), {});
    const Surface s = march(p);
    const auto u = s.level(s.grid.steps);
    EXPECT_DOUBLE_EQ(price_at(s, 100.0 * std::exp(0.1)), u[s.grid.index(10)]);
    EXPECT_NEAR(price_at(s, 92.3116), 9.42895, 5e-3);
    EXPECT_NEAR(price_at(s, 100.0), 4.78444, 1e-2);
    try {
        price_at(s, 100.0 * std::exp(4.5));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::out_of_band);
    }
}

TEST(Surface, DiscountsWithTheRate) {
    MarketParams m;
    m.r = 0.05;
    const auto s = march(make_problem(m, levy::LevyModel::zero(), make_grid(1.0, 0.01, 0.005), {}));
    EXPECT_NEAR(price_at(s, 100.0), iv::bs_put(100.0, 100.0, 0.05, 1.0, 0.12), 1e-2);
}

TEST(Convergence, SecondOrderInSpace) {
    // Richardson ratios with a tiny time step; frozen from the closed-form oracle
    std::vector<double> err;
    for (auto [dx, n] : {std::pair{0.04, 100}, {0.02, 200}, {0.01, 400}}) {
        const auto s = march(make_problem(market(0.0), levy::LevyModel::zero(), make_grid(1.0, dx, 1e-4, n), {}));
        err.push_back(std::abs(price_at(s, 100.0) - iv::bs_put(100.0, 100.0, 0.0, 1.0, 0.12)));
    }
    EXPECT_GT(err[0] / err[1], 3.5);
    EXPECT_LT(err[0] / err[1], 4.6);
    EXPECT_GT(err[1] / err[2], 3.5);
    EXPECT_LT(err[1] / err[2], 4.6);
}

TEST(Convergence, FirstOrderInTime) {
    std::vector<double> err;
    for (double dt : {0.02, 0.01, 0.005}) {
        const auto s =
            march(make_problem(market(0.0), levy::LevyModel::zero(), make_grid(1.0, 0.0025, dt, 1600), {}));
        err.push_back(std::abs(price_at(s, 100.0) - iv::bs_put(100.0, 100.0, 0.0, 1.0, 0.12)));
    }
    EXPECT_GT(err[0] / err[1], 1.7);
    EXPECT_LT(err[0] / err[1], 2.3);
    EXPECT_GT(err[1] / err[2], 1.7);
    EXPECT_LT(err[1] / err[2], 2.3);
}

struct ParityCase {
    const char* name;
    levy::LevyModel model;
    double rho;
    HMode h;
    ShiftRule shift;
    Convection conv;
    bool consistent;
};

class KernelParity : public ::testing::TestWithParam<ParityCase> {};

TEST_P(KernelParity, FusedMarchMatchesReference) {
    const ParityCase& c = GetParam();
    SchemeOptions opt;
    opt.h_mode = c.h;
    opt.shift = c.shift;
    opt.convection = c.conv;
    opt.martingale_drift = c.consistent;
    const Problem p = make_problem(market(c.rho), c.model, coarse(), opt);
    const Surface fast = march(p);
    const Surface ref = march_reference(p);
    EXPECT_LE(max_abs_diff(fast.u, ref.u), 1e-10);
    EXPECT_LE(max_abs_diff(fast.psi, ref.psi), 1e-10);
    EXPECT_EQ(fast.diagnostics.bound_clamps, ref.diagnostics.bound_clamps);
    EXPECT_EQ(fast.diagnostics.upwind_rows, ref.diagnostics.upwind_rows);
    EXPECT_EQ(fast.diagnostics.rows, ref.diagnostics.rows);
}

INSTANTIATE_TEST_SUITE_P(
    Schemes, KernelParity,
    ::testing::Values(
        ParityCase{"bs", levy::LevyModel::zero(), 0.0, HMode::first_order, ShiftRule::interpolate, Convection::central, true},
        ParityCase{"fs", levy::LevyModel::zero(), 0.2, HMode::first_order, ShiftRule::interpolate, Convection::central, true},
        ParityCase{"vg", kVG, 0.0, HMode::first_order, ShiftRule::interpolate, Convection::central, true},
        ParityCase{"vg_fs", kVG, 0.2, HMode::first_order, ShiftRule::interpolate, Convection::central, true},
        ParityCase{"vg_fixed", kVG, 0.2, HMode::fixed_point, ShiftRule::interpolate, Convection::central, true},
        ParityCase{"vg_taylor_upwind", kVG, 0.1, HMode::first_order, ShiftRule::taylor, Convection::upwind, false},
        ParityCase{"merton", kMerton, 0.2, HMode::first_order, ShiftRule::interpolate, Convection::upwind, true},
        ParityCase{"merton_omega", kMerton, 0.3, HMode::fixed_point, ShiftRule::taylor, Convection::central, false}),
    [](const auto& info) { return std::string(info.param.name); });

struct InvariantCase {
    const char* name;
    levy::LevyModel model;
    double rho;
};

class PutInvariants : public ::testing::TestWithParam<InvariantCase> {};

TEST_P(PutInvariants, BoundsMonotonicityAndDominance) {
    const auto& c = GetParam();
    const Surface s = march(make_problem(market(c.rho), c.model, coarse(), {}));
    const SolverGrid& g = s.grid;
    const auto u = s.level(g.steps);
    const double eps = 1e-12 * 100.0;
    for (int i = g.interior_lo(); i <= g.interior_hi(); ++i) {
        const double v = u[g.index(i)];
        EXPECT_GE(v, std::max(100.0 - 100.0 * std::exp(g.x(i)), 0.0) - eps) << "i=" << i;
        EXPECT_LE(v, 100.0 + eps);
        if (i > g.interior_lo()) EXPECT_LE(v, u[g.index(i - 1)] + eps) << "i=" << i;
    }
    EXPECT_TRUE(s.diagnostics.all_dominant);
    EXPECT_GT(s.diagnostics.min_dominance, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Models, PutInvariants,
                         ::testing::Values(InvariantCase{"bs", levy::LevyModel::zero(), 0.0},
                                           InvariantCase{"fs", levy::LevyModel::zero(), 0.3},
                                           InvariantCase{"vg", kVG, 0.0}, InvariantCase{"vg_fs", kVG, 0.3},
                                           InvariantCase{"merton_fs", kMerton, 0.2}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Ordering, JumpsAndFeedbackRaiseThePrice) {
    const auto bs = march(make_problem(market(0.0), levy::LevyModel::zero(), coarse(), {}));
    const auto vg = march(make_problem(market(0.0), kVG, coarse(), {}));
    const auto fs1 = march(make_problem(market(0.1), kVG, coarse(), {}));
    const auto fs2 = march(make_problem(market(0.2), kVG, coarse(), {}));
    for (double x = -0.5; x <= 0.5; x += 0.05) {
        const double spot = 100.0 * std::exp(x);
        EXPECT_GE(price_at(vg, spot), price_at(bs, spot));
        EXPECT_GE(price_at(fs1, spot), price_at(vg, spot));
        EXPECT_LE(price_at(fs1, spot), price_at(fs2, spot) + 5e-3 * 100.0);
    }
}

TEST(ShiftedValues, InterpolationAndBoundary) {
    const auto g = make_grid(1.0, 0.1, 0.5, 10);
    std::vector<double> u(g.size());
    for (int i = g.first(); i <= g.last(); ++i) u[g.index(i)] = 2.0 * g.x(i);
    EXPECT_NEAR(shifted_value(u, g, 0, 0.05, 0.0, 100.0, 0.0, Payoff::put, ShiftRule::interpolate), 0.1, 1e-12);
    EXPECT_NEAR(shifted_value(u, g, 0, 0.05, 0.0, 100.0, 0.0, Payoff::put, ShiftRule::taylor), 0.1, 1e-12);
    // beyond the lattice the boundary function takes over
    EXPECT_DOUBLE_EQ(shifted_value(u, g, 0, -5.0, 0.0, 100.0, 0.0, Payoff::put, ShiftRule::interpolate),
                     payoff_h(-5.0, 100.0));
    EXPECT_NEAR(shifted_exp(0, 0.05, g, ShiftRule::interpolate), 0.5 * (1.0 + std::exp(0.1)), 1e-14);
    EXPECT_DOUBLE_EQ(shifted_exp(0, 9.0, g, ShiftRule::interpolate), std::exp(9.0));
}

TEST(IntegralTerms, ConstantFunctionGivesIntensity) {
    const auto g = make_grid(1.0, 0.01, 0.005, 400);
    std::vector<double> u(g.size(), 3.0);
    const auto q = levy::build_quadrature(kMerton, -1.0, 1.0, 0.01);
    std::vector<double> xi(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) xi[k] = q.node(k);
    const MarketParams m = market(0.0);
    const SchemeOptions s;
    EXPECT_NEAR(integral_term_finite(0, u, g, q, xi, 0.0, m, s), g.dt * 3.0 * levy::total_intensity(q), 1e-14);
    EXPECT_NEAR(integral_term_infinite(0, u, g, q, xi, 0.0, m, s), 0.0, 1e-15);
}

TEST(JumpRatios, NoFeedbackGivesPriceJumps) {
    const auto g = coarse();
    std::vector<double> u(g.size());
    for (int i = g.first(); i <= g.last(); ++i) u[g.index(i)] = payoff_h(g.x(i), 100.0);
    const auto lvl = strategy_update(u, g, 0.0, market(0.0));
    const auto q = levy::build_quadrature(kMerton, -1.0, 1.0, g.dx);
    std::vector<double> ratio(q.size());
    jump_ratios(0, lvl, g, q, 0.0, HMode::first_order, ratio);
    for (std::size_t k = 0; k < q.size(); ++k) EXPECT_DOUBLE_EQ(ratio[k], std::expm1(q.node(k)));
    double omega = 0.0;
    shifts_from_ratios(ratio, q, 1e-12, omega);
    for (std::size_t k = 0; k < q.size(); ++k) EXPECT_NEAR(ratio[k], q.node(k), 1e-14);
    EXPECT_NEAR(omega, 0.5 * (std::exp(-0.1 + 0.02) - 1.0), 5e-3);
}
