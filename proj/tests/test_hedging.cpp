#include "illiquid/error.hpp"
#include "illiquid/hedging.hpp"
#include "illiquid/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace illiquid;
using namespace illiquid::hedging;

namespace {

struct Fixture {
    Problem problem;
    Surface surface;
};

const Fixture& merton_fixture() {
    static const Fixture f = [] {
        MarketParams m;
        const Problem p =
            make_problem(m, levy::LevyModel::merton(0.5, -0.1, 0.2), make_grid(1.0, 0.02, 0.01, 200), SchemeOptions{});
        return Fixture{p, march(p)};
    }();
    return f;
}

const Fixture& diffusion_fixture() {
    static const Fixture f = [] {
        MarketParams m;
        const Problem p = make_problem(m, levy::LevyModel::zero(), make_grid(1.0, 0.02, 0.01, 200), SchemeOptions{});
        return Fixture{p, march(p)};
    }();
    return f;
}

}  // namespace

TEST(PriceCurve, ReproducesNodeValues) {
    const auto& f = merton_fixture();
    const PriceCurve v(f.surface);
    const auto u = f.surface.level(f.surface.grid.steps);
    const auto& g = f.surface.grid;
    for (int i = -150; i <= 150; i += 7) {
        const double spot = 100.0 * std::exp(g.x(i));
        EXPECT_NEAR(v.value(spot), u[static_cast<std::size_t>(g.index(i))], 1e-10) << "i=" << i;
    }
}

TEST(PriceCurve, DeltaIsTheDerivativeOfValue) {
    const PriceCurve v(merton_fixture().surface);
    for (double s : {70.0, 93.3, 100.0, 104.1, 130.0}) {
        const double h = 1e-5 * s;
        EXPECT_NEAR(v.delta(s), (v.value(s + h) - v.value(s - h)) / (2.0 * h), 1e-6) << "S=" << s;
    }
}

TEST(PriceCurve, FollowsTheBoundaryBeyondTheLattice) {
    const PriceCurve v(merton_fixture().surface);
    EXPECT_NEAR(v.value(1.0), 99.0, 1e-9);
    EXPECT_EQ(v.value(1e6), 0.0);
}

TEST(Hedging, DeltaStrategyRejectsNonpositiveSpot) {
    const PriceCurve v(merton_fixture().surface);
    EXPECT_THROW(delta_strategy(v, 0.0), Error);
    EXPECT_THROW(delta_strategy(v, -3.0), Error);
}

TEST(Hedging, WithoutJumpsEveryOptimalStrategyIsDelta) {
    const auto& f = diffusion_fixture();
    const PriceCurve v(f.surface);
    const auto& q = f.problem.quadrature;
    for (double s : {85.0, 100.0, 115.0}) {
        const double d = v.delta(s);
        EXPECT_NEAR(optimal_strategy_zeroth(s, v, 0.12, q), d, 1e-12);
        EXPECT_NEAR(optimal_strategy_first_order(s, v, 0.12, 0.2, q), d, 1e-12);
        EXPECT_NEAR(optimal_strategy_implicit(s, v, 0.12, 0.2, q).phi, d, 1e-9);
    }
}

TEST(Hedging, ZerothOrderStrategyMinimizesVarianceRate) {
    const auto& f = merton_fixture();
    const PriceCurve v(f.surface);
    const auto& q = f.problem.quadrature;
    for (double s : {80.0, 100.0, 120.0}) {
        const double best = optimal_strategy_zeroth(s, v, 0.12, q);
        const auto h = [s](double z) { return s * std::expm1(z); };
        const double at_best = variance_rate(s, best, v, 0.12, q, h).total();
        for (double eps : {-0.1, -0.01, 0.01, 0.1})
            EXPECT_GT(variance_rate(s, best + eps, v, 0.12, q, h).total(), at_best) << "S=" << s << " eps=" << eps;
    }
}

TEST(Hedging, VarianceRateOfDeltaWithoutJumpsIsZero) {
    const auto& f = diffusion_fixture();
    const PriceCurve v(f.surface);
    const auto r = variance_rate(100.0, v.delta(100.0), v, 0.12, f.problem.quadrature, [](double) { return 0.0; });
    EXPECT_EQ(r.diffusion, 0.0);
    EXPECT_EQ(r.jump, 0.0);
}

TEST(Hedging, StrategiesAgreeWithoutFeedback) {
    const auto& f = merton_fixture();
    const PriceCurve v(f.surface);
    const auto& q = f.problem.quadrature;
    const double s = 100.0;
    const double phi0 = optimal_strategy_zeroth(s, v, 0.12, q);
    EXPECT_DOUBLE_EQ(optimal_strategy_first_order(s, v, 0.12, 0.0, q), phi0);
    const auto st = optimal_strategy_implicit(s, v, 0.12, 0.0, q);
    EXPECT_NEAR(st.phi, phi0, 1e-10);
    EXPECT_DOUBLE_EQ(st.vol, 0.12);
}

TEST(Hedging, ImplicitStrategySatisfiesTheJumpEquation) {
    const auto& f = merton_fixture();
    const PriceCurve v(f.surface);
    const auto& q = f.problem.quadrature;
    const auto st = optimal_strategy_implicit(100.0, v, 0.12, 0.1, q);
    EXPECT_LE(st.residual, 1e-10);
    EXPECT_GT(st.vol, 0.0);
    ASSERT_EQ(st.h.size(), q.size());
    for (std::size_t k = 0; k < q.size(); ++k)
        if (q.weights[k] != 0.0) EXPECT_GT(100.0 + st.h[k], 0.0);
}

TEST(Hedging, ReportHasOneRowPerSpotAndMode) {
    const auto& f = merton_fixture();
    const PriceCurve v(f.surface);
    const std::vector<double> spots{90.0, 110.0};
    const std::vector<HedgeMode> modes{HedgeMode::delta, HedgeMode::optimal_implicit, HedgeMode::optimal_first_order};
    const auto rows = hedge_report(v, spots, modes, 0.12, 0.1, f.problem.quadrature);
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t n = 0; n < rows.size(); ++n) {
        EXPECT_EQ(rows[n].spot, spots[n / 3]);
        EXPECT_EQ(rows[n].mode, modes[n % 3]);
        EXPECT_GE(rows[n].rate.diffusion, 0.0);
        EXPECT_GE(rows[n].rate.jump, 0.0);
    }
    EXPECT_EQ(to_string(HedgeMode::optimal_first_order), "optimal_first_order");
}
