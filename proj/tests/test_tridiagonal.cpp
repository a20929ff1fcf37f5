#include "illiquid/error.hpp"
#include "illiquid/tridiagonal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace illiquid;

namespace {

// Dense Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

}  // namespace

TEST(Tridiagonal, MatchesDenseSolveOnDominantSystems) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> off(-1.0, 0.0);
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    for (std::size_t n : {1u, 2u, 3u, 10u, 57u}) {
        std::vector<double> lower(n), diag(n), upper(n), rhs(n), scratch(n);
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            lower[i] = i > 0 ? off(rng) : 0.0;
            upper[i] = i + 1 < n ? off(rng) : 0.0;
            diag[i] = 1.0 + std::abs(lower[i]) + std::abs(upper[i]) + 0.1;
            rhs[i] = val(rng);
            dense[i][i] = diag[i];
            if (i > 0) dense[i][i - 1] = lower[i];
            if (i + 1 < n) dense[i][i + 1] = upper[i];
        }
        const auto expected = dense_solve(dense, rhs);
        solve_tridiagonal(lower, diag, upper, rhs, scratch);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(rhs[i], expected[i], 1e-12) << "n=" << n << " i=" << i;
    }
}

TEST(Tridiagonal, IdentityLeavesRightHandSide) {
    std::vector<double> lower(4, 0.0), diag(4, 1.0), upper(4, 0.0), rhs{1.0, -2.0, 3.0, 4.5}, scratch(4);
    const auto copy = rhs;
    solve_tridiagonal(lower, diag, upper, rhs, scratch);
    EXPECT_EQ(rhs, copy);
}

TEST(Tridiagonal, ZeroPivotIsReported) {
    std::vector<double> lower{0.0, 1.0}, diag{1.0, 1.0}, upper{1.0, 0.0}, rhs{1.0, 1.0}, scratch(2);
    try {
        solve_tridiagonal(lower, diag, upper, rhs, scratch);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::scheme_instability);
    }
}
