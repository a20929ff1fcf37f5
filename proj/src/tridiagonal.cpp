#include "illiquid/tridiagonal.hpp"

#include "illiquid/error.hpp"

#include <cmath>

namespace illiquid {

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs, std::span<double> scratch) {
    const std::size_t n = rhs.size();
    if (lower.size() != n || diag.size() != n || upper.size() != n || scratch.size() < n)
        throw Error(Errc::invalid_argument, "solve_tridiagonal: size mismatch");
    if (n == 0) return;

    double pivot = diag[0];
    if (!(std::abs(pivot) > 0.0) || !std::isfinite(pivot))
        throw Error(Errc::scheme_instability, "solve_tridiagonal: zero pivot in row 0");
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for (std::size_t k = 1; k < n; ++k) {
        pivot = diag[k] - lower[k] * scratch[k - 1];
        if (!(std::abs(pivot) > 0.0) || !std::isfinite(pivot))
            throw Error(Errc::scheme_instability, "solve_tridiagonal: zero pivot");
        scratch[k] = upper[k] / pivot;
        rhs[k] = (rhs[k] - lower[k] * rhs[k - 1]) / pivot;
    }
    for (std::size_t k = n - 1; k-- > 0;) rhs[k] -= scratch[k] * rhs[k + 1];
}

}  // namespace illiquid
