#pragma once

#include <span>

namespace illiquid {

/// Thomas algorithm for lower[n] x[n-1] + diag[n] x[n] + upper[n] x[n+1] = rhs[n].
/// lower[0] and upper[last] are ignored. The solution overwrites rhs; scratch needs rhs.size() entries.
/// Throws Error{scheme_instability} on a vanishing or non-finite pivot.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs, std::span<double> scratch);

}  // namespace illiquid
