#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace illiquid {

enum class Errc {
    invalid_argument,   // precondition on an input value
    singularity,        // density evaluated at its pole
    no_envelope,        // envelope requested for the zero measure
    activity_class,     // finite-activity operation on an infinite-activity measure (or vice versa)
    integrability,      // exponential moment diverges
    contraction,        // fixed-point iteration did not converge
    blow_up,            // 1 - rho * S dphi/dS <= 0
    domain,             // jump would send the price to <= 0
    scheme_instability, // assembled row is not diagonally dominant
    out_of_band,        // spot outside the interior band of the grid
    iteration,          // outer strategy iteration did not converge
    no_solution,        // implied volatility: price outside the arbitrage band
    config,             // configuration rejected
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace illiquid
