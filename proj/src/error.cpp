#include "illiquid/error.hpp"

namespace illiquid {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::singularity: return "singularity";
        case Errc::no_envelope: return "no_envelope";
        case Errc::activity_class: return "activity_class";
        case Errc::integrability: return "integrability";
        case Errc::contraction: return "contraction";
        case Errc::blow_up: return "blow_up";
        case Errc::domain: return "domain";
        case Errc::scheme_instability: return "scheme_instability";
        case Errc::out_of_band: return "out_of_band";
        case Errc::iteration: return "iteration";
        case Errc::no_solution: return "no_solution";
        case Errc::config: return "config";
    }
    return "unknown";
}

}  // namespace illiquid
