#include "illiquid/levy.hpp"

#include "illiquid/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace illiquid::levy {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
    if (!ok) throw Error(Errc::invalid_argument, what);
}

// log of the density; -inf where the density vanishes
double log_density(const LevyModel& model, double z) {
    return std::visit(
        overloaded{
            [](const ZeroJumps&) { return kNegInf; },
            [z](const Merton& m) {
                const double u = (z - m.mean) / m.stdev;
                return std::log(m.intensity / (m.stdev * std::sqrt(2.0 * std::numbers::pi))) - 0.5 * u * u;
            },
            [z](const Kou& k) {
                if (z > 0.0) {
                    if (k.p_up == 0.0) return kNegInf;
                    return std::log(k.intensity * k.p_up * k.rate_up) - k.rate_up * z;
                }
                if (z < 0.0) {
                    if (k.p_up == 1.0) return kNegInf;
                    return std::log(k.intensity * (1.0 - k.p_up) * k.rate_down) + k.rate_down * z;
                }
                return kNegInf;
            },
            [z](const VarianceGamma& vg) {
                if (z == 0.0) throw Error(Errc::singularity, "Variance Gamma density is singular at z = 0");
                return vg.a() * z - vg.b() * std::abs(z) - std::log(vg.kappa * std::abs(z));
            },
        },
        model.params());
}

// Midpoint rule on [lo, hi] with cells of width h aligned to multiples of h.
template <class F>
double midpoint(F&& f, double lo, double hi, double h) {
    const long n0 = std::lround(lo / h);
    const long n1 = std::lround(hi / h);
    double sum = 0.0;
    for (long n = n0; n < n1; ++n) sum += f((n + 0.5) * h);
    return sum * h;
}

constexpr double kFineStep = 2.5e-4;

// Half-width of the fine integration domain: at least 10, widened until the
// exponentially weighted tail is negligible.
double fine_domain(const LevyModel& model) {
    double half = 10.0;
    while (half < 200.0) {
        const double tail = std::max(std::exp(half) * density(model, half), density(model, -half));
        if (!(tail > 1e-16)) break;
        half *= 2.0;
    }
    return half;
}

void require_exponential_moment(const LevyModel& model) {
    if (model.is_zero()) return;
    if (!envelope_params(model).exponential_moment_finite()) {
        std::ostringstream os;
        os << model.name() << ": int_{|y|>=1} e^y nu(dy) diverges";
        throw Error(Errc::integrability, os.str());
    }
}

}  // namespace

double VarianceGamma::a() const { return theta / (sigma * sigma); }

double VarianceGamma::b() const { return std::sqrt(theta * theta + 2.0 * sigma * sigma / kappa) / (sigma * sigma); }

LevyModel::LevyModel(Variant v) : v_(std::move(v)) {
    std::visit(overloaded{
                   [](const ZeroJumps&) {},
                   [](const Merton& m) {
                       require(m.intensity > 0.0, "Merton: intensity must be > 0");
                       require(m.stdev > 0.0, "Merton: jump stdev must be > 0");
                       require(std::isfinite(m.mean), "Merton: jump mean must be finite");
                   },
                   [](const Kou& k) {
                       require(k.intensity > 0.0, "Kou: intensity must be > 0");
                       require(k.p_up >= 0.0 && k.p_up <= 1.0, "Kou: p_up must lie in [0, 1]");
                       require(k.rate_up > 0.0 && k.rate_down > 0.0, "Kou: decay rates must be > 0");
                   },
                   [](const VarianceGamma& vg) {
                       require(vg.sigma > 0.0, "VarianceGamma: sigma must be > 0");
                       require(vg.kappa > 0.0, "VarianceGamma: kappa must be > 0");
                       require(std::isfinite(vg.theta), "VarianceGamma: theta must be finite");
                       require(vg.b() > std::abs(vg.a()), "VarianceGamma: requires B > |A|");
                   },
               },
               v_);
}

LevyModel LevyModel::merton(double intensity, double mean, double stdev) {
    return LevyModel{Merton{intensity, mean, stdev}};
}

LevyModel LevyModel::kou(double intensity, double p_up, double rate_up, double rate_down) {
    return LevyModel{Kou{intensity, p_up, rate_up, rate_down}};
}

LevyModel LevyModel::variance_gamma(double theta, double sigma, double kappa) {
    return LevyModel{VarianceGamma{theta, sigma, kappa}};
}

std::string LevyModel::name() const {
    return std::visit(overloaded{
                          [](const ZeroJumps&) { return std::string("zero"); },
                          [](const Merton&) { return std::string("merton"); },
                          [](const Kou&) { return std::string("kou"); },
                          [](const VarianceGamma&) { return std::string("variance_gamma"); },
                      },
                      v_);
}

double AdmissibleEnvelope::shape(double z) const {
    const double tilt = z >= 0.0 ? std::exp(d_minus * z) : std::exp(d_plus * z);
    const double power = alpha == 0.0 ? 1.0 : std::pow(std::abs(z), -alpha);
    return power * tilt * std::exp(-mu * z * z);
}

bool AdmissibleEnvelope::exponential_moment_finite() const {
    if (mu > 0.0) return true;
    return d_minus + 1.0 < 0.0;
}

std::vector<double> JumpQuadrature::nodes() const {
    std::vector<double> z(size());
    for (std::size_t n = 0; n < z.size(); ++n) z[n] = node(n);
    return z;
}

double density(const LevyModel& model, double z) {
    const double ld = log_density(model, z);
    return ld == kNegInf ? 0.0 : std::exp(ld);
}

AdmissibleEnvelope envelope_params(const LevyModel& model) {
    AdmissibleEnvelope env = std::visit(
        overloaded{
            [](const ZeroJumps&) -> AdmissibleEnvelope {
                throw Error(Errc::no_envelope, "the zero measure has no admissible envelope");
            },
            [](const Merton& m) {
                return AdmissibleEnvelope{1.0, 0.0, 0.0, 0.0, 1.0 / (2.0 * m.stdev * m.stdev)};
            },
            [](const Kou& k) { return AdmissibleEnvelope{1.0, 0.0, -k.rate_up, k.rate_down, 0.0}; },
            [](const VarianceGamma& vg) {
                return AdmissibleEnvelope{1.0, 1.0, vg.a() - vg.b(), vg.a() + vg.b(), 0.0};
            },
        },
        model.params());

    // C = sup density / shape over the scan window [-10, 10]. For Merton with a
    // nonzero jump mean the ratio is unbounded on R, so C is only valid on the window.
    double log_c = kNegInf;
    constexpr int kScan = 10000;
    for (int n = -kScan; n <= kScan; ++n) {
        if (n == 0) continue;
        const double z = n * 1e-3;
        const double ld = log_density(model, z);
        if (ld == kNegInf) continue;
        const double tilt = z >= 0.0 ? env.d_minus * z : env.d_plus * z;
        const double log_shape = -env.alpha * std::log(std::abs(z)) + tilt - env.mu * z * z;
        log_c = std::max(log_c, ld - log_shape);
    }
    env.c = std::exp(log_c);
    return env;
}

bool check_admissible(const LevyModel& model, const AdmissibleEnvelope& env, std::span<const double> samples) {
    require(!samples.empty(), "check_admissible: samples must be nonempty");
    if (model.is_zero()) return true;
    for (double z : samples) {
        if (z == 0.0 && env.alpha > 0.0) throw Error(Errc::invalid_argument, "check_admissible: z = 0 with alpha > 0");
        if (z == 0.0 && !model.finite_activity()) continue;
        const double bound = env(z);
        if (density(model, z) > bound * (1.0 + 1e-12)) return false;
    }
    return true;
}

JumpQuadrature build_quadrature(const LevyModel& model, double b_left, double b_right, double dx) {
    if (!(dx > 0.0)) throw Error(Errc::invalid_argument, "build_quadrature: dx must be > 0");
    if (!(b_left < 0.0) || !(b_right > 0.0))
        throw Error(Errc::invalid_argument, "build_quadrature: requires b_left < 0 < b_right");

    constexpr double eps = 1e-9;
    JumpQuadrature q;
    q.dx = dx;
    q.k_left = static_cast<int>(std::floor(b_left / dx + 0.5 + eps));
    q.k_right = static_cast<int>(std::ceil(b_right / dx - 0.5 - eps));
    q.finite_activity = model.finite_activity();
    q.weights.assign(static_cast<std::size_t>(q.k_right - q.k_left + 1), 0.0);
    if (model.is_zero()) return q;

    for (int k = q.k_left; k <= q.k_right; ++k) {
        if (k == 0 && !q.finite_activity) continue;  // excluded singular cell
        const double lo = (k - 0.5) * dx;
        const double hi = (k + 0.5) * dx;
        q.weights[static_cast<std::size_t>(k - q.k_left)] = 0.5 * (density(model, lo) + density(model, hi)) * dx;
    }
    return q;
}

double default_truncation(const LevyModel& model, double dx, double rel_tol, double b_max) {
    if (model.is_zero()) return dx;
    const int n_max = static_cast<int>(std::ceil(b_max / dx));
    double peak = 0.0;
    for (int n = 0; n < n_max; ++n) {
        const double z = (n + 0.5) * dx;
        peak = std::max({peak, density(model, z), density(model, -z)});
    }
    double reach = dx;
    for (int n = 0; n < n_max; ++n) {
        const double z = (n + 0.5) * dx;
        if (std::max(density(model, z), density(model, -z)) > rel_tol * peak) reach = z + dx;
    }
    return std::min(std::ceil(reach / dx) * dx, b_max);
}

JumpQuadrature build_default_quadrature(const LevyModel& model, double dx) {
    const double b = default_truncation(model, dx);
    return build_quadrature(model, -b, b, dx);
}

double total_intensity(const JumpQuadrature& q) {
    if (!q.finite_activity)
        throw Error(Errc::activity_class, "total_intensity: measure has infinite activity");
    double sum = 0.0;
    for (double w : q.weights) sum += w;
    return sum;
}

double exponential_compensator(const LevyModel& model) {
    if (model.is_zero()) return 0.0;
    require_exponential_moment(model);
    const double half = fine_domain(model);
    return midpoint([&](double y) { return std::expm1(y) * density(model, y); }, -half, half, kFineStep);
}

double small_jump_mean(const LevyModel& model) {
    if (model.is_zero()) return 0.0;
    return midpoint([&](double y) { return y * density(model, y); }, -1.0, 1.0, kFineStep);
}

double martingale_drift(const LevyModel& model, double sigma) {
    const double diffusion = -0.5 * sigma * sigma;
    if (model.is_zero()) return diffusion;
    require_exponential_moment(model);
    const double half = fine_domain(model);
    const double integral = midpoint(
        [&](double y) {
            const double compensator = std::abs(y) <= 1.0 ? y : 0.0;
            return (std::expm1(y) - compensator) * density(model, y);
        },
        -half, half, kFineStep);
    return diffusion - integral;
}

}  // namespace illiquid::levy
