#include "illiquid/feedback.hpp"

#include "illiquid/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace illiquid {

void MarketParams::validate() const {
    std::vector<std::string> bad;
    if (!(sigma > 0.0)) bad.emplace_back("market.sigma must be > 0");
    if (!std::isfinite(r)) bad.emplace_back("market.r must be finite");
    if (!(rho >= 0.0)) bad.emplace_back("market.rho must be >= 0");
    if (!(strike > 0.0)) bad.emplace_back("market.strike must be > 0");
    if (!(maturity > 0.0)) bad.emplace_back("market.maturity must be > 0");
    if (!(strategy_bound > 0.0)) bad.emplace_back("market.strategy_bound must be > 0");
    if (!(rho * strategy_bound < 1.0)) bad.emplace_back("market: rho * strategy_bound must be < 1");
    if (bad.empty()) return;
    std::ostringstream os;
    for (std::size_t n = 0; n < bad.size(); ++n) os << (n ? "; " : "") << bad[n];
    throw Error(Errc::invalid_argument, os.str());
}

namespace feedback {

FixedPointResult solve_H_fixed_point(const Strategy& phi, double t, double z, double s, double rho,
                                     const FixedPointOptions& opts) {
    if (!(s > 0.0)) throw Error(Errc::invalid_argument, "solve_H_fixed_point: S must be > 0");
    const double h0 = s * std::expm1(z);
    if (rho == 0.0) return {h0, 1, 0.0};

    const double phi_s = phi(t, s);
    auto map = [&](double h) {
        if (!(s + h > 0.0)) throw Error(Errc::domain, "solve_H_fixed_point: S + H <= 0");
        return h0 + rho * s * (phi(t, s + h) - phi_s);
    };

    double damping = opts.damping;
    double h = h0;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double next = map(h);
        const double residual = std::abs(next - h);
        if (residual > prev) damping *= 0.5;
        prev = residual;
        h += damping * (next - h);
        if (residual <= opts.tol) return {h, it, std::abs(map(h) - h)};
    }
    std::ostringstream os;
    os << "solve_H_fixed_point: no convergence in " << opts.max_iter << " iterations (z=" << z << ", S=" << s
       << ", rho=" << rho << ")";
    throw Error(Errc::contraction, os.str());
}

double approx_H_first_order(const Strategy& phi, double t, double z, double s, double rho) {
    const double h0 = s * std::expm1(z);
    if (rho == 0.0) return h0;
    return h0 + rho * s * (phi(t, s * std::exp(z)) - phi(t, s));
}

double effective_vol(double sigma, double rho, double dpsi) {
    const double denom = 1.0 - rho * dpsi;
    if (!(denom > 0.0)) {
        std::ostringstream os;
        os << "effective_vol: 1 - rho*dpsi = " << denom << " <= 0";
        throw Error(Errc::blow_up, os.str());
    }
    return sigma / denom;
}

double xi_from_ratio(double h_over_s) {
    if (!(1.0 + h_over_s > 0.0)) throw Error(Errc::domain, "xi: jump takes the price to <= 0");
    return std::log1p(h_over_s);
}

double xi(double tau, double z, double x, const HProvider& h, const MarketParams& m) {
    const double s = m.strike * std::exp(x);
    return xi_from_ratio(h(m.maturity - tau, z, s) / s);
}

double omega(double tau, double x, const levy::JumpQuadrature& q, const HProvider& h, const MarketParams& m) {
    const double s = m.strike * std::exp(x);
    const double t = m.maturity - tau;
    double sum = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) {
        if (q.weights[n] == 0.0) continue;
        sum += h(t, q.node(n), s) / s * q.weights[n];
    }
    return sum;
}

double drift_b(double s, double phi_t, double phi_s, double phi_ss, double v, double mu, double rho) {
    const double denom = 1.0 - rho * s * phi_s;
    if (!(denom > 0.0)) throw Error(Errc::blow_up, "drift_b: 1 - rho*S*phi_S <= 0");
    return (mu + rho * (phi_t + 0.5 * v * v * s * s * phi_ss)) / denom;
}

HProvider first_order_provider(Strategy phi, double rho) {
    return [phi = std::move(phi), rho](double t, double z, double s) { return approx_H_first_order(phi, t, z, s, rho); };
}

HProvider fixed_point_provider(Strategy phi, double rho, FixedPointOptions opts) {
    return [phi = std::move(phi), rho, opts](double t, double z, double s) {
        return solve_H_fixed_point(phi, t, z, s, rho, opts).h;
    };
}

}  // namespace feedback
}  // namespace illiquid
