#include "illiquid/hedging.hpp"

#include "illiquid/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

namespace illiquid::hedging {

PriceCurve::PriceCurve(const Surface& s, int level) {
    const SolverGrid& g = s.grid;
    const int j = level < 0 ? g.steps : level;
    if (j > g.steps) throw Error(Errc::invalid_argument, "PriceCurve: level beyond the surface");
    const auto u = s.level(j);
    u_.assign(u.begin(), u.end());
    const int n = static_cast<int>(u_.size());
    slope_.resize(n);
    for (int k = 1; k < n - 1; ++k) slope_[k] = (u_[k + 1] - u_[k - 1]) / (2.0 * g.dx);
    slope_[0] = (u_[1] - u_[0]) / g.dx;
    slope_[n - 1] = (u_[n - 1] - u_[n - 2]) / g.dx;
    dx_ = g.dx;
    x0_ = g.x(g.first());
    strike_ = s.strike;
    rate_ = s.rate;
    tau_ = g.tau(j);
}

double PriceCurve::hermite(double x, double& slope) const {
    const double pos = (x - x0_) / dx_;
    const int last = static_cast<int>(u_.size()) - 1;
    if (pos < 0.0 || pos > last) {
        // put or call boundary; slope of the payoff in x
        const double y = x + rate_ * tau_;
        const double v = payoff_h(y, strike_, Payoff::put);
        const bool put_side = u_[0] > u_[last];
        const double value = put_side ? v : payoff_h(y, strike_, Payoff::call);
        const double s = strike_ * std::exp(y);
        slope = value > 0.0 ? (put_side ? -s : s) : 0.0;
        return value;
    }
    const int k = std::min(static_cast<int>(pos), last - 1);
    const double t = pos - k;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double p0 = u_[k];
    const double p1 = u_[k + 1];
    const double m0 = slope_[k] * dx_;
    const double m1 = slope_[k + 1] * dx_;
    slope = ((6.0 * t2 - 6.0 * t) * p0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * p1 +
             (3.0 * t2 - 2.0 * t) * m1) /
            dx_;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 +
           (t3 - t2) * m1;
}

double PriceCurve::value(double spot) const {
    double slope;
    return std::exp(-rate_ * tau_) * hermite(std::log(spot / strike_), slope);
}

double PriceCurve::delta(double spot) const {
    double slope;
    hermite(std::log(spot / strike_), slope);
    return std::exp(-rate_ * tau_) * slope / spot;
}

double delta_strategy(const PriceCurve& v, double spot) {
    if (!(spot > 0.0)) throw Error(Errc::invalid_argument, "delta_strategy: spot must be > 0");
    return v.delta(spot);
}

VarianceRate variance_rate(double spot, double alpha, const PriceCurve& v, double vol, const levy::JumpQuadrature& q,
                           const std::function<double(double z)>& h) {
    VarianceRate out;
    const double gap = v.delta(spot) - alpha;
    out.diffusion = vol * vol * spot * spot * gap * gap;
    const double v0 = v.value(spot);
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q.weights[k] == 0.0) continue;
        const double hk = h(q.node(k));
        const double e = v.value(spot + hk) - v0 - alpha * hk;
        out.jump += e * e * q.weights[k];
    }
    return out;
}

double optimal_strategy_zeroth(double spot, const PriceCurve& v, double sigma, const levy::JumpQuadrature& q) {
    const double s2 = spot * spot;
    const double v0 = v.value(spot);
    double num = sigma * sigma * s2 * v.delta(spot);
    double den = sigma * sigma * s2;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q.weights[k] == 0.0) continue;
        const double e = std::expm1(q.node(k));
        num += spot * e * (v.value(spot * (1.0 + e)) - v0) * q.weights[k];
        den += s2 * e * e * q.weights[k];
    }
    return num / den;
}

namespace {

// phi on the lattice x = ln(S/spot) = n dx for n = first..first + size - 1
struct Lattice {
    int first;
    double dx;
    std::vector<double> phi;

    double spot_at(double spot, int n) const { return spot * std::exp(n * dx); }
    double at(double pos) const {  // pos in units of dx, relative to n = 0
        const double p = pos - first;
        const int last = static_cast<int>(phi.size()) - 1;
        if (p <= 0.0) return phi[0];
        if (p >= last) return phi[last];
        const int k = std::min(static_cast<int>(p), last - 1);
        const double w = p - k;
        return (1.0 - w) * phi[k] + w * phi[k + 1];
    }
    double node(int n) const { return phi[static_cast<std::size_t>(n - first)]; }
    // S dphi/dS at node n
    double slope(int n) const {
        const int k = n - first;
        const int last = static_cast<int>(phi.size()) - 1;
        if (k == 0) return (phi[1] - phi[0]) / dx;
        if (k == last) return (phi[last] - phi[last - 1]) / dx;
        return (phi[k + 1] - phi[k - 1]) / (2.0 * dx);
    }
};

Lattice zeroth_lattice(double spot, const PriceCurve& v, double sigma, const levy::JumpQuadrature& q, int first,
                       int last) {
    Lattice lat{first, q.dx, std::vector<double>(static_cast<std::size_t>(last - first + 1))};
    for (int n = first; n <= last; ++n)
        lat.phi[static_cast<std::size_t>(n - first)] = optimal_strategy_zeroth(lat.spot_at(spot, n), v, sigma, q);
    return lat;
}

// H/S at lattice node n for jump z from the fixed point with phi interpolated on the lattice. Plain substitution
// first; when the map is nearly tangent it stalls, and the root it converges to is located by walking
// g(r) = r - T(r) from the last iterate until g changes sign, then bisecting.
double ratio_fixed_point(const Lattice& lat, int n, double z, double rho, double s_n) {
    const double base = std::expm1(z);
    const double anchor = lat.node(n);
    auto map = [&](double r) { return base + rho * (lat.at(n + std::log1p(r) / lat.dx) - anchor); };
    const double tol = 1e-12 / s_n;
    double r = base;
    for (int it = 0; it < 100; ++it) {
        if (!(1.0 + r > 0.0)) throw Error(Errc::domain, "optimal_strategy_implicit: jump takes S to <= 0");
        const double next = map(r);
        if (std::abs(next - r) <= tol) return next;
        r = next;
    }

    const double dir = map(r) > r ? 1.0 : -1.0;
    const double step = 1e-3;
    double a = r;
    double b = r;
    for (;;) {
        b = a + dir * step;
        if (!(1.0 + b > 0.0)) {
            b = -1.0 + 1e-15;
            if ((b - map(b)) * dir < 0.0) {
                std::ostringstream os;
                os << "optimal_strategy_implicit: no H with S + H > 0 (S=" << s_n << ", z=" << z << ")";
                throw Error(Errc::domain, os.str());
            }
            break;
        }
        if ((b - map(b)) * dir >= 0.0) break;
        a = b;
        if (std::abs(a - base) > 1e3) break;
    }
    if ((b - map(b)) * dir < 0.0) {
        std::ostringstream os;
        os << "optimal_strategy_implicit: H fixed point failed to converge (S=" << s_n << ", z=" << z << ")";
        throw Error(Errc::contraction, os.str());
    }
    // g(a) has sign -dir, g(b) has sign dir or zero
    for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
        const double m = 0.5 * (a + b);
        if ((m - map(m)) * dir >= 0.0)
            b = m;
        else
            a = m;
    }
    return 0.5 * (a + b);
}

}  // namespace

ImplicitStrategy optimal_strategy_implicit(double spot, const PriceCurve& v, double sigma, double rho,
                                           const levy::JumpQuadrature& q, double tol, int max_iter) {
    if (!(spot > 0.0)) throw Error(Errc::invalid_argument, "optimal_strategy_implicit: spot must be > 0");
    const int first = 2 * q.k_left - 2;
    const int last = 2 * q.k_right + 2;
    Lattice lat = zeroth_lattice(spot, v, sigma, q, first, last);
    const std::size_t size = lat.phi.size();

    std::vector<double> next(size);
    double damping = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    ImplicitStrategy out;
    for (int it = 1; it <= max_iter; ++it) {
        double residual = 0.0;
        for (int n = first; n <= last; ++n) {
            const double s_n = lat.spot_at(spot, n);
            const double denom = 1.0 - rho * lat.slope(n);
            if (!(denom > 0.0)) throw Error(Errc::blow_up, "optimal_strategy_implicit: 1 - rho S dphi/dS <= 0");
            const double vol = sigma / denom;
            const double v0 = v.value(s_n);
            double num = vol * vol * s_n * s_n * v.delta(s_n);
            double den = vol * vol * s_n * s_n;
            for (std::size_t k = 0; k < q.size(); ++k) {
                if (q.weights[k] == 0.0) continue;
                const double hk = s_n * ratio_fixed_point(lat, n, q.node(k), rho, s_n);
                num += (v.value(s_n + hk) - v0) * hk * q.weights[k];
                den += hk * hk * q.weights[k];
            }
            const std::size_t idx = static_cast<std::size_t>(n - first);
            next[idx] = num / den;
            residual = std::max(residual, std::abs(next[idx] - lat.phi[idx]));
        }
        if (residual > prev) damping = std::max(damping * 0.5, 1.0 / 64.0);
        prev = residual;
        for (std::size_t idx = 0; idx < size; ++idx) lat.phi[idx] += damping * (next[idx] - lat.phi[idx]);
        out.iterations = it;
        out.residual = residual;
        if (residual <= tol) break;
        if (it == max_iter) {
            std::ostringstream os;
            os << "optimal_strategy_implicit: no convergence in " << max_iter << " iterations (residual " << residual
               << ")";
            throw Error(Errc::iteration, os.str());
        }
    }

    out.phi = lat.node(0);
    out.vol = sigma / (1.0 - rho * lat.slope(0));
    out.h.assign(q.size(), 0.0);
    for (std::size_t k = 0; k < q.size(); ++k)
        if (q.weights[k] != 0.0) out.h[k] = spot * ratio_fixed_point(lat, 0, q.node(k), rho, spot);
    return out;
}

double optimal_strategy_first_order(double spot, const PriceCurve& v, double sigma, double rho,
                                    const levy::JumpQuadrature& q) {
    const Lattice lat = zeroth_lattice(spot, v, sigma, q, q.k_left - 1, q.k_right + 1);
    const double s2 = spot * spot;
    const double sig2 = sigma * sigma;
    const double phi0 = lat.node(0);
    const double dphi0 = lat.slope(0);  // S dphi0/dS
    const double v0 = v.value(spot);
    const double vs = v.delta(spot);

    double den = sig2 * s2;
    double beta1_sum = 0.0;
    double jump1 = 0.0;
    double jump0 = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double w = q.weights[k];
        if (w == 0.0) continue;
        const int n = q.k_left + static_cast<int>(k);
        const double e = std::expm1(q.node(k));
        const double s_jump = spot * (1.0 + e);
        const double h0 = spot * e;
        const double h1 = spot * (lat.node(n) - phi0);
        const double dv = v.value(s_jump) - v0;
        den += s2 * e * e * w;
        beta1_sum += e * (lat.node(n) - phi0) * w;
        jump1 += (dv + v.delta(s_jump) * h0) * h1 * w;
        jump0 += dv * h0 * w;
    }
    const double beta0 = 1.0 / den;
    const double beta1 = -beta0 * beta0 * (2.0 * sig2 * s2 * dphi0 + 2.0 * s2 * beta1_sum);
    const double phi1 = beta0 * (2.0 * sig2 * s2 * vs * dphi0 + jump1) + beta1 * (sig2 * s2 * vs + jump0);
    return phi0 + rho * phi1;
}

std::string to_string(HedgeMode mode) {
    switch (mode) {
        case HedgeMode::delta: return "delta";
        case HedgeMode::optimal_implicit: return "optimal_implicit";
        case HedgeMode::optimal_first_order: return "optimal_first_order";
    }
    return "unknown";
}

std::vector<HedgeRow> hedge_report(const PriceCurve& v, const std::vector<double>& spots,
                                   const std::vector<HedgeMode>& modes, double sigma, double rho,
                                   const levy::JumpQuadrature& q) {
    std::vector<HedgeRow> rows(spots.size() * modes.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t n = 0; n < rows.size(); ++n) {
        try {
            const double s = spots[n / modes.size()];
            const HedgeMode mode = modes[n % modes.size()];
            HedgeRow& row = rows[n];
            row.spot = s;
            row.mode = mode;
            switch (mode) {
                case HedgeMode::delta: {
                    row.phi = delta_strategy(v, s);
                    const double ds = s * 1e-4;
                    const double gamma = (v.delta(s + ds) - v.delta(s - ds)) / (2.0 * ds);
                    const double vol = feedback::effective_vol(sigma, rho, s * gamma);
                    const feedback::Strategy phi = [&v](double, double x) { return v.delta(x); };
                    row.rate = variance_rate(s, row.phi, v, vol, q, [&](double z) {
                        return feedback::solve_H_fixed_point(phi, 0.0, z, s, rho).h;
                    });
                    break;
                }
                case HedgeMode::optimal_implicit: {
                    const ImplicitStrategy st = optimal_strategy_implicit(s, v, sigma, rho, q);
                    row.phi = st.phi;
                    row.rate = variance_rate(s, st.phi, v, st.vol, q, [&](double z) {
                        const long k = std::lround(z / q.dx) - q.k_left;
                        return st.h[static_cast<std::size_t>(k)];
                    });
                    break;
                }
                case HedgeMode::optimal_first_order: {
                    row.phi = optimal_strategy_first_order(s, v, sigma, rho, q);
                    const Lattice lat = zeroth_lattice(s, v, sigma, q, q.k_left - 1, q.k_right + 1);
                    const double vol = feedback::effective_vol(sigma, rho, lat.slope(0));
                    row.rate = variance_rate(s, row.phi, v, vol, q, [&](double z) {
                        const int k = static_cast<int>(std::lround(z / q.dx));
                        return s * (std::expm1(z) + rho * (lat.node(k) - lat.node(0)));
                    });
                    break;
                }
            }
        } catch (...) {
#pragma omp critical(hedge_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

}  // namespace illiquid::hedging
