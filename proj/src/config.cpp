#include "illiquid/config.hpp"

#include "illiquid/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace illiquid {

using nlohmann::json;

namespace {

template <class E>
struct Names {
    E value;
    const char* name;
};

constexpr Names<Activity> kActivity[] = {
    {Activity::automatic, "automatic"}, {Activity::finite, "finite"}, {Activity::infinite, "infinite"}};
constexpr Names<HMode> kHMode[] = {{HMode::first_order, "first_order"}, {HMode::fixed_point, "fixed_point"}};
constexpr Names<ShiftRule> kShift[] = {{ShiftRule::interpolate, "interpolate"}, {ShiftRule::taylor, "taylor"}};
constexpr Names<Convection> kConvection[] = {{Convection::central, "central"}, {Convection::upwind, "upwind"}};
constexpr Names<Payoff> kPayoff[] = {{Payoff::put, "put"}, {Payoff::call, "call"}};
constexpr Names<hedging::HedgeMode> kHedge[] = {{hedging::HedgeMode::delta, "delta"},
                                                {hedging::HedgeMode::optimal_implicit, "optimal_implicit"},
                                                {hedging::HedgeMode::optimal_first_order, "optimal_first_order"}};
constexpr Names<OutputFormat> kFormat[] = {{OutputFormat::csv, "csv"}, {OutputFormat::json, "json"}};

template <class E, std::size_t N>
const char* name_of(const Names<E> (&table)[N], E v) {
    for (const auto& e : table)
        if (e.value == v) return e.name;
    return "?";
}

template <class E, std::size_t N>
E value_of(const Names<E> (&table)[N], const std::string& s, const std::string& key) {
    for (const auto& e : table)
        if (s == e.name) return e.value;
    std::string allowed;
    for (const auto& e : table) allowed += std::string(allowed.empty() ? "" : ", ") + e.name;
    throw Error(Errc::config, key + ": unknown value '" + s + "' (expected one of " + allowed + ")");
}

json model_to_json(const levy::LevyModel& m) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, levy::ZeroJumps>) {
                return {{"type", "zero"}};
            } else if constexpr (std::is_same_v<T, levy::Merton>) {
                return {{"type", "merton"}, {"intensity", p.intensity}, {"mean", p.mean}, {"stdev", p.stdev}};
            } else if constexpr (std::is_same_v<T, levy::Kou>) {
                return {{"type", "kou"},
                        {"intensity", p.intensity},
                        {"p_up", p.p_up},
                        {"rate_up", p.rate_up},
                        {"rate_down", p.rate_down}};
            } else {
                return {{"type", "variance_gamma"}, {"theta", p.theta}, {"sigma", p.sigma}, {"kappa", p.kappa}};
            }
        },
        m.params());
}

// Collects errors instead of throwing on the first one.
class Reader {
public:
    std::vector<std::string> errors;

    template <class T>
    void get(const json& obj, const char* key, const std::string& path, T& out) {
        if (!obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            errors.push_back(path + "." + key + ": wrong type");
        }
    }

    void get(const json& obj, const char* key, const std::string& path, std::optional<double>& out) {
        if (!obj.contains(key)) return;
        if (obj.at(key).is_null()) {
            out.reset();
            return;
        }
        double v = 0.0;
        get(obj, key, path, v);
        out = v;
    }

    template <class E, std::size_t N>
    void get_enum(const json& obj, const char* key, const std::string& path, const Names<E> (&table)[N], E& out) {
        std::string s;
        if (!obj.contains(key)) return;
        get(obj, key, path, s);
        try {
            out = value_of(table, s, path + "." + key);
        } catch (const Error& e) {
            errors.emplace_back(e.what());
        }
    }

    // Rejects keys absent from `allowed`.
    void keys(const json& obj, const json& allowed, const std::string& path) {
        if (!obj.is_object()) {
            errors.push_back(path + ": expected an object");
            return;
        }
        for (const auto& [k, v] : obj.items())
            if (!allowed.contains(k)) errors.push_back(path + "." + k + ": unknown key");
    }
};

levy::LevyModel read_model(const json& j, Reader& rd) {
    std::string type;
    if (!j.is_object() || !j.contains("type")) {
        rd.errors.emplace_back("model.type: missing");
        return {};
    }
    rd.get(j, "type", "model", type);
    try {
        if (type == "zero") {
            rd.keys(j, json{{"type", 0}}, "model");
            return levy::LevyModel::zero();
        }
        if (type == "merton") {
            double lam = 0.0, m = 0.0, d = 0.0;
            rd.keys(j, json{{"type", 0}, {"intensity", 0}, {"mean", 0}, {"stdev", 0}}, "model");
            rd.get(j, "intensity", "model", lam);
            rd.get(j, "mean", "model", m);
            rd.get(j, "stdev", "model", d);
            return levy::LevyModel::merton(lam, m, d);
        }
        if (type == "kou") {
            double lam = 0.0, p = 0.0, up = 0.0, down = 0.0;
            rd.keys(j, json{{"type", 0}, {"intensity", 0}, {"p_up", 0}, {"rate_up", 0}, {"rate_down", 0}}, "model");
            rd.get(j, "intensity", "model", lam);
            rd.get(j, "p_up", "model", p);
            rd.get(j, "rate_up", "model", up);
            rd.get(j, "rate_down", "model", down);
            return levy::LevyModel::kou(lam, p, up, down);
        }
        if (type == "variance_gamma") {
            double theta = 0.0, sigma = 0.0, kappa = 0.0;
            rd.keys(j, json{{"type", 0}, {"theta", 0}, {"sigma", 0}, {"kappa", 0}}, "model");
            rd.get(j, "theta", "model", theta);
            rd.get(j, "sigma", "model", sigma);
            rd.get(j, "kappa", "model", kappa);
            return levy::LevyModel::variance_gamma(theta, sigma, kappa);
        }
        rd.errors.push_back("model.type: unknown value '" + type +
                            "' (expected one of zero, merton, kou, variance_gamma)");
    } catch (const Error& e) {
        rd.errors.push_back(std::string("model: ") + e.what());
    }
    return {};
}

bool increasing(const std::vector<double>& v) {
    for (std::size_t n = 1; n < v.size(); ++n)
        if (!(v[n] > v[n - 1])) return false;
    return true;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

SolverGrid RunConfig::solver_grid() const { return make_grid(market.maturity, grid.dx, grid.dt, grid.n_half); }

std::vector<double> table_spots() {
    std::vector<double> s;
    for (int n = -6; n <= 4; ++n) s.push_back(100.0 * std::exp(0.08 * n));
    return s;
}

RunConfig default_config() {
    RunConfig c;
    c.market.rho = 0.2;
    c.model = levy::LevyModel::variance_gamma(-0.33, 0.12, 0.16);
    c.spots = table_spots();
    for (double k = 80.0; k <= 120.0; k += 5.0) c.strikes.push_back(k);
    return c;
}

OutputFormat parse_format(const std::string& s) { return value_of(kFormat, s, "output.format"); }

json to_json(const RunConfig& c) {
    json hedge_modes = json::array();
    for (auto m : c.hedge.modes) hedge_modes.push_back(name_of(kHedge, m));
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {
        {"market",
         {{"sigma", c.market.sigma},
          {"r", c.market.r},
          {"rho", c.market.rho},
          {"strike", c.market.strike},
          {"maturity", c.market.maturity},
          {"strategy_bound", c.market.strategy_bound}}},
        {"model", model_to_json(c.model)},
        {"grid",
         {{"dx", c.grid.dx},
          {"dt", c.grid.dt},
          {"n_half", c.grid.n_half},
          {"b_left", opt(c.grid.b_left)},
          {"b_right", opt(c.grid.b_right)}}},
        {"scheme",
         {{"activity", name_of(kActivity, c.scheme.activity)},
          {"h_mode", name_of(kHMode, c.scheme.h_mode)},
          {"shift", name_of(kShift, c.scheme.shift)},
          {"convection", name_of(kConvection, c.scheme.convection)},
          {"payoff", name_of(kPayoff, c.scheme.payoff)},
          {"martingale_drift", c.scheme.martingale_drift},
          {"rho_dpsi_cap", c.scheme.rho_dpsi_cap},
          {"ratio_floor", c.scheme.ratio_floor}}},
        {"hedge", {{"modes", hedge_modes}, {"spots", c.hedge.spots}}},
        {"mc",
         {{"paths", c.mc.sim.paths},
          {"steps", c.mc.sim.steps},
          {"seed", c.mc.sim.seed},
          {"antithetic", c.mc.sim.antithetic},
          {"spot", c.mc.spot}}},
        {"output", {{"path", c.output.path}, {"format", name_of(kFormat, c.output.format)}}},
        {"spots", c.spots},
        {"strikes", c.strikes},
        {"rhos", c.rhos},
        {"smile_spot", c.smile_spot},
        {"threads", c.threads},
    };
}

RunConfig parse_config(const json& j) {
    RunConfig c = default_config();
    const json d = to_json(c);
    Reader rd;
    rd.keys(j, d, "config");
    if (!j.is_object()) throw Error(Errc::config, "config rejected: " + rd.errors.front());

    auto section = [&](const char* name) -> const json* {
        if (!j.contains(name)) return nullptr;
        rd.keys(j.at(name), d.at(name), name);
        return j.at(name).is_object() ? &j.at(name) : nullptr;
    };

    if (const json* m = section("market")) {
        rd.get(*m, "sigma", "market", c.market.sigma);
        rd.get(*m, "r", "market", c.market.r);
        rd.get(*m, "rho", "market", c.market.rho);
        rd.get(*m, "strike", "market", c.market.strike);
        rd.get(*m, "maturity", "market", c.market.maturity);
        rd.get(*m, "strategy_bound", "market", c.market.strategy_bound);
    }
    if (j.contains("model")) c.model = read_model(j.at("model"), rd);
    if (const json* g = section("grid")) {
        rd.get(*g, "dx", "grid", c.grid.dx);
        rd.get(*g, "dt", "grid", c.grid.dt);
        rd.get(*g, "n_half", "grid", c.grid.n_half);
        rd.get(*g, "b_left", "grid", c.grid.b_left);
        rd.get(*g, "b_right", "grid", c.grid.b_right);
    }
    if (const json* s = section("scheme")) {
        rd.get_enum(*s, "activity", "scheme", kActivity, c.scheme.activity);
        rd.get_enum(*s, "h_mode", "scheme", kHMode, c.scheme.h_mode);
        rd.get_enum(*s, "shift", "scheme", kShift, c.scheme.shift);
        rd.get_enum(*s, "convection", "scheme", kConvection, c.scheme.convection);
        rd.get_enum(*s, "payoff", "scheme", kPayoff, c.scheme.payoff);
        rd.get(*s, "martingale_drift", "scheme", c.scheme.martingale_drift);
        rd.get(*s, "rho_dpsi_cap", "scheme", c.scheme.rho_dpsi_cap);
        rd.get(*s, "ratio_floor", "scheme", c.scheme.ratio_floor);
    }
    if (const json* h = section("hedge")) {
        if (h->contains("modes")) {
            std::vector<std::string> names;
            rd.get(*h, "modes", "hedge", names);
            c.hedge.modes.clear();
            for (const auto& n : names) {
                try {
                    c.hedge.modes.push_back(value_of(kHedge, n, "hedge.modes"));
                } catch (const Error& e) {
                    rd.errors.emplace_back(e.what());
                }
            }
        }
        rd.get(*h, "spots", "hedge", c.hedge.spots);
    }
    if (const json* m = section("mc")) {
        rd.get(*m, "paths", "mc", c.mc.sim.paths);
        rd.get(*m, "steps", "mc", c.mc.sim.steps);
        rd.get(*m, "seed", "mc", c.mc.sim.seed);
        rd.get(*m, "antithetic", "mc", c.mc.sim.antithetic);
        rd.get(*m, "spot", "mc", c.mc.spot);
    }
    if (const json* o = section("output")) {
        rd.get(*o, "path", "output", c.output.path);
        rd.get_enum(*o, "format", "output", kFormat, c.output.format);
    }
    rd.get(j, "spots", "config", c.spots);
    rd.get(j, "strikes", "config", c.strikes);
    rd.get(j, "rhos", "config", c.rhos);
    rd.get(j, "smile_spot", "config", c.smile_spot);
    rd.get(j, "threads", "config", c.threads);

    if (!rd.errors.empty()) {
        // report the constraint violations of what could be read alongside the parse errors
        auto all = rd.errors;
        for (auto& v : violations(c)) all.push_back(std::move(v));
        std::string msg = "config rejected: ";
        for (std::size_t n = 0; n < all.size(); ++n) msg += (n ? "; " : "") + all[n];
        throw Error(Errc::config, msg);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config, "cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error(Errc::config, "config file '" + path + "': " + e.what());
    }
    return parse_config(j);
}

std::vector<std::string> violations(const RunConfig& c) {
    std::vector<std::string> bad;
    try {
        c.market.validate();
    } catch (const Error& e) {
        std::istringstream parts(e.what());
        for (std::string s; std::getline(parts, s, ';');) bad.push_back(s.substr(s.find_first_not_of(' ')));
    }
    const double L = c.market.strategy_bound;
    for (double rho : c.rhos) {
        if (!(rho >= 0.0)) bad.push_back("rhos: " + fmt(rho) + " must be >= 0");
        else if (!(rho * L < 1.0)) bad.push_back("rhos: rho * strategy_bound must be < 1 (rho = " + fmt(rho) + ")");
    }

    std::optional<SolverGrid> grid;
    try {
        grid = c.solver_grid();
    } catch (const Error& e) {
        bad.emplace_back(e.what());
    }
    if (c.grid.b_left && !(*c.grid.b_left < 0.0)) bad.emplace_back("grid.b_left must be < 0");
    if (c.grid.b_right && !(*c.grid.b_right > 0.0)) bad.emplace_back("grid.b_right must be > 0");

    if (c.scheme.activity == Activity::finite && !c.model.finite_activity())
        bad.push_back("activity-class mismatch: scheme.activity = finite but model " + c.model.name() +
                      " has infinite activity");
    if (c.scheme.activity == Activity::infinite && c.model.finite_activity() && !c.model.is_zero())
        bad.push_back("activity-class mismatch: scheme.activity = infinite but model " + c.model.name() +
                      " has finite activity");
    if (!(c.scheme.rho_dpsi_cap > 0.0 && c.scheme.rho_dpsi_cap < 1.0))
        bad.emplace_back("scheme.rho_dpsi_cap must lie in (0, 1)");
    if (!(c.scheme.ratio_floor > 0.0 && c.scheme.ratio_floor < 1.0))
        bad.emplace_back("scheme.ratio_floor must lie in (0, 1)");
    if (c.scheme.payoff != Payoff::put) bad.emplace_back("scheme.payoff: only put is supported by the drivers");

    for (auto m : c.hedge.modes)
        if (m == hedging::HedgeMode::optimal_first_order && !(c.market.rho * L <= 0.3))
            bad.emplace_back("hedge.modes: optimal_first_order needs rho * strategy_bound <= 0.3");

    if (grid && c.market.strike > 0.0) {
        const double band = grid->interior_hi() * grid->dx;
        auto in_band = [&](double s) { return s > 0.0 && std::abs(std::log(s / c.market.strike)) <= band; };
        for (double s : c.spots)
            if (!in_band(s)) bad.push_back("spots: " + fmt(s) + " lies outside the interior band");
        for (double s : c.hedge.spots)
            if (!in_band(s)) bad.push_back("hedge.spots: " + fmt(s) + " lies outside the interior band");
        if (!in_band(c.mc.spot)) bad.push_back("mc.spot: " + fmt(c.mc.spot) + " lies outside the interior band");
        if (!(c.smile_spot > 0.0)) bad.emplace_back("smile_spot must be > 0");
        for (double k : c.strikes) {
            if (!(k > 0.0)) bad.push_back("strikes: " + fmt(k) + " must be > 0");
            else if (c.smile_spot > 0.0 && !in_band(c.smile_spot * c.market.strike / k))
                bad.push_back("strikes: " + fmt(k) + " puts the smile spot outside the interior band");
        }
    }
    if (!increasing(c.strikes)) bad.emplace_back("strikes must be strictly increasing");

    try {
        c.mc.sim.validate();
    } catch (const Error& e) {
        bad.emplace_back(e.what());
    }
    if (c.threads < 0) bad.emplace_back("threads must be >= 0");
    return bad;
}

void validate(const RunConfig& c) {
    const auto bad = violations(c);
    if (bad.empty()) return;
    std::string msg = "config rejected: ";
    for (std::size_t n = 0; n < bad.size(); ++n) msg += (n ? "; " : "") + bad[n];
    throw Error(Errc::config, msg);
}

}  // namespace illiquid
