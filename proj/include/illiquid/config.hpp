#pragma once

#include "illiquid/feedback.hpp"
#include "illiquid/hedging.hpp"
#include "illiquid/levy.hpp"
#include "illiquid/montecarlo.hpp"
#include "illiquid/solver.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace illiquid {

enum class OutputFormat { csv, json };

struct GridConfig {
    double dx = 0.01;
    double dt = 0.005;
    int n_half = 800;
    std::optional<double> b_left;   // jump truncation, default from the density decay
    std::optional<double> b_right;
};

struct HedgeConfig {
    std::vector<hedging::HedgeMode> modes{hedging::HedgeMode::delta, hedging::HedgeMode::optimal_implicit,
                                          hedging::HedgeMode::optimal_first_order};
    std::vector<double> spots{80.0, 90.0, 100.0, 110.0, 120.0};
};

struct McRunConfig {
    mc::McConfig sim{1000000, 1, 42, true};
    double spot = 100.0;
};

struct OutputConfig {
    std::string path;  // empty: stdout
    OutputFormat format = OutputFormat::csv;
};

struct RunConfig {
    MarketParams market;
    levy::LevyModel model;
    GridConfig grid;
    SchemeOptions scheme;
    HedgeConfig hedge;
    McRunConfig mc;
    OutputConfig output;
    std::vector<double> spots;             // price and table rows
    std::vector<double> strikes;           // smile strikes
    std::vector<double> rhos{0.1, 0.2, 0.3};
    double smile_spot = 100.0;
    int threads = 0;                       // 0: OpenMP default

    SolverGrid solver_grid() const;        // throws Error{invalid_argument}
};

/// Spots of the published price tables: 100 e^{x} for x = -0.48 .. 0.32 step 0.08.
std::vector<double> table_spots();

/// VG(theta = -0.33, sigma = 0.12, kappa = 0.16), sigma = 0.12, r = 0, K = 100, T = 1, rho = 0.2, dx = 0.01,
/// dt = 0.005, table spots, strikes 80..120 step 5.
RunConfig default_config();

/// Overlays a JSON document onto the defaults. Unknown keys and ill-typed values are rejected with
/// Error{config}. A "model" object replaces the default model wholesale.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& c);

/// Every violated constraint, one message each. Empty when the config is usable.
std::vector<std::string> violations(const RunConfig& c);

/// Throws Error{config} listing all violations.
void validate(const RunConfig& c);

OutputFormat parse_format(const std::string& s);

}  // namespace illiquid
