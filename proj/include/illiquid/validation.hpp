#pragma once

#include "illiquid/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace illiquid::validation {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Published reference prices at the eleven table spots.
struct ReferenceTables {
    static const std::vector<double>& bs();
    static const std::vector<double>& pide();                 // VG, rho = 0
    static const std::vector<double>& fs(double rho);         // rho in {0.1, 0.2, 0.3}
    static const std::vector<double>& fs_pide(double rho);    // rho in {0.1, 0.2, 0.3}
};

/// The acceptance parameters: sigma = 0.12, r = 0, K = 100, T = 1, L = 1, VG(-0.33, 0.12, 0.16), dx = 0.01,
/// dt = 0.005, N = 800. Only the scheme options and the Monte-Carlo seed are taken from `c`.
RunConfig pinned_config(const RunConfig& c);

CriterionResult bs_reproduction(const RunConfig& c);       // 1
CriterionResult fs_columns(const RunConfig& c);            // 2
CriterionResult pide_column(const RunConfig& c);           // 3
CriterionResult fs_pide_columns(const RunConfig& c);       // 4
CriterionResult orderings(const RunConfig& c);             // 5
CriterionResult smile_properties(const RunConfig& c);      // 6
CriterionResult mc_cross_check(const RunConfig& c);        // 7
CriterionResult feedback_identities(const RunConfig& c);   // 8
CriterionResult expansion_order(const RunConfig& c);       // 9
/// 10; `elapsed_before` is the time already spent by the other criteria and counts toward the total budget.
CriterionResult invariants(const RunConfig& c, double elapsed_before = 0.0);

/// All ten criteria in order. `on_result` is called as each one finishes.
std::vector<CriterionResult> run_all(const RunConfig& c,
                                     const std::function<void(const CriterionResult&)>& on_result = {});

/// One JSON object on a single line.
std::string to_json_line(const CriterionResult& r);

}  // namespace illiquid::validation
