#include "illiquid/config.hpp"
#include "illiquid/error.hpp"
#include "illiquid/experiments.hpp"
#include "illiquid/table.hpp"
#include "illiquid/validation.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

namespace {

using namespace illiquid;

enum Exit { exit_ok = 0, exit_config = 2, exit_numerical = 3, exit_validation = 4 };

struct Options {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::string> format;
    int threads = 0;
    std::optional<std::uint64_t> seed;
    bool print_config = false;
    bool table1 = false;
    bool surface = false;
    std::vector<std::string> spots;
    std::vector<std::string> strikes;
    bool spots_given = false;
    bool strikes_given = false;
    std::optional<std::uint64_t> paths;
};

// "--spots ''" yields an empty list
std::vector<double> numbers(const std::vector<std::string>& raw, const char* flag) {
    std::vector<double> out;
    for (const auto& item : raw) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw Error(Errc::config, std::string(flag) + ": not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

int resolve_threads(int flag, int from_config) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("ILLIQUID_PIDE_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1)
            throw Error(Errc::config,
                        std::string("ILLIQUID_PIDE_THREADS: expected a positive integer, got '") + env + "'");
        return static_cast<int>(n);
    }
    return from_config;
}

RunConfig resolve(const Options& o) {
    RunConfig c = o.config_path.empty() ? default_config() : load_config(o.config_path);
    if (o.out) c.output.path = *o.out;
    if (o.format) c.output.format = parse_format(*o.format);
    if (o.seed) c.mc.sim.seed = *o.seed;
    if (o.spots_given) c.spots = numbers(o.spots, "--spots");
    if (o.strikes_given) c.strikes = numbers(o.strikes, "--strikes");
    if (o.paths) c.mc.sim.paths = *o.paths;
    if (o.threads < 0) throw Error(Errc::config, "--threads must be >= 1");
    c.threads = resolve_threads(o.threads, c.threads);
    return c;
}

template <class F>
void with_output(const RunConfig& c, F&& write) {
    if (c.output.path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(c.output.path);
    if (!f) throw Error(Errc::config, "cannot open output file '" + c.output.path + "'");
    write(f);
    f.flush();
    if (!f) throw std::runtime_error("write to '" + c.output.path + "' failed");
}

void emit(const RunConfig& c, const Table& t) {
    with_output(c, [&](std::ostream& os) { write_table(os, t, c.output.format); });
}

int run(const std::string& command, const Options& o) {
    const RunConfig c = resolve(o);
    if (o.print_config) {
        std::cout << to_json(c).dump(2) << '\n';
        if (command.empty()) return exit_ok;
    }
    validate(c);
    if (c.threads > 0) omp_set_num_threads(c.threads);

    if (command == "price") {
        if (o.surface)
            emit(c, surface_table(solve(c, {c.market.rho, true})));
        else
            emit(c, o.table1 ? table1(c) : price_table(c));
    } else if (command == "table2") {
        emit(c, table2(c));
    } else if (command == "smile") {
        const SmileRun s = smile_curves(c);
        for (const auto& f : s.failures) std::cerr << "smile: " << f << '\n';
        emit(c, smile_table(s));
    } else if (command == "hedge") {
        emit(c, hedge_table(c));
    } else if (command == "mc") {
        emit(c, mc_table(c));
    } else if (command == "validate") {
        bool all = true;
        with_output(c, [&](std::ostream& os) {
            validation::run_all(c, [&](const validation::CriterionResult& r) {
                os << validation::to_json_line(r) << '\n';
                os.flush();
                std::cerr << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << '\n';
                all = all && r.pass;
            });
        });
        return all ? exit_ok : exit_validation;
    } else {
        throw Error(Errc::config, "a subcommand is required (price, table2, smile, hedge, mc, validate)");
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Option pricing and hedging under large-trader feedback with Levy jumps"};
    app.fallthrough();
    app.require_subcommand(0, 1);
    Options o;

    app.add_option("--config", o.config_path, "JSON config file (defaults are used for missing keys)")
        ->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "output path (default stdout)");
    app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", o.threads, "OpenMP threads (fallback: ILLIQUID_PIDE_THREADS)");
    app.add_option("--seed", o.seed, "Monte-Carlo seed");
    app.add_flag("--print-config", o.print_config, "print the resolved configuration");

    auto* price = app.add_subcommand("price", "put prices at the configured spots");
    price->add_flag("--table1", o.table1, "columns S,bs,fs,bs_pide,fs_pide");
    price->add_flag("--surface", o.surface, "full surface tau,x,S,u,V,psi");
    auto* price_spots = price->add_option("--spots", o.spots, "comma-separated spots overriding the config")
                            ->delimiter(',')
                            ->allow_extra_args(false);
    auto* t2 = app.add_subcommand("table2", "F-S and F-S PIDE columns for each configured rho");
    auto* t2_spots = t2->add_option("--spots", o.spots, "comma-separated spots overriding the config")
                         ->delimiter(',')
                         ->allow_extra_args(false);
    auto* sm = app.add_subcommand("smile", "implied volatility curves K,iv,source");
    auto* sm_strikes = sm->add_option("--strikes", o.strikes, "comma-separated strikes overriding the config")
                           ->delimiter(',')
                           ->allow_extra_args(false);
    app.add_subcommand("hedge", "hedging strategies and tracking-error variance rates");
    auto* mc = app.add_subcommand("mc", "Monte-Carlo put price at rho = 0");
    mc->add_option("--paths", o.paths, "number of paths");
    app.add_subcommand("validate", "acceptance suite as JSON lines; exit 4 on any failure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    o.spots_given = price_spots->count() > 0 || t2_spots->count() > 0;
    o.strikes_given = sm_strikes->count() > 0;
    std::string command;
    if (!app.get_subcommands().empty()) command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return e.code() == Errc::config ? exit_config : exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}
