#include "illiquid/config.hpp"
#include "illiquid/validation.hpp"

#include <cstdio>

int main() {
    bool all = true;
    illiquid::validation::run_all(illiquid::default_config(), [&](const illiquid::validation::CriterionResult& r) {
        std::printf("%s [%d] %s (%.2f s): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
        all = all && r.pass;
    });
    return all ? 0 : 1;
}
