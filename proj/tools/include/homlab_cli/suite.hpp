#pragma once

#include "homlab_cli/commands.hpp"

#include "homlab/potentials.hpp"

namespace homlab::cli {

struct PropertyResult {
    std::string suite;
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
};

const std::vector<std::string>& suite_names();

// One-sided (eta, eta', eta'') at 1 and 2 against (0,0,0) and (1/9, 2/9, 0).
double eta_junction_error(const EtaFns& eta);
// The standard cutoff with the cubic coefficient 2/9 misprinted as 2/7.
EtaFns mistyped_eta();

// Runs the named suites (all when `only` is empty).
std::vector<PropertyResult> run_suite(const std::vector<std::string>& only, const EtaFns& eta, unsigned seed);

}  // namespace homlab::cli
