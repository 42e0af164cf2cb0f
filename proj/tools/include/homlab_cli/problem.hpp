#pragma once

#include "homlab_cli/config.hpp"

#include "homlab/orbits.hpp"

#include <optional>

namespace homlab::cli {

struct RunConfig {
    // problem
    std::string L = "split_growth";
    int N = 1;
    std::string potential = "none";  // none | quadratic | saturating | even_example
    double pot_a = 2.0;
    double pot_b = 1.1;
    int gaps = 3;          // even_example: B_inf this many gaps above B0
    double window = 10.0;  // even_example: |lambda| window handed to the construction
    // grid
    double T = 20.0;
    Index n = 2000;
    Scheme scheme = Scheme::staggered_forward;
    // stages
    double spec_lo = -6.0;
    double spec_hi = 6.0;
    std::string index_B = "B0";
    std::string linear_B = "B_inf";
    double linear_T = 20.0;
    double linear_h = 1e-3;
    Index flow_max_dim = 1200;
    int reduce_samples = 5;
    // tolerances
    double tol_null = -1.0;  // automatic when negative
    double tol_orbit = 1e-6;
    double tol_nontrivial = 1e-6;
    double decay_tol = 1e-6;
    // search
    int directions = 8;
    std::vector<double> amplitudes{1.5, 3.0, 6.0};
    int random = 8;
    unsigned seed = 1;
    bool deflation = true;
    int reseed = 2;
    std::string side = "auto";
    // verify
    std::vector<std::string> verify_only;
    std::string eta_mutation = "none";
    // output
    std::string out_dir = "out";
    std::vector<std::string> stages{"spectrum", "index", "reduce", "solve"};
    bool refine = false;
};

const std::vector<std::string>& known_keys();
RunConfig run_config(const Config& c);
// Stage dependencies: index and reduce need spectrum, solve needs reduce.
void validate_stages(const std::vector<std::string>& stages);

struct Problem {
    Grid grid;
    SymMatFn L;
    DiscreteOperator A;
    Vec ev;  // full spectrum of A, ascending
    std::optional<Potential> R;
    double B0 = std::nan("");
    double B_inf = std::nan("");
    Side side = Side::plus;
    int N = 1;
};

SymMatFn growth(const RunConfig& rc);
Problem build_problem(const RunConfig& rc);
// A named constant matrix: a number (scalar multiple of I), a comma list
// (diagonal), or B0 / B_inf of the problem.
Mat named_matrix(const Problem& p, const std::string& spec, const std::string& key);

}  // namespace homlab::cli
