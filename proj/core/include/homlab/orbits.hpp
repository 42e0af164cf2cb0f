#pragma once

#include "homlab/reduction.hpp"

#include <optional>
#include <string>

namespace homlab {

struct Morse {
    int minus = 0;
    int zero = 0;
};

struct Orbit {
    Vec x;  // X0 coordinates of the critical point
    Vec z;
    double residual = 0.0;  // ||A z - grad R(., z)||_{L2}
    double l2_norm = 0.0;
    double sup_norm = 0.0;
    Morse morse;
    IndexPair index_pair;
    int dim_eminus_X0 = 0;
    std::optional<double> k_tag;  // M_k of the truncation that produced it
    std::string hessian_source;   // "schur" or "finite-difference"

    bool nontrivial(double tol_nontrivial = 1e-6) const { return l2_norm > tol_nontrivial; }
    // m- = dim E-(X0) + mu and m0 = nu.
    bool index_identity() const { return morse.minus == dim_eminus_X0 + index_pair.mu && morse.zero == index_pair.nu; }
};

struct NewtonOptions {
    int max_iter = 60;
    int max_backtracks = 8;
    int stall_window = 6;  // give up when ||a_grad|| has not dropped below 0.9x its value this many iterations ago
    bool deflation = true;
    bool mirror_even = true;     // accept -x next to x when R is even
    int reseed_directions = 2;   // low-|eigenvalue| Hessian directions tried after each new point
    double deflation_power = 2.0;
    double deflation_shift = 1.0;
};

struct NewtonLog {
    std::size_t seed = 0;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
    std::string note;
};

struct NewtonResult {
    std::vector<Vec> points;  // distinct critical x
    std::vector<NewtonLog> log;
    std::size_t seeds_used = 0;
};

inline double tol_crit(const Vec& x) { return 1e-9 * (1.0 + x.norm()); }
inline double tol_distinct(double l2) { return 1e-3 * std::max(1.0, l2); }

// Damped Newton on a_grad with backtracking on ||a_grad||. With deflation on,
// previously found points are removed by the multiplicative operator
// prod_i (||x - x_i||^-p + shift) and the search re-seeds along the Hessian
// directions of smallest |eigenvalue| at every new point.
NewtonResult newton_search(const ReducedProblem& rp, const std::vector<Vec>& seeds, const NewtonOptions& opts = {});

// +-amplitude along the first `directions` X0 coordinates (sorted by |lambda|),
// followed by `random` Gaussian seeds scaled to the amplitude range.
std::vector<Vec> generate_seeds(const ReducedProblem& rp, int directions, const std::vector<double>& amplitudes,
                                int random, unsigned seed);

// Morse data of a at x: from the Schur Hessian when A - hess R(z) is
// invertible, otherwise from the finite-difference Hessian.
Morse morse_data(const ReducedProblem& rp, const AuxiliarySolution& aux, std::string* source = nullptr);

// Certified orbit; throws NumericalError when the residual exceeds tol_orbit.
Orbit lift(const ReducedProblem& rp, const Vec& x, double tol_orbit = 1e-6);

struct GuaranteeInput {
    int mu0 = 0;
    int nu0 = 0;
    int mu1 = 0;   // mu(K B1) for the sandwich, mu(K B_inf) for the one-sided case
    int nu1 = 0;
    bool even = false;
    int N = 1;
    bool sandwich = false;
    Side side = Side::plus;
};

struct Guarantee {
    int count = 0;
    bool pairs = false;  // count is a number of +- pairs
    std::string rule;    // which statement produced the bound
};

Guarantee guarantee(const GuaranteeInput& in);

struct SearchReport {
    std::vector<Orbit> orbits;  // distinct certified orbits, trivial one included if found
    std::size_t seeds_used = 0;
    std::size_t rejected = 0;   // critical points whose lift failed certification
    Guarantee guarantee;
    int nontrivial_found = 0;   // pairs counted once for even R
    bool pass = false;
    std::string diagnostic;
};

// Lifts, certifies, de-duplicates (tol_distinct in L2) and counts.
SearchReport run_search(const ReducedProblem& rp, const std::vector<Vec>& seeds, const Guarantee& g,
                        const NewtonOptions& opts = {}, double tol_orbit = 1e-6,
                        std::optional<double> k_tag = std::nullopt);

struct MultiplicityVerdict {
    bool pass = false;
    int found = 0;
    int required = 0;
    std::string diagnostic;
};

// Counts distinct certified nontrivial orbits (pairs once for even R).
int count_nontrivial(const std::vector<Orbit>& orbits, bool even, double tol_nontrivial = 1e-6);
MultiplicityVerdict verify_multiplicity(const Guarantee& g, const std::vector<Orbit>& orbits, bool even,
                                        double tol_nontrivial = 1e-6);

struct FamilyRun {
    double M_k = 0.0;
    std::vector<Orbit> orbits;
};

struct AprioriMatch {
    int mu = 0;
    std::vector<double> sup_norms;  // one per run, in family order
    double variation = 0.0;         // (max - min) / max
    bool within_identity_region = true;  // sup_norm < M_k for every run
};

struct AprioriReport {
    std::vector<AprioriMatch> matches;
    int unmatched = 0;
    double max_variation = 0.0;
    double sup_over_k = 0.0;
    bool pass = true;
};

// Orbits with index_pair.mu <= mu_inf - 1 are matched across runs (nearest in
// L2 with equal index pair) and their sup-norms compared.
AprioriReport apriori_bound_check(const std::vector<FamilyRun>& family, int mu_inf, double h, double rel_tol = 0.01);

}  // namespace homlab
