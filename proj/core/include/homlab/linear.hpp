#pragma once

#include "homlab/discretize.hpp"

namespace homlab {

// Fundamental solution of dW/dt = J B(t) W, W(t0) = I, on [t0, t0 + T].
struct SymplecticPath {
    std::vector<double> times;
    std::vector<Mat> W;
    double h = 0.0;
    // max ||W^T J W - J|| / max(1, ||W||^2); the scaling keeps the measure
    // meaningful when W grows exponentially.
    double defect = 0.0;
    double det_error = 0.0;  // max |det W - 1| / max(1, ||W||^{2N}), same scaling
    const Mat& final() const { return W.back(); }
};

// Implicit midpoint (Cayley) steps; halves h up to 6 times when the defect
// exceeds tol_symp.
SymplecticPath fundamental_solution(const SymMatFn& B, double T, double h, double tol_symp = 1e-10, double t0 = 0.0);

struct StableSubspace {
    Mat basis;  // orthonormal columns
    int dim = 0;
    double certificate = 0.0;  // max |W(T) v| over unit v in the span
    bool inconclusive = false;
    bool paired = false;       // small singular values recovered from their symplectic partners
    Vec singular_values;       // of W(T), descending
};

// Right singular vectors of W(T) with singular value <= decay_tol. When the
// small singular values sit below round-off, they are taken from the large
// ones through sigma_small = 1/sigma_large with vectors J v_large.
StableSubspace stable_subspace(const SymplecticPath& path, double decay_tol = 1e-6);

// rank [S | J S] == 2 dim S.
bool j_transversality(const Mat& basis, double tol = 1e-8);
bool j_transversality(const StableSubspace& s, double tol = 1e-8);

// Dimension of span(Q1) and span(Q2) intersection: cosines of principal
// angles within angle_tol of 1.
int intersection_dim(const Mat& Q1, const Mat& Q2, double angle_tol = 1e-3);

struct NullityOptions {
    double T_ode = 6.0;   // half-line horizon, capped at grid.T
    double h_ode = 1e-3;
    double decay_tol = 1e-6;
    double angle_tol = 1e-3;
};

struct NullityReport {
    int nu_index = 0;        // n_zero(A - B) on the grid
    int dim_forward = 0;     // solutions decaying as t -> +inf
    int dim_backward = 0;    // solutions decaying as t -> -inf
    int dim_intersection = 0;
    bool inconclusive = false;
    bool agree = false;
};

// Kernel of F - B against homoclinic solutions of dz/dt = J (B - L) z.
NullityReport nullity_crosscheck(const SymMatFn& L, const SymMatFn& B, const Grid& grid,
                                 const NullityOptions& opts = {});

}  // namespace homlab
