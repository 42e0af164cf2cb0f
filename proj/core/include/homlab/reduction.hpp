#pragma once

#include "homlab/discretize.hpp"
#include "homlab/index.hpp"

namespace homlab {

struct BetaChoice {
    double beta = 0.0;
    double threshold = 0.0;
    double gap_lo = 0.0;  // |lambda| just below beta
    double gap_hi = 0.0;  // |lambda| just above beta
    double gap_width() const { return gap_hi - gap_lo; }
};

// Midpoint of the first gap of the sorted |lambda| whose lower end is at
// least max{2(C_R+1), 2(gamma+1)}. Gaps narrower than tol_gap (default
// 4 tol_null) are skipped.
BetaChoice choose_beta(double C_R, double gamma, const Vec& eigenvalues, double tol_gap = -1.0);

// Galerkin split of A into X0 (|lambda| <= beta) and its complement, with a
// banded factorization of A + eps I for the complement solves.
class ReducedProblem {
public:
    ReducedProblem(DiscreteOperator A, Potential R, double beta, double eps = -1.0);

    const DiscreteOperator& A() const { return A_; }
    const Potential& R() const { return R_; }
    const Grid& grid() const { return A_.grid; }
    double h() const { return A_.grid.h; }
    int dim() const { return A_.dim; }
    double beta() const { return beta_; }
    double eps() const { return eps_; }
    double C_R() const { return R_.bound_c(); }
    Index d0() const { return lambda0_.size(); }
    int dim_Eminus_X0() const { return dim_eminus_; }
    const Mat& V0() const { return V0_; }
    const Vec& lambda0() const { return lambda0_; }
    const Inertia& inertia_A() const { return inertia_A_; }
    double tol_null() const { return tol_null_; }

    // Same X0 split and factorization with another potential. beta must still
    // clear the selection threshold for R's bound; auxiliary_solve reports a
    // failed contraction otherwise.
    ReducedProblem with_potential(Potential R) const;

    Vec embed(const Vec& xi) const { return V0_ * xi; }
    Vec coords(const Vec& z) const { return h() * (V0_.transpose() * z); }
    Vec project_perp(const Vec& g) const { return g - embed(coords(g)); }
    // (A + eps I)^{-1} restricted to the complement of X0. The inverse
    // commutes with the spectral projector, so one projection suffices.
    Vec solve_perp(const Vec& g) const { return project_perp(lu_eps_.solve(g)); }

    // Nodewise grad R(t_i, z_i), sum h R(t_i, z_i), and hess blocks.
    Vec grad_field(const Vec& z) const;
    double phi(const Vec& z) const;
    std::vector<Mat> hess_blocks(const Vec& z) const;

private:
    DiscreteOperator A_;
    Potential R_;
    double beta_;
    double eps_;
    Mat V0_;
    Vec lambda0_;
    int dim_eminus_ = 0;
    Inertia inertia_A_;
    double tol_null_ = 0.0;
    BandedLU lu_eps_;
    std::vector<double> times_;
};

ReducedProblem build_reduction(const DiscreteOperator& A, const Potential& R, double beta, double eps = -1.0);

struct AuxiliarySolution {
    Vec x;       // X0 coordinates
    Vec z;       // x + z_+ + z_-
    Vec z_perp;  // z_+ + z_-
    int iterations = 0;
    double update_norm = 0.0;
    double contraction = 0.0;  // largest observed ratio of successive updates
    double residual = 0.0;     // L2 norm of the complement part of A z - grad R(z)
};

// Picard iteration z_perp <- (A+eps)^{-1} P_perp (grad R(x + z_perp) + eps z_perp).
// tol < 0 selects 1e-10 (1 + ||x||).
AuxiliarySolution auxiliary_solve(const ReducedProblem& rp, const Vec& x, const Vec* warm = nullptr,
                                  double tol = -1.0, int max_iter = 500);

double a_value(const ReducedProblem& rp, const AuxiliarySolution& aux);
Vec a_grad(const ReducedProblem& rp, const AuxiliarySolution& aux);
double a_value(const ReducedProblem& rp, const Vec& x);
Vec a_grad(const ReducedProblem& rp, const Vec& x);

// Central finite differences of a_grad, step 1e-5 (1 + ||x||), symmetrized.
Mat a_hess(const ReducedProblem& rp, const Vec& x);

// Hessian from the Schur complement: H^{-1} = h V0^T (A - hess R(z))^{-1} V0.
// Requires A - hess R(z) to be nonsingular.
Mat a_hess_schur(const ReducedProblem& rp, const AuxiliarySolution& aux);

// Newton direction -H^{-1} g computed with one banded solve.
Vec newton_direction(const ReducedProblem& rp, const AuxiliarySolution& aux, const Vec& g);

struct SplitNorms {
    double u_plus = 0.0;   // ||u_+||_{L2} = || |A_eps|^{1/2} z_+ ||
    double u_minus = 0.0;
    double z_plus_E = 0.0;  // ||z_+||_E
    double z_minus_E = 0.0;
};

// Splits z_perp over positive/negative spectral parts using a full decomposition of A.
SplitNorms split_norms(const ReducedProblem& rp, const EigenDecomp& full, const AuxiliarySolution& aux);
// Same quantities from Gauss-Lanczos quadrature on A started at z_perp; no
// eigendecomposition needed. tol is relative to ||z_perp||_E^2.
SplitNorms split_norms(const ReducedProblem& rp, const AuxiliarySolution& aux, double tol = 1e-10,
                       int max_steps = 600);

// Sum bound 2 sqrt(beta)(C_R + c)/(beta - 2 C_R - 3 eps); c = eps gives the
// bound on ||u+|| + ||u-||, c = 1 the per-component statement.
double lemma22_bound(double beta, double C_R, double eps, double c);

}  // namespace homlab
