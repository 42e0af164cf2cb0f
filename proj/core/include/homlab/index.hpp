#pragma once

#include "homlab/discretize.hpp"

#include <vector>

namespace homlab {

struct Inertia {
    int minus = 0;
    int zero = 0;
    int plus = 0;
    bool stable = true;  // unchanged when tol_null shrinks tenfold
};

// 1e-8 (1 + spectral radius estimate).
inline double default_tol_null(double rho) { return 1e-8 * (1.0 + rho); }

Inertia inertia_of_values(const Vec& w, double tol_null);
Inertia inertia(const Mat& m, double tol_null = -1.0);
Inertia inertia(const BandedSym& m, double tol_null = -1.0);

struct IndexPair {
    int mu = 0;
    int nu = 0;
    bool stable = true;
};

// mu = n_minus(A - B) - n_minus(A), nu = n_zero(A - B).
IndexPair relative_index(const DiscreteOperator& A, const DiscreteOperator& B, double tol_null = -1.0);
IndexPair relative_index(const Mat& A, const Mat& B, double tol_null = -1.0);
// Same, for a precomputed inertia of A.
IndexPair relative_index(const Inertia& inertia_A, const BandedSym& A_minus_B, double tol_null);

// theta in [0,1] -> symmetric matrix of fixed size.
struct FlowPath {
    std::function<Mat(double)> eval;
    int steps = 64;  // initial sampling budget
};

FlowPath linear_pencil(const Mat& A, const Mat& B);  // theta -> A - theta B

struct Crossing {
    double theta = 0.0;
    int kernel_dim = 0;
    int signature = 0;
    bool endpoint = false;
};

struct FlowResult {
    int sf = 0;
    std::vector<Crossing> crossings;
    bool endpoint_terms = false;  // a crossing sat at theta = 0 or 1
    double regularization = 0.0;  // eps used by the retry, 0 if none
    bool regular = true;          // every crossing operator was nondegenerate
};

// Signed count of zero crossings with the endpoint convention
// sum sign C_r - dim H^-(C_r[F_0]) + dim H^+(C_r[F_1]).
FlowResult spectral_flow(const FlowPath& path, int steps = -1, double tol_null = -1.0);

// theta -> F(theta) + eps I. Rejects eps that would move an endpoint
// eigenvalue across zero.
FlowPath regularize(const FlowPath& path, double eps);

// Number of generalized eigenvalues theta in [0,1) of A v = theta B v.
int monotone_count(const Mat& A, const Mat& B, double tol_null = -1.0);

}  // namespace homlab
