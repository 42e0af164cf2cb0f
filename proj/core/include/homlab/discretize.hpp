#pragma once

#include "homlab/banded.hpp"
#include "homlab/model.hpp"

#include <map>

namespace homlab {

// Uniform truncation grid on (-T, T) with n interior nodes t_i = -T + i h,
// i = 1..n, h = 2T/(n+1). Values at +-T are implicitly zero.
struct Grid {
    double T = 1.0;
    Index n = 1;
    double h = 1.0;

    double node(Index i) const { return -T + static_cast<double>(i + 1) * h; }  // 0-based
    std::vector<double> nodes() const;
};

Grid make_grid(double T, Index n);

// How -J d/dt is discretized. In the staggered schemes the q components of
// node i sit half a step before (forward) or after (backward) t_i and the
// derivative is a one-sided difference; central uses the centred difference
// on collocated unknowns.
enum class Scheme { staggered_forward, staggered_backward, central };

// Unknowns are node-major: node i occupies [2N i, 2N i + 2N), p before q.
struct DiscreteOperator {
    Grid grid;
    int dim = 2;
    BandedSym matrix;
    Scheme scheme = Scheme::staggered_forward;

    Index size() const { return matrix.size(); }
    DiscreteOperator operator-(const DiscreteOperator& o) const;
};

DiscreteOperator assemble(const SymMatFn& L, const Grid& grid, Scheme scheme = Scheme::staggered_forward);
DiscreteOperator multiplier(const SymMatFn& B, const Grid& grid);
DiscreteOperator multiplier(const std::vector<Mat>& blocks, const Grid& grid);

// Nodal views of a grid function.
Vec node_value(const Vec& z, int dim, Index i);
std::vector<Vec> nodal(const Vec& z, int dim);
Vec from_nodal(const std::vector<Vec>& zs);

struct EigenDecomp {
    Grid grid;
    int dim = 2;
    Vec values;          // ascending
    Mat vectors;         // columns, L2-normalized: h * v.v = 1
    Vec residuals;       // ||A v - lambda v|| / ||v||, Euclidean
    Index offset = 0;    // count of eigenvalues of A below the first returned one
    Index n_nonpositive = 0;  // count of eigenvalues <= 0 of A (all of it)

    Index size() const { return values.size(); }
    // Signed label: k > 0 is the k-th positive eigenvalue, k < 0 the |k|-th
    // non-positive one counted downward from zero.
    int signed_label(Index j) const;
};

// Values-only spectrum of the whole operator.
Vec eigenvalues(const DiscreteOperator& A);

// Eigenpairs with eigenvalues in [a, b], residual-certified.
EigenDecomp spectrum(const DiscreteOperator& A, double a, double b);
// The k eigenpairs nearest to zero.
EigenDecomp spectrum_nearest(const DiscreteOperator& A, Index k);
// Every eigenpair.
EigenDecomp spectrum_all(const DiscreteOperator& A);

inline double l2_inner(const Vec& u, const Vec& v, double h) { return h * u.dot(v); }
inline double l2_norm(const Vec& u, double h) { return std::sqrt(h * u.squaredNorm()); }
double lp_norm(const Vec& z, int dim, double h, double p);
double sup_norm(const Vec& z, int dim);

struct Norms {
    double l2 = 0.0;
    double e_norm = 0.0;
    std::map<double, double> lp;
};

// l2, E-norm (sum (1 + |lambda_k|) c_k^2) and requested L^p norms. The
// decomposition must capture z to relative L2 completeness 1 - 1e-8.
Norms norms(const Vec& z, const EigenDecomp& decomp, const std::vector<double>& ps = {});

// int_{|t| > R} |z|^2 divided by ||z||_E^2.
double tail_mass(const Vec& z, double R, const EigenDecomp& decomp);

// Least-squares slope of log tail_mass against log R.
double tail_decay_exponent(const Vec& z, const std::vector<double>& Rs, const EigenDecomp& decomp);

}  // namespace homlab
