#pragma once

#include "homlab/core.hpp"

#include <vector>

namespace homlab {

// Symmetric band matrix stored as its lower triangle in LAPACK 'L' layout:
// entry (i, j) with i >= j lives at ab[(i - j) + j * (kd + 1)].
class BandedSym {
public:
    BandedSym() = default;
    BandedSym(Index n, Index kd);

    static BandedSym from_dense(const Mat& m, Index kd = -1);
    static BandedSym identity(Index n);

    Index size() const { return n_; }
    Index kd() const { return kd_; }

    double operator()(Index i, Index j) const;
    void add(Index i, Index j, double v);
    void set(Index i, Index j, double v);

    Vec apply(const Vec& x) const;
    double quad(const Vec& x) const { return x.dot(apply(x)); }
    Mat dense() const;

    BandedSym shifted(double s) const;
    BandedSym widened(Index kd) const;
    BandedSym operator+(const BandedSym& o) const;
    BandedSym operator-(const BandedSym& o) const;
    BandedSym operator*(double s) const;

    // Max absolute row sum, an upper bound on the spectral radius.
    double norm_inf() const;

    const std::vector<double>& raw() const { return ab_; }
    std::vector<double>& raw() { return ab_; }

private:
    Index n_ = 0;
    Index kd_ = 0;
    std::vector<double> ab_;
};

// All eigenvalues in ascending order (LAPACK dsbev, values only).
Vec band_eigenvalues(const BandedSym& a);

// Eigenvalues in the half-open window (lo, hi] (LAPACK dsbevx, values only).
Vec band_eigenvalues_in(const BandedSym& a, double lo, double hi);

// Eigenvectors for the given eigenvalues by shifted inverse iteration with
// banded LU. Vectors of nearby eigenvalues are reorthogonalized against each
// other. Columns are Euclidean-normalized.
Mat band_eigenvectors(const BandedSym& a, const Vec& lambdas);

// LU factorization of a square banded (not necessarily definite) matrix.
class BandedLU {
public:
    BandedLU() = default;
    explicit BandedLU(const BandedSym& a);

    bool singular() const { return singular_; }
    Index size() const { return n_; }
    Vec solve(const Vec& b) const;
    Mat solve(const Mat& b) const;

private:
    Index n_ = 0;
    Index kl_ = 0;
    std::vector<double> lu_;
    std::vector<int> piv_;
    bool singular_ = false;
};

}  // namespace homlab
