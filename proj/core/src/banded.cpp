#include "homlab/banded.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace homlab {

BandedSym::BandedSym(Index n, Index kd) : n_(n), kd_(std::min(kd, std::max<Index>(n - 1, 0))) {
    if (n < 0 || kd < 0) throw DimensionError("BandedSym: negative size or bandwidth");
    ab_.assign(static_cast<std::size_t>((kd_ + 1) * n_), 0.0);
}

BandedSym BandedSym::from_dense(const Mat& m, Index kd) {
    if (m.rows() != m.cols()) throw DimensionError("BandedSym::from_dense: matrix not square");
    const Index n = m.rows();
    if (kd < 0) {
        kd = 0;
        for (Index j = 0; j < n; ++j)
            for (Index i = j; i < n; ++i)
                if (m(i, j) != 0.0 || m(j, i) != 0.0) kd = std::max(kd, i - j);
    }
    BandedSym b(n, kd);
    for (Index j = 0; j < n; ++j)
        for (Index i = j; i <= std::min(n - 1, j + b.kd_); ++i) b.set(i, j, 0.5 * (m(i, j) + m(j, i)));
    return b;
}

BandedSym BandedSym::identity(Index n) {
    BandedSym b(n, 0);
    std::fill(b.ab_.begin(), b.ab_.end(), 1.0);
    return b;
}

double BandedSym::operator()(Index i, Index j) const {
    if (i < j) std::swap(i, j);
    if (i - j > kd_) return 0.0;
    return ab_[static_cast<std::size_t>((i - j) + j * (kd_ + 1))];
}

void BandedSym::add(Index i, Index j, double v) {
    if (i < j) std::swap(i, j);
    if (i - j > kd_) throw DimensionError("BandedSym::add: entry outside band");
    ab_[static_cast<std::size_t>((i - j) + j * (kd_ + 1))] += v;
}

void BandedSym::set(Index i, Index j, double v) {
    if (i < j) std::swap(i, j);
    if (i - j > kd_) throw DimensionError("BandedSym::set: entry outside band");
    ab_[static_cast<std::size_t>((i - j) + j * (kd_ + 1))] = v;
}

Vec BandedSym::apply(const Vec& x) const {
    if (x.size() != n_) throw DimensionError("BandedSym::apply: size mismatch");
    Vec y = Vec::Zero(n_);
    for (Index j = 0; j < n_; ++j) {
        const double* col = ab_.data() + j * (kd_ + 1);
        y[j] += col[0] * x[j];
        const Index top = std::min(kd_, n_ - 1 - j);
        for (Index d = 1; d <= top; ++d) {
            y[j + d] += col[d] * x[j];
            y[j] += col[d] * x[j + d];
        }
    }
    return y;
}

Mat BandedSym::dense() const {
    Mat m = Mat::Zero(n_, n_);
    for (Index j = 0; j < n_; ++j)
        for (Index i = j; i <= std::min(n_ - 1, j + kd_); ++i) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
}

BandedSym BandedSym::shifted(double s) const {
    BandedSym b = *this;
    for (Index j = 0; j < n_; ++j) b.ab_[static_cast<std::size_t>(j * (kd_ + 1))] += s;
    return b;
}

BandedSym BandedSym::widened(Index kd) const {
    if (kd <= kd_) return *this;
    BandedSym b(n_, kd);
    for (Index j = 0; j < n_; ++j)
        for (Index i = j; i <= std::min(n_ - 1, j + kd_); ++i) b.set(i, j, (*this)(i, j));
    return b;
}

BandedSym BandedSym::operator+(const BandedSym& o) const {
    if (o.n_ != n_) throw DimensionError("BandedSym::+: size mismatch");
    BandedSym r = widened(std::max(kd_, o.kd_));
    for (Index j = 0; j < n_; ++j)
        for (Index i = j; i <= std::min(n_ - 1, j + o.kd_); ++i) r.add(i, j, o(i, j));
    return r;
}

BandedSym BandedSym::operator-(const BandedSym& o) const { return *this + o * -1.0; }

BandedSym BandedSym::operator*(double s) const {
    BandedSym r = *this;
    for (double& v : r.ab_) v *= s;
    return r;
}

double BandedSym::norm_inf() const {
    double best = 0.0;
    for (Index i = 0; i < n_; ++i) {
        double row = 0.0;
        for (Index j = std::max<Index>(0, i - kd_); j <= std::min(n_ - 1, i + kd_); ++j) row += std::fabs((*this)(i, j));
        best = std::max(best, row);
    }
    return best;
}

Vec band_eigenvalues(const BandedSym& a) {
    const auto n = static_cast<lapack_int>(a.size());
    if (n == 0) return Vec();
    std::vector<double> ab = a.raw();
    Vec w(n);
    const lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'L', n, static_cast<lapack_int>(a.kd()), ab.data(),
                                          static_cast<lapack_int>(a.kd() + 1), w.data(), nullptr, 1);
    if (info != 0) throw NumericalError("dsbev failed with info=" + std::to_string(info));
    return w;
}

Vec band_eigenvalues_in(const BandedSym& a, double lo, double hi) {
    const auto n = static_cast<lapack_int>(a.size());
    if (n == 0 || !(hi > lo)) return Vec();
    std::vector<double> ab = a.raw();
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
    double q = 0.0;
    double z = 0.0;
    lapack_int m = 0;
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    const lapack_int info =
        LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'V', 'L', n, static_cast<lapack_int>(a.kd()), ab.data(),
                       static_cast<lapack_int>(a.kd() + 1), &q, 1, lo, hi, 0, 0, abstol, &m, w.data(), &z, 1, ifail.data());
    if (info != 0) throw NumericalError("dsbevx failed with info=" + std::to_string(info));
    return Eigen::Map<Vec>(w.data(), m);
}

BandedLU::BandedLU(const BandedSym& a) : n_(a.size()), kl_(a.kd()) {
    const Index ld = 3 * kl_ + 1;
    lu_.assign(static_cast<std::size_t>(ld * n_), 0.0);
    for (Index j = 0; j < n_; ++j)
        for (Index i = std::max<Index>(0, j - kl_); i <= std::min(n_ - 1, j + kl_); ++i)
            lu_[static_cast<std::size_t>((2 * kl_ + i - j) + j * ld)] = a(i, j);
    piv_.assign(static_cast<std::size_t>(n_), 0);
    if (n_ == 0) return;
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), static_cast<lapack_int>(n_),
                                           static_cast<lapack_int>(kl_), static_cast<lapack_int>(kl_), lu_.data(),
                                           static_cast<lapack_int>(ld), piv_.data());
    if (info < 0) throw NumericalError("dgbtrf: illegal argument " + std::to_string(-info));
    singular_ = info > 0;
}

Mat BandedLU::solve(const Mat& b) const {
    if (b.rows() != n_) throw DimensionError("BandedLU::solve: size mismatch");
    if (singular_) throw NumericalError("BandedLU::solve: matrix is singular");
    Mat x = b;
    if (n_ == 0 || b.cols() == 0) return x;
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n_), static_cast<lapack_int>(kl_),
                                           static_cast<lapack_int>(kl_), static_cast<lapack_int>(b.cols()), lu_.data(),
                                           static_cast<lapack_int>(3 * kl_ + 1), piv_.data(), x.data(),
                                           static_cast<lapack_int>(n_));
    if (info != 0) throw NumericalError("dgbtrs failed with info=" + std::to_string(info));
    return x;
}

Vec BandedLU::solve(const Vec& b) const {
    Mat x = solve(Mat(b));
    return x.col(0);
}

Mat band_eigenvectors(const BandedSym& a, const Vec& lambdas) {
    const Index n = a.size();
    const Index m = lambdas.size();
    Mat v(n, m);
    if (m == 0) return v;
    const double scale = std::max(1.0, a.norm_inf());
    const double cluster = 1e-3 * scale;
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> gauss;
    Index cluster_start = 0;
    for (Index k = 0; k < m; ++k) {
        const double lam = lambdas[k];
        if (k > 0 && std::fabs(lam - lambdas[k - 1]) > cluster) cluster_start = k;
        double shift = lam;
        BandedLU lu(a.shifted(-shift));
        // An exactly singular pivot is harmless for inverse iteration; nudge it.
        for (int tries = 0; lu.singular() && tries < 8; ++tries) {
            shift += 1e-14 * scale * (tries + 1);
            lu = BandedLU(a.shifted(-shift));
        }
        if (lu.singular()) throw NumericalError("band_eigenvectors: shifted matrix stays singular");
        Vec x(n);
        for (Index i = 0; i < n; ++i) x[i] = gauss(rng);
        x.normalize();
        for (int it = 0; it < 4; ++it) {
            Vec y = lu.solve(x);
            for (int pass = 0; pass < 2; ++pass)
                for (Index j = cluster_start; j < k; ++j) y -= v.col(j).dot(y) * v.col(j);
            const double nrm = y.norm();
            if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("band_eigenvectors: breakdown");
            x = y / nrm;
            if (it >= 1 && (a.apply(x) - lam * x).norm() <= 1e-13 * scale) break;
        }
        v.col(k) = x;
    }
    return v;
}

}  // namespace homlab
