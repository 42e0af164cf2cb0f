#include "homlab/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace homlab {

std::vector<double> Grid::nodes() const {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = node(i);
    return t;
}

Grid make_grid(double T, Index n) {
    if (!(T > 0.0)) throw DomainError("make_grid: T must be positive");
    if (n < 3) throw DomainError("make_grid: need n >= 3");
    return Grid{T, n, 2.0 * T / static_cast<double>(n + 1)};
}

DiscreteOperator DiscreteOperator::operator-(const DiscreteOperator& o) const {
    if (o.size() != size() || o.dim != dim) throw DimensionError("DiscreteOperator: size mismatch");
    return DiscreteOperator{grid, dim, matrix - o.matrix, scheme};
}

namespace {

// Adds the lower-triangle part of a dense block placed at (r0, c0) with r0 == c0.
void add_diag_block(BandedSym& m, Index r0, const Mat& blk) {
    for (Index c = 0; c < blk.cols(); ++c)
        for (Index r = c; r < blk.rows(); ++r) m.add(r0 + r, r0 + c, blk(r, c));
}

}  // namespace

DiscreteOperator assemble(const SymMatFn& L, const Grid& grid, Scheme scheme) {
    const int d = L.dim();
    const int N = d / 2;
    const Index n = grid.n;
    const double h = grid.h;
    const Index kd = scheme == Scheme::staggered_forward ? 3 * N : scheme == Scheme::staggered_backward ? 2 * N - 1 : 4 * N - 1;
    BandedSym m(d * n, kd);
    const Mat mJ = -symplectic_J(d);
    for (Index i = 0; i < n; ++i) {
        const double t = grid.node(i);
        const Index base = d * i;
        Mat blk = L(t);
        if (scheme != Scheme::central) {
            // q components live half a step off the node.
            const double tq = scheme == Scheme::staggered_forward ? t - 0.5 * h : t + 0.5 * h;
            blk.bottomRightCorner(N, N) = L(tq).bottomRightCorner(N, N);
        }
        add_diag_block(m, base, blk);
        switch (scheme) {
            case Scheme::staggered_forward:
                // p-row: (q_{i+1} - q_i)/h; the q-row carries the transpose.
                for (int a = 0; a < N; ++a) {
                    m.add(base + N + a, base + a, -1.0 / h);
                    if (i + 1 < n) m.add(base + d + N + a, base + a, 1.0 / h);
                }
                break;
            case Scheme::staggered_backward:
                // p-row: (q_i - q_{i-1})/h.
                for (int a = 0; a < N; ++a) {
                    m.add(base + N + a, base + a, 1.0 / h);
                    if (i > 0) m.add(base + a, base - d + N + a, -1.0 / h);
                }
                break;
            case Scheme::central:
                if (i + 1 < n)
                    for (int r = 0; r < d; ++r)
                        for (int c = 0; c < d; ++c)
                            if (mJ(r, c) != 0.0) m.add(base + d + c, base + r, mJ(r, c) / (2.0 * h));
                break;
        }
    }
    return DiscreteOperator{grid, d, m, scheme};
}

DiscreteOperator multiplier(const std::vector<Mat>& blocks, const Grid& grid) {
    if (static_cast<Index>(blocks.size()) != grid.n) throw DimensionError("multiplier: one block per node required");
    const int d = static_cast<int>(blocks.empty() ? 2 : blocks.front().rows());
    BandedSym m(d * grid.n, d - 1);
    for (Index i = 0; i < grid.n; ++i) {
        const Mat& b = blocks[static_cast<std::size_t>(i)];
        if (b.rows() != d || b.cols() != d) throw DimensionError("multiplier: block has wrong shape");
        add_diag_block(m, d * i, 0.5 * (b + b.transpose()));
    }
    return DiscreteOperator{grid, d, m, Scheme::staggered_forward};
}

DiscreteOperator multiplier(const SymMatFn& B, const Grid& grid) {
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(grid.n));
    for (Index i = 0; i < grid.n; ++i) blocks.push_back(B(grid.node(i)));
    return multiplier(blocks, grid);
}

Vec node_value(const Vec& z, int dim, Index i) { return z.segment(dim * i, dim); }

std::vector<Vec> nodal(const Vec& z, int dim) {
    std::vector<Vec> out;
    const Index n = z.size() / dim;
    out.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) out.push_back(z.segment(dim * i, dim));
    return out;
}

Vec from_nodal(const std::vector<Vec>& zs) {
    if (zs.empty()) return Vec();
    const Index d = zs.front().size();
    Vec z(d * static_cast<Index>(zs.size()));
    for (std::size_t i = 0; i < zs.size(); ++i) z.segment(d * static_cast<Index>(i), d) = zs[i];
    return z;
}

int EigenDecomp::signed_label(Index j) const {
    const Index g = offset + j;
    if (g < n_nonpositive) return -static_cast<int>(n_nonpositive - g);
    return static_cast<int>(g - n_nonpositive + 1);
}

Vec eigenvalues(const DiscreteOperator& A) { return band_eigenvalues(A.matrix); }

namespace {

EigenDecomp decompose(const DiscreteOperator& A, const Vec& all, Index first, Index count) {
    EigenDecomp d;
    d.grid = A.grid;
    d.dim = A.dim;
    d.offset = first;
    d.n_nonpositive = static_cast<Index>(std::count_if(all.begin(), all.end(), [](double v) { return v <= 0.0; }));
    d.values = all.segment(first, count);
    Mat v = band_eigenvectors(A.matrix, d.values);
    d.residuals.resize(count);
    for (Index k = 0; k < count; ++k) {
        const double lam = d.values[k];
        const double res = (A.matrix.apply(v.col(k)) - lam * v.col(k)).norm() / v.col(k).norm();
        d.residuals[k] = res;
        if (!(res <= 1e-8 * (1.0 + std::fabs(lam)))) {
            std::ostringstream os;
            os << "spectrum: eigenpair " << k << " not certified, residual " << res;
            throw NumericalError(os.str());
        }
    }
    d.vectors = v / std::sqrt(A.grid.h);
    return d;
}

}  // namespace

EigenDecomp spectrum(const DiscreteOperator& A, double a, double b) {
    if (b < a) throw DomainError("spectrum: empty window");
    const Vec all = eigenvalues(A);
    const auto lo = std::lower_bound(all.begin(), all.end(), a) - all.begin();
    const auto hi = std::upper_bound(all.begin(), all.end(), b) - all.begin();
    return decompose(A, all, lo, hi - lo);
}

EigenDecomp spectrum_nearest(const DiscreteOperator& A, Index k) {
    if (k < 1) throw DomainError("spectrum_nearest: need k >= 1");
    const Vec all = eigenvalues(A);
    k = std::min(k, all.size());
    // The k smallest |lambda| form a contiguous run of the sorted list.
    Index lo = std::lower_bound(all.begin(), all.end(), 0.0) - all.begin();
    Index hi = lo;
    while (hi - lo < k) {
        if (lo == 0) ++hi;
        else if (hi == all.size()) --lo;
        else if (std::fabs(all[lo - 1]) <= std::fabs(all[hi])) --lo;
        else ++hi;
    }
    return decompose(A, all, lo, hi - lo);
}

EigenDecomp spectrum_all(const DiscreteOperator& A) {
    const Vec all = eigenvalues(A);
    return decompose(A, all, 0, all.size());
}

double lp_norm(const Vec& z, int dim, double h, double p) {
    if (!(p >= 1.0)) throw DomainError("lp_norm: need p >= 1");
    double s = 0.0;
    for (Index i = 0; i < z.size() / dim; ++i) s += std::pow(z.segment(dim * i, dim).norm(), p);
    return std::pow(h * s, 1.0 / p);
}

double sup_norm(const Vec& z, int dim) {
    double s = 0.0;
    for (Index i = 0; i < z.size() / dim; ++i) s = std::max(s, z.segment(dim * i, dim).norm());
    return s;
}

Norms norms(const Vec& z, const EigenDecomp& decomp, const std::vector<double>& ps) {
    const double h = decomp.grid.h;
    if (z.size() != decomp.vectors.rows()) throw DimensionError("norms: grid function size mismatch");
    Norms out;
    out.l2 = l2_norm(z, h);
    for (double p : ps) out.lp[p] = lp_norm(z, decomp.dim, h, p);
    if (out.l2 == 0.0) return out;
    const Vec c = h * (decomp.vectors.transpose() * z);
    const double covered = c.squaredNorm() / (out.l2 * out.l2);
    if (covered < 1.0 - 1e-8) throw DomainError("norms: insufficient eigenbasis coverage");
    double e2 = 0.0;
    for (Index k = 0; k < c.size(); ++k) e2 += (1.0 + std::fabs(decomp.values[k])) * c[k] * c[k];
    out.e_norm = std::sqrt(e2);
    return out;
}

double tail_mass(const Vec& z, double R, const EigenDecomp& decomp) {
    const Grid& g = decomp.grid;
    if (!(R > 0.0) || !(R < g.T)) throw DomainError("tail_mass: need 0 < R < T");
    const double e = norms(z, decomp).e_norm;
    if (e == 0.0) return 0.0;
    double tail = 0.0;
    for (Index i = 0; i < g.n; ++i)
        if (std::fabs(g.node(i)) > R) tail += g.h * z.segment(decomp.dim * i, decomp.dim).squaredNorm();
    return tail / (e * e);
}

double tail_decay_exponent(const Vec& z, const std::vector<double>& Rs, const EigenDecomp& decomp) {
    std::vector<double> x;
    std::vector<double> y;
    for (double R : Rs) {
        const double m = tail_mass(z, R, decomp);
        if (m > 0.0) {
            x.push_back(std::log(R));
            y.push_back(std::log(m));
        }
    }
    if (x.size() < 2) throw DomainError("tail_decay_exponent: need two radii with nonzero tail");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

}  // namespace homlab
