#include "homlab/linear.hpp"

#include "homlab/index.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace homlab {

namespace {

double spec_norm(const Mat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues()[0]; }

bool integrate(const SymMatFn& B, double T, double h, double t0, double tol, SymplecticPath& out) {
    const int d = B.dim();
    const Mat J = symplectic_J(d);
    const Mat I = Mat::Identity(d, d);
    const auto steps = static_cast<long>(std::ceil(T / h - 1e-9));
    const double hs = T / static_cast<double>(steps);
    out = SymplecticPath{};
    out.h = hs;
    out.times.reserve(static_cast<std::size_t>(steps + 1));
    out.W.reserve(static_cast<std::size_t>(steps + 1));
    out.times.push_back(t0);
    out.W.push_back(I);
    Mat W = I;
    for (long k = 0; k < steps; ++k) {
        const double tm = t0 + (static_cast<double>(k) + 0.5) * hs;
        const Mat K = 0.5 * hs * (J * B(tm));
        W = (I - K).partialPivLu().solve((I + K) * W);
        const double nw = spec_norm(W);
        const double scale = std::max(1.0, nw * nw);
        const double defect = (W.transpose() * J * W - J).norm() / scale;
        const double det_err = std::fabs(W.determinant() - 1.0) / std::max(1.0, std::pow(nw, d));
        if (!std::isfinite(defect)) return false;
        out.defect = std::max(out.defect, defect);
        out.det_error = std::max(out.det_error, det_err);
        if (out.defect > tol) return false;
        out.times.push_back(t0 + static_cast<double>(k + 1) * hs);
        out.W.push_back(W);
    }
    return true;
}

// Orthonormal basis of the column span.
Mat orthonormalize(const Mat& m) {
    if (m.cols() == 0) return m;
    Eigen::HouseholderQR<Mat> qr(m);
    return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

}  // namespace

SymplecticPath fundamental_solution(const SymMatFn& B, double T, double h, double tol_symp, double t0) {
    if (!(h > 0.0)) throw DomainError("fundamental_solution: h must be positive");
    if (!(T > 0.0)) throw DomainError("fundamental_solution: T must be positive");
    if (B.dim() % 2 != 0) throw DimensionError("fundamental_solution: odd dimension");
    SymplecticPath p;
    for (int halvings = 0; halvings <= 6; ++halvings, h *= 0.5)
        if (integrate(B, T, h, t0, tol_symp, p)) return p;
    throw NumericalError("fundamental_solution: symplectic defect above tolerance after 6 halvings");
}

StableSubspace stable_subspace(const SymplecticPath& path, double decay_tol) {
    if (!(decay_tol > 0.0)) throw DomainError("stable_subspace: decay_tol must be positive");
    const Mat& WT = path.final();
    const Index d = WT.rows();
    const Mat J = symplectic_J(static_cast<int>(d));
    Eigen::JacobiSVD<Mat> svd(WT, Eigen::ComputeFullV);
    StableSubspace s;
    s.singular_values = svd.singularValues();
    const Vec& sv = s.singular_values;
    const Mat& V = svd.matrixV();
    const double eps = std::numeric_limits<double>::epsilon();
    Vec eff = sv;  // effective singular values, ascending position matches V columns
    Mat vecs = V;
    if (sv[d - 1] < 100.0 * eps * sv[0]) {
        // Symplectic pairing: sigma_{d-1-k} = 1/sigma_k with right vector J v_k.
        s.paired = true;
        for (Index k = 0; k < d / 2; ++k) {
            eff[d - 1 - k] = 1.0 / sv[k];
            vecs.col(d - 1 - k) = J * V.col(k);
        }
    }
    Index keep = 0;
    for (Index k = 0; k < d; ++k)
        if (eff[k] > decay_tol) ++keep;
    for (Index k = 0; k < d; ++k)
        if (eff[k] > decay_tol && eff[k] < 1e3 * decay_tol) s.inconclusive = true;
    if (keep > 0 && keep < d && eff[keep - 1] / eff[keep] < 1e3) s.inconclusive = true;
    s.dim = static_cast<int>(d - keep);
    s.basis = orthonormalize(vecs.rightCols(s.dim));
    if (s.dim > 0) {
        Eigen::JacobiSVD<Mat> img(WT * s.basis);
        s.certificate = img.singularValues()[0];
        if (s.paired) s.certificate = eff[keep];
    }
    return s;
}

bool j_transversality(const Mat& basis, double tol) {
    if (basis.cols() == 0) return true;
    const Mat J = symplectic_J(static_cast<int>(basis.rows()));
    Mat both(basis.rows(), 2 * basis.cols());
    both << basis, J * basis;
    if (both.cols() > both.rows()) return false;
    Eigen::JacobiSVD<Mat> svd(both);
    const Vec sv = svd.singularValues();
    return sv[sv.size() - 1] > tol * std::max(1.0, sv[0]);
}

bool j_transversality(const StableSubspace& s, double tol) { return j_transversality(s.basis, tol); }

int intersection_dim(const Mat& Q1, const Mat& Q2, double angle_tol) {
    if (Q1.cols() == 0 || Q2.cols() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(Q1.transpose() * Q2);
    int n = 0;
    for (Index k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()[k] >= 1.0 - angle_tol) ++n;
    return n;
}

NullityReport nullity_crosscheck(const SymMatFn& L, const SymMatFn& B, const Grid& grid, const NullityOptions& opts) {
    if (L.dim() != B.dim()) throw DimensionError("nullity_crosscheck: L and B dimensions differ");
    NullityReport r;
    const DiscreteOperator A = assemble(L, grid);
    r.nu_index = relative_index(A, multiplier(B, grid)).nu;
    const double T = std::min(opts.T_ode, grid.T);
    const SymMatFn C(L.dim(), [L, B](double t) { return Mat(B(t) - L(t)); }, "B-L");
    // Backward decay: y(s) = z(-s) solves dy/ds = J (-C(-s)) y.
    const SymMatFn Cb(L.dim(), [C](double s) { return Mat(-C(-s)); }, "-(B-L)(-s)");
    const StableSubspace fw = stable_subspace(fundamental_solution(C, T, opts.h_ode, 1e-8), opts.decay_tol);
    const StableSubspace bw = stable_subspace(fundamental_solution(Cb, T, opts.h_ode, 1e-8), opts.decay_tol);
    r.dim_forward = fw.dim;
    r.dim_backward = bw.dim;
    r.inconclusive = fw.inconclusive || bw.inconclusive;
    r.dim_intersection = intersection_dim(fw.basis, bw.basis, opts.angle_tol);
    r.agree = !r.inconclusive && r.dim_intersection == r.nu_index;
    return r;
}

}  // namespace homlab
