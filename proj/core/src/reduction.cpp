#include "homlab/reduction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace homlab {

BetaChoice choose_beta(double C_R, double gamma, const Vec& eigenvalues, double tol_gap) {
    std::vector<double> a(eigenvalues.size());
    for (Index k = 0; k < eigenvalues.size(); ++k) a[static_cast<std::size_t>(k)] = std::fabs(eigenvalues[k]);
    std::sort(a.begin(), a.end());
    const double rho = a.empty() ? 0.0 : a.back();
    // The midpoint then sits more than 2 tol_null from both ends, the margin ReducedProblem demands.
    if (tol_gap < 0.0) tol_gap = 4.0 * default_tol_null(rho);
    BetaChoice bc;
    bc.threshold = std::max(2.0 * (C_R + 1.0), 2.0 * (gamma + 1.0));
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
        if (a[k] < bc.threshold) continue;
        if (a[k + 1] - a[k] <= tol_gap) continue;
        bc.gap_lo = a[k];
        bc.gap_hi = a[k + 1];
        bc.beta = 0.5 * (a[k] + a[k + 1]);
        return bc;
    }
    throw DomainError("choose_beta: no gap above the threshold inside the computed window");
}

ReducedProblem::ReducedProblem(DiscreteOperator A, Potential R, double beta, double eps)
    : A_(std::move(A)), R_(std::move(R)), beta_(beta), eps_(eps) {
    if (R_.dim() != A_.dim) throw DimensionError("ReducedProblem: potential and operator dimensions differ");
    if (!(beta_ > 0.0)) throw DomainError("ReducedProblem: beta must be positive");
    const Vec all = band_eigenvalues(A_.matrix);
    const double rho = all.size() ? all.cwiseAbs().maxCoeff() : 0.0;
    tol_null_ = default_tol_null(rho);
    inertia_A_ = inertia_of_values(all, tol_null_);
    double nearest = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < all.size(); ++k) {
        if (std::fabs(std::fabs(all[k]) - beta_) <= 2.0 * tol_null_)
            throw DomainError("ReducedProblem: beta lies on the spectrum");
        if (std::fabs(all[k]) > tol_null_) nearest = std::min(nearest, std::fabs(all[k]));
    }
    if (eps_ < 0.0) eps_ = std::min(0.5 * nearest, 1e-3);
    for (Index k = 0; k < all.size(); ++k)
        if (std::fabs(all[k] + eps_) <= tol_null_) throw DomainError("ReducedProblem: -eps collides with an eigenvalue");

    const auto lo = std::lower_bound(all.begin(), all.end(), -beta_) - all.begin();
    const auto hi = std::upper_bound(all.begin(), all.end(), beta_) - all.begin();
    if (hi <= lo) throw DomainError("ReducedProblem: X0 is empty");
    lambda0_ = all.segment(lo, hi - lo);
    V0_ = band_eigenvectors(A_.matrix, lambda0_);
    for (Index k = 0; k < lambda0_.size(); ++k) {
        const double res = (A_.matrix.apply(V0_.col(k)) - lambda0_[k] * V0_.col(k)).norm();
        if (!(res <= 1e-8 * (1.0 + std::fabs(lambda0_[k])))) throw NumericalError("ReducedProblem: X0 eigenvector not certified");
        if (lambda0_[k] < -tol_null_) ++dim_eminus_;
    }
    V0_ /= std::sqrt(A_.grid.h);
    lu_eps_ = BandedLU(A_.matrix.shifted(eps_));
    if (lu_eps_.singular()) throw NumericalError("ReducedProblem: A + eps I is singular");
    times_ = A_.grid.nodes();
}

ReducedProblem ReducedProblem::with_potential(Potential R) const {
    if (R.dim() != A_.dim) throw DimensionError("ReducedProblem: potential and operator dimensions differ");
    ReducedProblem out = *this;
    out.R_ = std::move(R);
    return out;
}

Vec ReducedProblem::grad_field(const Vec& z) const {
    const int d = dim();
    Vec g(z.size());
    for (Index i = 0; i < grid().n; ++i) g.segment(d * i, d) = R_.grad(times_[static_cast<std::size_t>(i)], z.segment(d * i, d));
    return g;
}

double ReducedProblem::phi(const Vec& z) const {
    const int d = dim();
    double s = 0.0;
    for (Index i = 0; i < grid().n; ++i) s += R_.value(times_[static_cast<std::size_t>(i)], z.segment(d * i, d));
    return h() * s;
}

std::vector<Mat> ReducedProblem::hess_blocks(const Vec& z) const {
    const int d = dim();
    std::vector<Mat> out;
    out.reserve(static_cast<std::size_t>(grid().n));
    for (Index i = 0; i < grid().n; ++i) out.push_back(R_.hess(times_[static_cast<std::size_t>(i)], z.segment(d * i, d)));
    return out;
}

ReducedProblem build_reduction(const DiscreteOperator& A, const Potential& R, double beta, double eps) {
    return ReducedProblem(A, R, beta, eps);
}

AuxiliarySolution auxiliary_solve(const ReducedProblem& rp, const Vec& x, const Vec* warm, double tol, int max_iter) {
    if (x.size() != rp.d0()) throw DimensionError("auxiliary_solve: x has wrong dimension");
    if (!x.allFinite()) throw DomainError("auxiliary_solve: x is not finite");
    const double h = rp.h();
    const double xn = x.norm();  // L2 norm of the embedded x
    if (tol < 0.0) tol = 1e-10 * (1.0 + xn);
    AuxiliarySolution s;
    s.x = x;
    const Vec xg = rp.embed(x);
    Vec w = warm ? *warm : Vec::Zero(xg.size());
    double prev = -1.0;
    int bad = 0;
    const double floor = 1e-13 * (1.0 + xn);
    for (int k = 1; k <= max_iter; ++k) {
        const Vec z = xg + w;
        const Vec wn = rp.solve_perp(rp.grad_field(z) + rp.eps() * w);
        const double upd = l2_norm(wn - w, h);
        w = wn;
        s.iterations = k;
        s.update_norm = upd;
        if (prev > 0.0 && prev > floor) {
            const double ratio = upd / prev;
            s.contraction = std::max(s.contraction, ratio);
            bad = ratio >= 1.0 ? bad + 1 : 0;
            if (bad >= 5) {
                std::ostringstream os;
                os << "auxiliary_solve: no contraction over 5 iterations (ratio " << ratio << "); beta " << rp.beta()
                   << " is too small";
                throw ConvergenceError(os.str());
            }
        }
        prev = upd;
        if (upd < tol) break;
    }
    if (!(s.update_norm < tol)) throw ConvergenceError("auxiliary_solve: iteration limit reached");
    s.z_perp = w;
    s.z = xg + w;
    s.residual = l2_norm(rp.project_perp(rp.A().matrix.apply(s.z) - rp.grad_field(s.z)), h);
    return s;
}

double a_value(const ReducedProblem& rp, const AuxiliarySolution& aux) {
    return 0.5 * rp.h() * rp.A().matrix.quad(aux.z) - rp.phi(aux.z);
}

Vec a_grad(const ReducedProblem& rp, const AuxiliarySolution& aux) {
    return rp.lambda0().cwiseProduct(aux.x) - rp.coords(rp.grad_field(aux.z));
}

double a_value(const ReducedProblem& rp, const Vec& x) { return a_value(rp, auxiliary_solve(rp, x)); }

Vec a_grad(const ReducedProblem& rp, const Vec& x) { return a_grad(rp, auxiliary_solve(rp, x)); }

Mat a_hess(const ReducedProblem& rp, const Vec& x) {
    const Index d0 = rp.d0();
    const AuxiliarySolution base = auxiliary_solve(rp, x, nullptr, 1e-13 * (1.0 + x.norm()));
    const double step = 1e-5 * (1.0 + x.norm());
    const double tol = 1e-13 * (1.0 + x.norm());
    Mat H(d0, d0);
    for (Index j = 0; j < d0; ++j) {
        Vec xp = x;
        Vec xm = x;
        xp[j] += step;
        xm[j] -= step;
        const Vec gp = a_grad(rp, auxiliary_solve(rp, xp, &base.z_perp, tol));
        const Vec gm = a_grad(rp, auxiliary_solve(rp, xm, &base.z_perp, tol));
        H.col(j) = (gp - gm) / (2.0 * step);
    }
    return 0.5 * (H + H.transpose());
}

namespace {

BandedLU linearization(const ReducedProblem& rp, const AuxiliarySolution& aux) {
    const DiscreteOperator D = multiplier(rp.hess_blocks(aux.z), rp.grid());
    BandedLU lu((rp.A() - D).matrix);
    if (lu.singular()) throw NumericalError("linearization A - hess R(z) is singular");
    return lu;
}

}  // namespace

Mat a_hess_schur(const ReducedProblem& rp, const AuxiliarySolution& aux) {
    const BandedLU lu = linearization(rp, aux);
    const Mat G = rp.h() * (rp.V0().transpose() * lu.solve(rp.V0()));
    const Mat Gs = 0.5 * (G + G.transpose());
    const Mat H = Gs.ldlt().solve(Mat::Identity(Gs.rows(), Gs.cols()));
    return 0.5 * (H + H.transpose());
}

Vec newton_direction(const ReducedProblem& rp, const AuxiliarySolution& aux, const Vec& g) {
    const BandedLU lu = linearization(rp, aux);
    return -rp.coords(lu.solve(rp.embed(g)));
}

SplitNorms split_norms(const ReducedProblem& rp, const EigenDecomp& full, const AuxiliarySolution& aux) {
    if (full.vectors.rows() != aux.z_perp.size()) throw DimensionError("split_norms: decomposition size mismatch");
    if (full.size() != full.vectors.rows()) throw DomainError("split_norms: need the full eigendecomposition");
    const Vec c = rp.h() * (full.vectors.transpose() * aux.z_perp);
    SplitNorms s;
    for (Index k = 0; k < c.size(); ++k) {
        const double lam = full.values[k];
        const double c2 = c[k] * c[k];
        if (lam > rp.beta()) {
            s.u_plus += std::fabs(lam + rp.eps()) * c2;
            s.z_plus_E += (1.0 + std::fabs(lam)) * c2;
        } else if (lam < -rp.beta()) {
            s.u_minus += std::fabs(lam + rp.eps()) * c2;
            s.z_minus_E += (1.0 + std::fabs(lam)) * c2;
        }
    }
    s.u_plus = std::sqrt(s.u_plus);
    s.u_minus = std::sqrt(s.u_minus);
    s.z_plus_E = std::sqrt(s.z_plus_E);
    s.z_minus_E = std::sqrt(s.z_minus_E);
    return s;
}

SplitNorms split_norms(const ReducedProblem& rp, const AuxiliarySolution& aux, double tol, int max_steps) {
    const Vec& w = aux.z_perp;
    SplitNorms s;
    const double wn = w.norm();
    if (wn == 0.0) return s;
    const Index n = w.size();
    const int kmax = static_cast<int>(std::min<Index>(n, max_steps));
    const BandedSym& A = rp.A().matrix;
    const double scale = rp.h() * wn * wn;

    // Lanczos with full reorthogonalization; Gauss quadrature weights are the
    // squared first components of the eigenvectors of T.
    Mat Q(n, kmax);
    std::vector<double> alpha;
    std::vector<double> beta;
    Q.col(0) = w / wn;
    std::array<double, 4> prev{-1.0, -1.0, -1.0, -1.0};
    for (int k = 0; k < kmax; ++k) {
        Vec v = A.apply(Q.col(k));
        alpha.push_back(Q.col(k).dot(v));
        for (int pass = 0; pass < 2; ++pass) v -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * v);
        const double b = v.norm();
        const bool breakdown = b <= 1e-13 * (1.0 + std::fabs(alpha.back()));  // Krylov space is invariant
        const bool exhausted = k + 1 == kmax;
        if (breakdown || exhausted || (k + 1) % 10 == 0) {
            const int m = k + 1;
            Mat T = Mat::Zero(m, m);
            for (int i = 0; i < m; ++i) T(i, i) = alpha[static_cast<std::size_t>(i)];
            for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
            Eigen::SelfAdjointEigenSolver<Mat> es(T);
            std::array<double, 4> q{0.0, 0.0, 0.0, 0.0};
            for (int i = 0; i < m; ++i) {
                const double th = es.eigenvalues()[i];
                const double wt = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
                const int side = th > 0.0 ? 0 : 1;
                q[static_cast<std::size_t>(side)] += std::fabs(th + rp.eps()) * wt;
                q[static_cast<std::size_t>(2 + side)] += (1.0 + std::fabs(th)) * wt;
            }
            bool done = breakdown;
            if (!done && prev[0] >= 0.0) {
                done = true;
                const double ref = tol * (1.0 + q[2] + q[3]);
                for (std::size_t j = 0; j < 4; ++j)
                    if (std::fabs(q[j] - prev[j]) > ref) done = false;
            }
            prev = q;
            if (done) {
                s.u_plus = std::sqrt(scale * q[0]);
                s.u_minus = std::sqrt(scale * q[1]);
                s.z_plus_E = std::sqrt(scale * q[2]);
                s.z_minus_E = std::sqrt(scale * q[3]);
                return s;
            }
        }
        if (exhausted) break;
        beta.push_back(b);
        Q.col(k + 1) = v / b;
    }
    throw ConvergenceError("split_norms: Lanczos quadrature did not settle");
}

double lemma22_bound(double beta, double C_R, double eps, double c) {
    const double den = beta - 2.0 * C_R - 3.0 * eps;
    if (!(den > 0.0)) throw DomainError("lemma22_bound: beta too small for the estimate");
    return 2.0 * std::sqrt(beta) * (C_R + c) / den;
}

}  // namespace homlab
