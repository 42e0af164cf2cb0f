#include "homlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace homlab {

Mat symplectic_J(int dim) {
    if (dim < 2 || dim % 2 != 0) throw DimensionError("symplectic_J: dim must be even and >= 2");
    const int n = dim / 2;
    Mat j = Mat::Zero(dim, dim);
    j.topRightCorner(n, n) = -Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
    return j;
}

SymMatFn::SymMatFn(int dim, Fn f, std::string name) : dim_(dim), f_(std::move(f)), name_(std::move(name)) {
    if (dim < 2 || dim % 2 != 0) throw DimensionError("SymMatFn: dim must be even and >= 2");
    if (!f_) throw DomainError("SymMatFn: empty evaluator");
}

SymMatFn SymMatFn::constant(const Mat& m, std::string name) {
    if (m.rows() != m.cols()) throw DimensionError("SymMatFn::constant: matrix not square");
    return SymMatFn(static_cast<int>(m.rows()), [m](double) { return m; }, std::move(name));
}

SymMatFn SymMatFn::scalar(int dim, double c) {
    std::ostringstream os;
    os << c << "*I";
    return constant(c * Mat::Identity(dim, dim), os.str());
}

Mat SymMatFn::operator()(double t) const {
    Mat m = f_(t);
    if (m.rows() != dim_ || m.cols() != dim_) throw DimensionError("SymMatFn: evaluator returned wrong shape");
    const double asym = max_abs(m - m.transpose());
    if (asym > 1e-12 * (1.0 + max_abs(m))) throw DomainError("SymMatFn: evaluation is not symmetric");
    return 0.5 * (m + m.transpose());
}

SymMatFn SymMatFn::scaled(double s) const {
    SymMatFn self = *this;
    return SymMatFn(dim_, [self, s](double t) { return Mat(s * self(t)); }, name_);
}

SymMatFn SymMatFn::plus(const SymMatFn& other) const {
    if (other.dim_ != dim_) throw DimensionError("SymMatFn::plus: dimension mismatch");
    SymMatFn a = *this;
    SymMatFn b = other;
    return SymMatFn(dim_, [a, b](double t) { return Mat(a(t) + b(t)); });
}

SymMatFn SymMatFn::shifted(double s) const {
    SymMatFn self = *this;
    const int d = dim_;
    return SymMatFn(d, [self, s, d](double t) { return Mat(self(t) + s * Mat::Identity(d, d)); }, name_);
}

Potential::Potential(std::string name, int dim, ValueFn value, GradFn grad, HessFn hess, double bound_c, bool even,
                     bool zero_at_origin)
    : name_(std::move(name)),
      dim_(dim),
      value_(std::move(value)),
      grad_(std::move(grad)),
      hess_(std::move(hess)),
      bound_c_(bound_c),
      even_(even),
      zero_at_origin_(zero_at_origin) {
    if (dim < 2 || dim % 2 != 0) throw DimensionError("Potential: dim must be even and >= 2");
    if (!(bound_c > 0.0)) throw DomainError("Potential: bound_c must be positive");
    if (!value_ || !grad_ || !hess_) throw DomainError("Potential: missing evaluator");
}

Potential Potential::with_bound(double c) const {
    Potential p = *this;
    if (!(c > 0.0)) throw DomainError("Potential::with_bound: bound must be positive");
    p.bound_c_ = c;
    return p;
}

Potential Potential::with_name(std::string name) const {
    Potential p = *this;
    p.name_ = std::move(name);
    return p;
}

SymMatFn origin_hessian(const Potential& r) {
    Potential pr = r;
    const int d = r.dim();
    return SymMatFn(d, [pr, d](double t) { return pr.hess(t, Vec::Zero(d)); }, "hess R(t,0)");
}

bool HypothesisReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.pass; });
}

const HypothesisCheck& HypothesisReport::at(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw DomainError("HypothesisReport: no check named " + name);
}

namespace {

double min_eig(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

double spectral_norm(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Records "lhs >= 0 in the semidefinite order" at one sample.
void record_psd(HypothesisCheck& c, const Mat& lhs, double scale) {
    const double lo = min_eig(lhs);
    ++c.samples;
    if (lo < -tol_psd(scale)) c.pass = false;
    c.worst_violation = std::max(c.worst_violation, std::max(0.0, -lo));
}

}  // namespace

SymMatFn split_growth(int N) {
    if (N < 1) throw DomainError("split_growth: N must be positive");
    Mat s = Mat::Identity(2 * N, 2 * N);
    s.bottomRightCorner(N, N) *= -1.0;
    return SymMatFn(2 * N, [s](double t) { return Mat((1.0 + std::fabs(t)) * s); }, "split_growth");
}

SymMatFn scalar_growth(int N) {
    if (N < 1) throw DomainError("scalar_growth: N must be positive");
    return SymMatFn(2 * N, [N](double t) { return Mat((1.0 + std::fabs(t)) * Mat::Identity(2 * N, 2 * N)); },
                    "scalar_growth");
}

HypothesisReport validate_L1(const SymMatFn& L, const L1Witness& w, const std::vector<double>& sample_times) {
    if (sample_times.empty()) throw DomainError("validate_L1: empty sample set");
    if (w.P.rows() != L.dim() || w.P.cols() != L.dim()) throw DimensionError("validate_L1: P and L dimensions differ");
    HypothesisReport rep;
    HypothesisCheck c{"L1", true, 0.0, 0};
    const int d = L.dim();
    for (double t : sample_times) {
        if (std::fabs(t) < w.t0) continue;
        const Mat pl = w.P * L(t);
        const Mat sym = 0.5 * (pl + pl.transpose());
        record_psd(c, sym - w.c * std::pow(std::fabs(t), w.alpha) * Mat::Identity(d, d), max_abs(sym));
    }
    if (c.samples == 0) throw DomainError("validate_L1: no sample time with |t| >= t0");
    rep.checks.push_back(c);
    std::ostringstream os;
    os << sample_times.size() << " times, " << c.samples << " with |t| >= " << w.t0;
    rep.sample_set = os.str();
    return rep;
}

std::optional<std::size_t> find_l1_witness(const SymMatFn& L, const std::vector<Mat>& candidates, double c,
                                           double alpha, double t0, const std::vector<double>& sample_times) {
    for (std::size_t k = 0; k < candidates.size(); ++k)
        if (validate_L1(L, L1Witness{candidates[k], c, alpha, t0}, sample_times).pass()) return k;
    return std::nullopt;
}

HypothesisReport validate_R(const Potential& R, const std::vector<SamplePoint>& samples,
                            const std::optional<Asymptotic>& asymptotic) {
    if (samples.empty()) throw DomainError("validate_R: empty sample set");
    HypothesisReport rep;
    HypothesisCheck r1{"R1", true, 0.0, 0};
    HypothesisCheck r0{"R0", true, 0.0, 0};
    HypothesisCheck even{"even", true, 0.0, 0};
    HypothesisCheck asym{"R_inf", true, 0.0, 0};
    const int d = R.dim();
    for (const auto& [t, z] : samples) {
        if (z.size() != d) throw DimensionError("validate_R: sample point has wrong dimension");
        const Mat h = R.hess(t, z);
        const double nrm = spectral_norm(h);
        ++r1.samples;
        if (nrm > R.bound_c() + tol_psd(R.bound_c())) r1.pass = false;
        r1.worst_violation = std::max(r1.worst_violation, std::max(0.0, nrm - R.bound_c()));
        if (R.zero_at_origin()) {
            const double g0 = R.grad(t, Vec::Zero(d)).norm();
            ++r0.samples;
            if (g0 > 1e-12) r0.pass = false;
            r0.worst_violation = std::max(r0.worst_violation, g0);
        }
        if (R.even()) {
            const double v = R.value(t, z);
            const double diff = std::fabs(R.value(t, -z) - v);
            ++even.samples;
            if (diff > 1e-12 * (1.0 + std::fabs(v))) even.pass = false;
            even.worst_violation = std::max(even.worst_violation, diff);
        }
        if (asymptotic) {
            std::visit(
                [&](const auto& a) {
                    using A = std::decay_t<decltype(a)>;
                    if (z.norm() <= a.R0) return;
                    if constexpr (std::is_same_v<A, Sandwich>) {
                        record_psd(asym, h - a.B1(t), max_abs(h));
                        record_psd(asym, a.B2(t) - h, max_abs(h));
                    } else {
                        const Mat diff = h - a.B_inf(t);
                        record_psd(asym, a.side == Side::plus ? diff : Mat(-diff), max_abs(h));
                    }
                },
                *asymptotic);
        }
    }
    rep.checks.push_back(r1);
    if (R.zero_at_origin()) rep.checks.push_back(r0);
    if (R.even()) rep.checks.push_back(even);
    if (asymptotic) rep.checks.push_back(asym);
    std::ostringstream os;
    os << samples.size() << " (t,z) points";
    rep.sample_set = os.str();
    return rep;
}

FiniteDiffReport finite_diff_consistency(const Potential& R, const std::vector<SamplePoint>& pts, double h) {
    if (!(h > 0.0)) throw DomainError("finite_diff_consistency: step must be positive");
    FiniteDiffReport rep;
    const int d = R.dim();
    for (const auto& [t, z] : pts) {
        const Vec g = R.grad(t, z);
        const Mat hs = R.hess(t, z);
        if (!g.allFinite() || !hs.allFinite() || !std::isfinite(R.value(t, z)))
            throw NumericalError("finite_diff_consistency: non-finite evaluation");
        Vec gfd(d);
        Mat hfd(d, d);
        for (int k = 0; k < d; ++k) {
            Vec zp = z;
            Vec zm = z;
            zp[k] += h;
            zm[k] -= h;
            gfd[k] = (R.value(t, zp) - R.value(t, zm)) / (2.0 * h);
            hfd.col(k) = (R.grad(t, zp) - R.grad(t, zm)) / (2.0 * h);
        }
        if (!gfd.allFinite() || !hfd.allFinite()) throw NumericalError("finite_diff_consistency: non-finite evaluation");
        rep.grad_error = std::max(rep.grad_error, (g - gfd).norm() / (1.0 + g.norm()));
        rep.hess_error = std::max(rep.hess_error, (hs - hfd).norm() / (1.0 + hs.norm()));
    }
    return rep;
}

std::vector<SamplePoint> sample_lattice(int dim, const std::vector<double>& times, const std::vector<double>& radii,
                                        int directions, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<Vec> dirs;
    for (int k = 0; k < directions; ++k) {
        Vec u(dim);
        for (int i = 0; i < dim; ++i) u[i] = gauss(rng);
        dirs.push_back(u.normalized());
    }
    std::vector<SamplePoint> pts;
    for (double t : times)
        for (double r : radii)
            for (const auto& u : dirs) pts.emplace_back(t, r * u);
    return pts;
}

}  // namespace homlab
