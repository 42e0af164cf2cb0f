#include "homlab/index.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace homlab {

namespace {

Inertia count(const Vec& w, double tol) {
    Inertia in;
    for (Index k = 0; k < w.size(); ++k) {
        if (w[k] < -tol) ++in.minus;
        else if (w[k] > tol) ++in.plus;
        else ++in.zero;
    }
    return in;
}

double radius(const Vec& w) { return w.size() ? w.cwiseAbs().maxCoeff() : 0.0; }

Vec dense_values(const Mat& m) {
    if (m.rows() != m.cols()) throw DimensionError("inertia: matrix not square");
    if (m.size() == 0) return Vec();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

Inertia inertia_of_values(const Vec& w, double tol_null) {
    if (tol_null < 0.0) tol_null = default_tol_null(radius(w));
    Inertia in = count(w, tol_null);
    const Inertia fine = count(w, 0.1 * tol_null);
    in.stable = fine.minus == in.minus && fine.zero == in.zero && fine.plus == in.plus;
    return in;
}

Inertia inertia(const Mat& m, double tol_null) { return inertia_of_values(dense_values(m), tol_null); }

Inertia inertia(const BandedSym& m, double tol_null) { return inertia_of_values(band_eigenvalues(m), tol_null); }

IndexPair relative_index(const Inertia& ia, const BandedSym& a_minus_b, double tol_null) {
    const Inertia iab = inertia(a_minus_b, tol_null);
    return IndexPair{iab.minus - ia.minus, iab.zero, ia.stable && iab.stable};
}

IndexPair relative_index(const DiscreteOperator& A, const DiscreteOperator& B, double tol_null) {
    if (A.size() != B.size()) throw DimensionError("relative_index: operators on different grids");
    const Vec wa = band_eigenvalues(A.matrix);
    const Vec wab = band_eigenvalues((A - B).matrix);
    if (tol_null < 0.0) tol_null = default_tol_null(std::max(radius(wa), radius(wab)));
    const Inertia ia = inertia_of_values(wa, tol_null);
    const Inertia iab = inertia_of_values(wab, tol_null);
    return IndexPair{iab.minus - ia.minus, iab.zero, ia.stable && iab.stable};
}

IndexPair relative_index(const Mat& A, const Mat& B, double tol_null) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) throw DimensionError("relative_index: size mismatch");
    const Vec wa = dense_values(A);
    const Vec wab = dense_values(A - B);
    if (tol_null < 0.0) tol_null = default_tol_null(std::max(radius(wa), radius(wab)));
    const Inertia ia = inertia_of_values(wa, tol_null);
    const Inertia iab = inertia_of_values(wab, tol_null);
    return IndexPair{iab.minus - ia.minus, iab.zero, ia.stable && iab.stable};
}

FlowPath linear_pencil(const Mat& A, const Mat& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) throw DimensionError("linear_pencil: size mismatch");
    return FlowPath{[A, B](double th) { return Mat(A - th * B); }};
}

namespace {

struct Sample {
    double th;
    Vec w;
    Mat v;
};

class FlowScanner {
public:
    explicit FlowScanner(const FlowPath& p) : path_(p) {}

    Sample sample(double th) const {
        Mat f = path_.eval(th);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (f + f.transpose()));
        return Sample{th, es.eigenvalues(), es.eigenvectors()};
    }

    // dF/dtheta by central differences, one-sided second order at the ends.
    Mat derivative(double th) const {
        const Mat f = path_.eval(th);
        const double d = std::min(1e-5 * (1.0 + max_abs(f)), 1e-3);
        if (th - d >= 0.0 && th + d <= 1.0) return (path_.eval(th + d) - path_.eval(th - d)) / (2.0 * d);
        if (th + 2.0 * d <= 1.0) return (-3.0 * f + 4.0 * path_.eval(th + d) - path_.eval(th + 2.0 * d)) / (2.0 * d);
        return (3.0 * f - 4.0 * path_.eval(th - d) + path_.eval(th - 2.0 * d)) / (2.0 * d);
    }

    // Crossing operator restricted to the eigenvectors with |lambda| <= ktol.
    Mat crossing_operator(const Sample& s, double ktol) const {
        std::vector<Index> idx;
        for (Index k = 0; k < s.w.size(); ++k)
            if (std::fabs(s.w[k]) <= ktol) idx.push_back(k);
        Mat u(s.v.rows(), static_cast<Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) u.col(static_cast<Index>(j)) = s.v.col(idx[j]);
        const Mat dF = derivative(s.th);
        return u.transpose() * dF * u;
    }

private:
    const FlowPath& path_;
};

int n_minus(const Vec& w, double tol) {
    return static_cast<int>(std::count_if(w.begin(), w.end(), [tol](double v) { return v < -tol; }));
}

struct Signature {
    int plus = 0;
    int minus = 0;
    bool regular = true;
};

Signature signature_of(const Mat& c, double scale) {
    Signature s;
    if (c.size() == 0) return s;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
    const double cut = 1e-6 * (1.0 + scale);
    for (Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double e = es.eigenvalues()[k];
        if (e > cut) ++s.plus;
        else if (e < -cut) ++s.minus;
        else s.regular = false;
    }
    return s;
}

FlowResult flow_once(const FlowPath& path, int steps, double tol) {
    FlowResult res;
    const FlowScanner scan(path);
    const Sample s0 = scan.sample(0.0);
    const Sample s1 = scan.sample(1.0);
    if (tol < 0.0) tol = default_tol_null(std::max(radius(s0.w), radius(s1.w)));

    const double lip = 1.5 * std::max({radius(dense_values(scan.derivative(0.0))),
                                       radius(dense_values(scan.derivative(0.5))),
                                       radius(dense_values(scan.derivative(1.0)))});
    const double dscale = lip;

    // Endpoint kernels use the printed endpoint terms.
    int cnt0 = n_minus(s0.w, tol);
    int cnt1 = n_minus(s1.w, tol);
    int z0 = 0;
    int z1 = 0;
    for (Index k = 0; k < s0.w.size(); ++k) z0 += std::fabs(s0.w[k]) <= tol;
    for (Index k = 0; k < s1.w.size(); ++k) z1 += std::fabs(s1.w[k]) <= tol;
    if (z0 > 0) {
        const Signature sg = signature_of(scan.crossing_operator(s0, tol), dscale);
        res.regular = res.regular && sg.regular;
        res.sf -= sg.minus;
        cnt0 += sg.minus;  // count just after theta = 0
        res.crossings.push_back(Crossing{0.0, z0, sg.plus - sg.minus, true});
        res.endpoint_terms = true;
    }
    if (z1 > 0) {
        const Signature sg = signature_of(scan.crossing_operator(s1, tol), dscale);
        res.regular = res.regular && sg.regular;
        res.sf += sg.plus;
        cnt1 += sg.plus;  // count just before theta = 1
        res.crossings.push_back(Crossing{1.0, z1, sg.plus - sg.minus, true});
        res.endpoint_terms = true;
    }

    auto cnt = [&](const Sample& s) {
        if (s.th == 0.0) return cnt0;
        if (s.th == 1.0) return cnt1;
        return n_minus(s.w, tol);
    };
    // Could an eigenvalue reach zero between a and b? Endpoint kernels excluded.
    auto near_zero = [&](const Sample& a, const Sample& b) {
        const double reach = lip * (b.th - a.th);
        for (const Sample* s : {&a, &b})
            for (Index k = 0; k < s->w.size(); ++k) {
                const double v = std::fabs(s->w[k]);
                const bool end_kernel = (s->th == 0.0 || s->th == 1.0) && v <= tol;
                if (!end_kernel && v <= reach) return true;
            }
        return false;
    };

    const double w_min = 1e-11;
    std::function<void(const Sample&, const Sample&, int)> recurse = [&](const Sample& a, const Sample& b, int depth) {
        const int ca = cnt(a);
        const int cb = cnt(b);
        const bool change = ca != cb;
        if (!change && !(near_zero(a, b) && depth < 4)) return;
        const double w = b.th - a.th;
        if (change && (depth >= 40 || w <= w_min)) {
            const Sample m = scan.sample(0.5 * (a.th + b.th));
            // The tracked eigenvalue sits within w * lip of -tol or +tol.
            const double ktol = tol + 4.0 * w * lip;
            const Mat c = scan.crossing_operator(m, ktol);
            const Signature sg = signature_of(c, dscale);
            const int sig = sg.plus - sg.minus;
            res.regular = res.regular && sg.regular && sig == ca - cb;
            res.sf += sig;
            res.crossings.push_back(Crossing{m.th, static_cast<int>(c.rows()), sig, false});
            return;
        }
        if (!change && w <= w_min) return;
        const Sample m = scan.sample(0.5 * (a.th + b.th));
        recurse(a, m, depth + 1);
        recurse(m, b, depth + 1);
    };

    Sample prev = s0;
    for (int k = 1; k <= steps; ++k) {
        const Sample cur = k == steps ? s1 : scan.sample(static_cast<double>(k) / steps);
        recurse(prev, cur, 0);
        prev = cur;
    }
    std::sort(res.crossings.begin(), res.crossings.end(),
              [](const Crossing& x, const Crossing& y) { return x.theta < y.theta; });
    return res;
}

Vec endpoint_values(const FlowPath& p, double th) {
    const Mat f = p.eval(th);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (f + f.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double smallest_nonzero(const Vec& w, double tol) {
    double best = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < w.size(); ++k)
        if (std::fabs(w[k]) > tol) best = std::min(best, std::fabs(w[k]));
    return best;
}

}  // namespace

FlowPath regularize(const FlowPath& path, double eps) {
    if (eps < 0.0) throw DomainError("regularize: eps must be nonnegative");
    if (eps == 0.0) return path;
    const Vec w0 = endpoint_values(path, 0.0);
    const Vec w1 = endpoint_values(path, 1.0);
    const double tol = default_tol_null(std::max(radius(w0), radius(w1)));
    const double gap = std::min(smallest_nonzero(w0, tol), smallest_nonzero(w1, tol));
    if (!(eps < 0.5 * gap)) throw DomainError("regularize: eps exceeds half the smallest endpoint eigenvalue");
    FlowPath p = path;
    p.eval = [inner = path.eval, eps](double th) {
        Mat f = inner(th);
        f.diagonal().array() += eps;
        return f;
    };
    return p;
}

FlowResult spectral_flow(const FlowPath& path, int steps, double tol_null) {
    if (steps < 0) steps = path.steps;
    if (steps < 2) throw DomainError("spectral_flow: need steps >= 2");
    FlowResult res = flow_once(path, steps, tol_null);
    if (res.regular) return res;
    // Non-regular crossing: shift the path by a small multiple of the identity.
    const Vec w0 = endpoint_values(path, 0.0);
    const Vec w1 = endpoint_values(path, 1.0);
    const double rho = std::max(radius(w0), radius(w1));
    const double tol = tol_null < 0.0 ? default_tol_null(rho) : tol_null;
    const double gap = std::min(smallest_nonzero(w0, tol), smallest_nonzero(w1, tol));
    double eps = std::min(0.25 * gap, 1e-4 * (1.0 + rho));
    for (int attempt = 0; attempt < 4; ++attempt, eps /= 7.0) {
        FlowResult r = flow_once(regularize(path, eps), steps, tol_null);
        r.regularization = eps;
        if (r.regular) return r;
        res = r;
    }
    return res;
}

int monotone_count(const Mat& A, const Mat& B, double tol_null) {
    if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
        throw DimensionError("monotone_count: size mismatch");
    const Vec wb = dense_values(B);
    if (tol_null < 0.0) tol_null = default_tol_null(std::max(radius(dense_values(A)), radius(wb)));
    if (wb.size() && wb[0] <= tol_null) throw DomainError("monotone_count: B must be positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(0.5 * (A + A.transpose()), 0.5 * (B + B.transpose()),
                                                     Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success) throw NumericalError("monotone_count: generalized eigensolve failed");
    const double tol_theta = tol_null / wb[0];
    int c = 0;
    for (Index k = 0; k < ges.eigenvalues().size(); ++k) {
        const double th = ges.eigenvalues()[k];
        if (th >= -tol_theta && th < 1.0 - tol_theta) ++c;
    }
    return c;
}

}  // namespace homlab
