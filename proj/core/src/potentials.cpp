#include "homlab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homlab {

double eta(double s) {
    if (s < 0.0) throw DomainError("eta: negative argument");
    if (s < 1.0) return 0.0;
    if (s < 2.0) {
        const double u = s - 1.0;
        return (2.0 / 9.0) * u * u * u - (1.0 / 9.0) * u * u * u * u;
    }
    return 1.0 - 128.0 / (9.0 * (12.0 + s * s));
}

double eta_d1(double s) {
    if (s < 0.0) throw DomainError("eta_d1: negative argument");
    if (s < 1.0) return 0.0;
    if (s < 2.0) {
        const double u = s - 1.0;
        return (2.0 / 3.0) * u * u - (4.0 / 9.0) * u * u * u;
    }
    const double q = 12.0 + s * s;
    return 256.0 * s / (9.0 * q * q);
}

double eta_d2(double s) {
    if (s < 0.0) throw DomainError("eta_d2: negative argument");
    if (s < 1.0) return 0.0;
    if (s < 2.0) {
        const double u = s - 1.0;
        return (4.0 / 3.0) * u - (4.0 / 3.0) * u * u;
    }
    const double q = 12.0 + s * s;
    return 256.0 * (12.0 - 3.0 * s * s) / (9.0 * q * q * q);
}

EtaFns standard_eta() {
    return EtaFns{[](double s) { return eta(s); }, [](double s) { return eta_d1(s); }, [](double s) { return eta_d2(s); }};
}

Potential radial_potential(std::string name, int dim, RadialProfile profile, double bound_c, bool zero_at_origin) {
    auto value = [profile](double, const Vec& z) { return profile(z.norm())[0]; };
    auto grad = [profile](double, const Vec& z) { return Vec(profile(z.norm())[1] * z); };
    auto hess = [profile, dim](double, const Vec& z) {
        const double r = z.norm();
        const auto p = profile(r);
        Mat h = p[1] * Mat::Identity(dim, dim);
        if (r > 0.0) h += ((p[2] - p[1]) / (r * r)) * (z * z.transpose());
        return h;
    };
    return Potential(std::move(name), dim, value, grad, hess, bound_c, true, zero_at_origin);
}

double radial_hessian_bound(const RadialProfile& profile, double r_max, int samples) {
    double best = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double r = r_max * k / (samples - 1);
        const auto p = profile(r);
        best = std::max({best, std::fabs(p[1]), std::fabs(p[2])});
    }
    return best;
}

Potential quadratic(const SymMatFn& B, double bound_c) {
    SymMatFn b = B;
    return Potential(
        "quadratic", B.dim(), [b](double t, const Vec& z) { return 0.5 * z.dot(b(t) * z); },
        [b](double t, const Vec& z) { return Vec(b(t) * z); }, [b](double t, const Vec&) { return b(t); }, bound_c,
        true);
}

Potential quadratic_scalar(int dim, double b) {
    return quadratic(SymMatFn::scalar(dim, b), std::max(std::fabs(b), 1e-300)).with_name("quadratic");
}

Potential saturating(int dim, double a, double b) {
    if (b < 0.0) throw DomainError("saturating: b must be nonnegative");
    RadialProfile prof = [a, b](double r) {
        const double q = std::sqrt(1.0 + r * r);
        return std::array<double, 3>{0.5 * a * r * r + b * (q - 1.0), a + b / q, a + b / (q * q * q)};
    };
    return radial_potential("saturating", dim, prof, std::max(std::fabs(a), std::fabs(a + b)));
}

Potential quartic(int dim, double declared_bound) {
    RadialProfile prof = [](double r) { return std::array<double, 3>{r * r * r * r, 4.0 * r * r, 12.0 * r * r}; };
    return radial_potential("quartic", dim, prof, declared_bound);
}

namespace {

// Smoothstep S(x) = 6x^5 - 15x^4 + 10x^3 and its derivatives on [0,1].
std::array<double, 3> smoothstep(double x) {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    const double x2 = x * x;
    return {x2 * x * (10.0 - 15.0 * x + 6.0 * x2), 30.0 * x2 * (1.0 - x) * (1.0 - x), 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)};
}

RadialProfile blended_profile(double B0, double Binf, double r1, double r2) {
    return [=](double r) {
        const double w = r2 - r1;
        const auto s = smoothstep((r - r1) / w);
        // b(r) = B0 delta + Binf (1 - delta) with delta = 1 - S.
        const double db = Binf - B0;
        const double b = B0 + db * s[0];
        const double b1 = db * s[1] / w;
        const double b2 = db * s[2] / (w * w);
        return std::array<double, 3>{0.5 * b * r * r, b + 0.5 * b1 * r, b + 2.0 * b1 * r + 0.5 * b2 * r * r};
    };
}

}  // namespace

double smooth_delta(double r, double r1, double r2) {
    if (!(r2 > r1)) throw DomainError("smooth_delta: radii must increase");
    return 1.0 - smoothstep((r - r1) / (r2 - r1))[0];
}

Potential blended_quadratic(int dim, double B0, double Binf, double r1, double r2) {
    if (!(r2 > r1) || r1 < 0.0) throw DomainError("blended_quadratic: need 0 <= r1 < r2");
    RadialProfile prof = blended_profile(B0, Binf, r1, r2);
    double c = radial_hessian_bound(prof, r2 * 1.01, 40001);
    c = std::max({c, std::fabs(B0), std::fabs(Binf), 1e-300});
    std::ostringstream os;
    os << "remark13(B0=" << B0 << ",Binf=" << Binf << ")";
    return radial_potential(os.str(), dim, prof, c);
}

Remark13Example remark13_example(const std::vector<double>& spectrum, int l, int i, int dim,
                                 std::pair<double, double> delta_radii, double tol_null) {
    std::vector<double> s = spectrum;
    std::sort(s.begin(), s.end());
    const int n = static_cast<int>(s.size());
    if (l < 0 || l + 1 >= n || l + i < 0 || l + i + 1 >= n)
        throw DomainError("remark13_example: spectrum too short for the requested gaps");
    auto gap = [&](int k) {
        if (s[k + 1] - s[k] < 2.0 * tol_null) throw DomainError("remark13_example: empty spectral gap");
        return std::pair<double, double>{s[k], s[k + 1]};
    };
    const auto g0 = gap(l);
    const auto gi = gap(l + i);
    const double B0 = 0.5 * (g0.first + g0.second);
    const double Binf = 0.5 * (gi.first + gi.second);
    Potential R = blended_quadratic(dim, B0, Binf, delta_radii.first, delta_radii.second);
    return Remark13Example{R, B0, Binf, g0.first, g0.second, gi.first, gi.second};
}

namespace {

Potential truncated_potential(const Potential& R, double M, double gamma) {
    const int d = R.dim();
    Potential base = R;
    // Cutoff e(r) = eta(r/M) with derivatives in r.
    auto cut = [M](double r) {
        const double s = r / M;
        return std::array<double, 3>{eta(s), eta_d1(s) / M, eta_d2(s) / (M * M)};
    };
    auto value = [base, cut, gamma](double t, const Vec& z) {
        const double r = z.norm();
        const double e = cut(r)[0];
        const double v = base.value(t, z);
        return v + e * (0.5 * gamma * r * r - v);
    };
    auto grad = [base, cut, gamma](double t, const Vec& z) {
        const double r = z.norm();
        const auto e = cut(r);
        Vec g = base.grad(t, z);
        if (e[0] == 0.0 && e[1] == 0.0) return g;
        const double gap = 0.5 * gamma * r * r - base.value(t, z);
        Vec out = g + e[0] * (gamma * z - g);
        if (r > 0.0) out += gap * (e[1] / r) * z;
        return out;
    };
    auto hess = [base, cut, gamma, d](double t, const Vec& z) {
        const double r = z.norm();
        const auto e = cut(r);
        Mat h = base.hess(t, z);
        if (e[0] == 0.0 && e[1] == 0.0 && e[2] == 0.0) return h;
        const Mat I = Mat::Identity(d, d);
        const Vec u = z / r;
        const Mat uu = u * u.transpose();
        const Vec dg = gamma * z - base.grad(t, z);
        const double gap = 0.5 * gamma * r * r - base.value(t, z);
        const Vec de = e[1] * u;
        const Mat d2e = e[2] * uu + (e[1] / r) * (I - uu);
        return Mat(h + e[0] * (gamma * I - h) + de * dg.transpose() + dg * de.transpose() + gap * d2e);
    };
    std::ostringstream os;
    os << "truncated(" << R.name() << ",M=" << M << ",gamma=" << gamma << ")";
    return Potential(os.str(), d, value, grad, hess, R.bound_c(), R.even(), R.zero_at_origin());
}

}  // namespace

TruncatedPotential truncate(const Potential& R, double M_k, double gamma, double R0, double b_inf_max,
                            const std::vector<double>& times) {
    if (!(M_k > R0)) throw DomainError("truncate: M_k must exceed R0");
    if (!(gamma > b_inf_max)) throw DomainError("truncate: gamma must exceed the largest eigenvalue of B_inf");
    Potential rk = truncated_potential(R, M_k, gamma);
    const int d = R.dim();
    // R_k = R on |z| <= M_k, where R's declared bound applies.
    double best = std::max(std::fabs(gamma), R.bound_c());
    const int nr = 8001;
    for (double t : times) {
        for (const auto& [tt, z] : sample_lattice(d, {t}, {1.0}, 4, 11)) {
            for (int k = 0; k < nr; ++k) {
                const double r = M_k * (1.0 + 39.0 * k / (nr - 1));
                Eigen::SelfAdjointEigenSolver<Mat> es(rk.hess(tt, r * z), Eigen::EigenvaluesOnly);
                best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
            }
        }
    }
    return TruncatedPotential{R, M_k, gamma, rk.with_bound(1.01 * best)};
}

double gradient_gap(const TruncatedPotential& tp, const std::vector<SamplePoint>& lattice) {
    double best = 0.0;
    for (const auto& [t, z] : lattice) best = std::max(best, (tp.R_k.grad(t, z) - tp.gamma * z).norm());
    return best;
}

double default_gamma(double b_inf_max, const Vec& spectrum, double tol) {
    double g = b_inf_max + 1.0;
    const double step = std::max(4.0 * tol, 1e-3);
    for (int it = 0; it < 100000; ++it) {
        bool clear = true;
        for (Index k = 0; k < spectrum.size(); ++k)
            if (std::fabs(spectrum[k] - g) <= tol) clear = false;
        if (clear) return g;
        g += step;
    }
    throw NumericalError("default_gamma: could not find a clear value");
}

SymMatFn epsilon_shift(const SymMatFn& B, double eps, int direction) {
    if (eps < 0.0) throw DomainError("epsilon_shift: eps must be nonnegative");
    if (direction != 1 && direction != -1) throw DomainError("epsilon_shift: direction must be +1 or -1");
    return B.shifted(direction * eps);
}

SymMatFn time_reverse(const SymMatFn& B) {
    SymMatFn b = B;
    return SymMatFn(B.dim(), [b](double t) { return Mat(-b(-t)); }, B.name().empty() ? "" : "rev(" + B.name() + ")");
}

Potential time_reverse(const Potential& R) {
    Potential r = R;
    return Potential(
        "rev(" + R.name() + ")", R.dim(), [r](double t, const Vec& z) { return -r.value(-t, z); },
        [r](double t, const Vec& z) { return Vec(-r.grad(-t, z)); },
        [r](double t, const Vec& z) { return Mat(-r.hess(-t, z)); }, R.bound_c(), R.even(), R.zero_at_origin());
}

ProblemSpec time_reverse(const ProblemSpec& spec) {
    Asymptotic asym = std::visit(
        [](const auto& a) -> Asymptotic {
            using A = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<A, Sandwich>) {
                return Sandwich{time_reverse(a.B2), time_reverse(a.B1), a.R0};
            } else {
                return OneSided{time_reverse(a.B_inf), a.side == Side::plus ? Side::minus : Side::plus, a.R0};
            }
        },
        spec.asymptotic);
    L1Witness w = spec.l1;
    w.P = -w.P;
    return ProblemSpec{time_reverse(spec.L), time_reverse(spec.R), w, asym};
}

namespace {

Mat simpson_adaptive(const std::function<Mat(double)>& f, double a, double b, const Mat& fa, const Mat& fm,
                     const Mat& fb, const Mat& whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const Mat flm = f(0.5 * (a + m));
    const Mat frm = f(0.5 * (m + b));
    const Mat left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Mat right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Mat delta = left + right - whole;
    if (depth <= 0 || delta.norm() <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::vector<Mat> averaged_hessian(const Potential& R, const std::vector<double>& times, const std::vector<Vec>& z,
                                  double eps, double R0, const SymMatFn& B1, double tol) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("averaged_hessian: need 0 < eps < 1");
    if (times.size() != z.size()) throw DimensionError("averaged_hessian: times and z differ in length");
    std::vector<Mat> out;
    out.reserve(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double t = times[i];
        if (z[i].norm() < R0 / eps) {
            out.push_back(B1(t));
            continue;
        }
        const Vec zi = z[i];
        auto f = [&R, t, zi](double s) { return R.hess(t, s * zi); };
        const Mat fa = f(0.0);
        const Mat fm = f(0.5);
        const Mat fb = f(1.0);
        const Mat whole = (fa + 4.0 * fm + fb) / 6.0;
        out.push_back(simpson_adaptive(f, 0.0, 1.0, fa, fm, fb, whole, tol, 40));
    }
    return out;
}

}  // namespace homlab
