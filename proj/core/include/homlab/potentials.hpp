#pragma once

#include "homlab/model.hpp"

#include <array>

namespace homlab {

// C^2 cutoff: 0 on [0,1), (2/9)(s-1)^3 - (1/9)(s-1)^4 on [1,2), 1 - 128/(9(12+s^2)) beyond.
double eta(double s);
double eta_d1(double s);
double eta_d2(double s);

// A cutoff together with its first two derivatives. Lets property checks run
// against substitute formulas.
struct EtaFns {
    std::function<double(double)> f;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};
EtaFns standard_eta();

// Radial profile f(r) of R(z) = f(|z|), reported as {f, f'(r)/r, f''(r)}.
// Reporting f'/r avoids the removable singularity at r = 0.
using RadialProfile = std::function<std::array<double, 3>(double)>;

Potential radial_potential(std::string name, int dim, RadialProfile profile, double bound_c, bool zero_at_origin = true);

// max over sampled r in [0, r_max] of max(|f''|, |f'/r|): the spectral norm
// bound of the Hessian of a radial potential.
double radial_hessian_bound(const RadialProfile& profile, double r_max, int samples = 20001);

Potential quadratic(const SymMatFn& B, double bound_c);
Potential quadratic_scalar(int dim, double b);

// R = (a/2)|z|^2 + b (sqrt(1+|z|^2) - 1). Hessian eigenvalues lie in [a, a+b]
// (b > 0), so B0 = (a+b) I and the behaviour at infinity is a I.
Potential saturating(int dim, double a, double b);

// R = |z|^4, used only in negative tests of the Hessian bound.
Potential quartic(int dim, double declared_bound);

// Quintic smoothstep cutoff: 1 for r <= r1, 0 for r >= r2, C^2 in between.
double smooth_delta(double r, double r1, double r2);

// R = delta(|z|) (B0/2)|z|^2 + (1 - delta(|z|)) (Binf/2)|z|^2 with radii (r1, r2).
Potential blended_quadratic(int dim, double B0, double Binf, double r1 = 1.0, double r2 = 2.0);

struct Remark13Example {
    Potential R;
    double B0;
    double B_inf;
    double gap0_lo, gap0_hi;
    double gapinf_lo, gapinf_hi;
};

// B0 at the midpoint of (lambda_l, lambda_{l+1}) and B_inf at the midpoint of
// (lambda_{l+i}, lambda_{l+i+1}), where l indexes the ascending list from 0.
Remark13Example remark13_example(const std::vector<double>& spectrum, int l, int i, int dim = 2,
                                 std::pair<double, double> delta_radii = {1.0, 2.0}, double tol_null = 1e-8);

struct TruncatedPotential {
    Potential base;
    double M_k;
    double gamma;
    Potential R_k;
};

// R_k = (1 - eta_k) R + (gamma/2) eta_k |z|^2 with eta_k(z) = eta(|z| / M_k).
// The declared bound of R_k is the larger of R's bound and a sample along
// rays over [M_k, 40 M_k] at the given times. b_inf_max is the largest
// eigenvalue of B_inf over samples; gamma must exceed it.
TruncatedPotential truncate(const Potential& R, double M_k, double gamma, double R0, double b_inf_max,
                            const std::vector<double>& times = {0.0});

// sup over the lattice of |grad R_k(t,z) - gamma z|: the C_k estimate.
double gradient_gap(const TruncatedPotential& tp, const std::vector<SamplePoint>& lattice);

// gamma = b_inf_max + 1, nudged until no eigenvalue lies within tol of it.
double default_gamma(double b_inf_max, const Vec& spectrum, double tol);

// B + direction * eps * I (direction -1 is the minus-shift).
SymMatFn epsilon_shift(const SymMatFn& B, double eps, int direction);

// t -> -B(-t).
SymMatFn time_reverse(const SymMatFn& B);
// (t, z) -> -R(-t, z).
Potential time_reverse(const Potential& R);
// L -> -L(-t), R -> -R(-t, z), P -> -P, bounds reflected (sides swap).
ProblemSpec time_reverse(const ProblemSpec& spec);

// C(t_i) = int_0^1 hess R(t_i, s z_i) ds where |z_i| >= R0/eps, else B1(t_i).
// Adaptive Simpson with absolute tolerance tol on the Frobenius norm.
std::vector<Mat> averaged_hessian(const Potential& R, const std::vector<double>& times, const std::vector<Vec>& z,
                                  double eps, double R0, const SymMatFn& B1, double tol = 1e-8);

}  // namespace homlab
