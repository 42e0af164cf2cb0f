#pragma once

#include "homlab/core.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace homlab {

// Nonlinearity R(t, z) with value, gradient and Hessian, the declared bound
// c on the spectral norm of the Hessian, evenness in z, and whether
// grad R(t, 0) = 0 is declared.
class Potential {
public:
    using ValueFn = std::function<double(double, const Vec&)>;
    using GradFn = std::function<Vec(double, const Vec&)>;
    using HessFn = std::function<Mat(double, const Vec&)>;

    Potential(std::string name, int dim, ValueFn value, GradFn grad, HessFn hess, double bound_c, bool even,
              bool zero_at_origin = true);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    double bound_c() const { return bound_c_; }
    bool even() const { return even_; }
    bool zero_at_origin() const { return zero_at_origin_; }

    double value(double t, const Vec& z) const { return value_(t, z); }
    Vec grad(double t, const Vec& z) const { return grad_(t, z); }
    Mat hess(double t, const Vec& z) const { return hess_(t, z); }

    Potential with_bound(double c) const;
    Potential with_name(std::string name) const;

private:
    std::string name_;
    int dim_;
    ValueFn value_;
    GradFn grad_;
    HessFn hess_;
    double bound_c_;
    bool even_;
    bool zero_at_origin_;
};

// (1 + |t|) diag(I_N, -I_N); satisfies (L1) with P = diag(I_N, -I_N), c = alpha = 1.
SymMatFn split_growth(int N);
// (1 + |t|) I_2N. Commutes with J, so -J d/dt + L has no eigenvalues.
SymMatFn scalar_growth(int N);

// Hessian of R at the origin, B0(t) = hess R(t, 0).
SymMatFn origin_hessian(const Potential& r);

struct L1Witness {
    Mat P;
    double c = 1.0;
    double alpha = 1.0;
    double t0 = 0.0;
};

enum class Side { plus, minus };

// B1(t) <= hess R(t, z) <= B2(t) for |z| > R0.
struct Sandwich {
    SymMatFn B1;
    SymMatFn B2;
    double R0;
};

// +-hess R(t, z) >= +-B_inf(t) for |z| > R0.
struct OneSided {
    SymMatFn B_inf;
    Side side;
    double R0;
};

using Asymptotic = std::variant<Sandwich, OneSided>;

struct ProblemSpec {
    SymMatFn L;
    Potential R;
    L1Witness l1;
    Asymptotic asymptotic;
};

struct HypothesisCheck {
    std::string name;
    bool pass = true;
    double worst_violation = 0.0;
    std::size_t samples = 0;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    std::string sample_set;

    bool pass() const;
    const HypothesisCheck& at(const std::string& name) const;
};

// Scale-aware slack for semidefiniteness tests.
inline double tol_psd(double norm) { return 1e-9 * (1.0 + norm); }

HypothesisReport validate_L1(const SymMatFn& L, const L1Witness& w, const std::vector<double>& sample_times);

// First candidate P (by position) for which validate_L1 passes, if any.
std::optional<std::size_t> find_l1_witness(const SymMatFn& L, const std::vector<Mat>& candidates, double c,
                                           double alpha, double t0, const std::vector<double>& sample_times);

using SamplePoint = std::pair<double, Vec>;

HypothesisReport validate_R(const Potential& R, const std::vector<SamplePoint>& samples,
                            const std::optional<Asymptotic>& asymptotic = std::nullopt);

struct FiniteDiffReport {
    double grad_error = 0.0;
    double hess_error = 0.0;
    double max_error() const { return std::max(grad_error, hess_error); }
    bool flagged(double threshold = 1e-4) const { return max_error() > threshold; }
};

// Central-difference consistency of grad against value and hess against grad,
// each as max |analytic - fd| / (1 + |analytic|) over the sample points.
FiniteDiffReport finite_diff_consistency(const Potential& R, const std::vector<SamplePoint>& pts, double h);

// Deterministic (t, z) lattice: times x radii x directions (unit vectors).
std::vector<SamplePoint> sample_lattice(int dim, const std::vector<double>& times, const std::vector<double>& radii,
                                        int directions, unsigned seed = 7);

}  // namespace homlab
