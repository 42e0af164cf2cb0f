#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace homlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Shape or size disagreement between inputs.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the admissible set of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A numerical routine failed (singular factorization, LAPACK error, bad residual).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iteration did not converge or contract.
struct ConvergenceError : NumericalError {
    using NumericalError::NumericalError;
};

// Standard symplectic matrix [[0, -I_N], [I_N, 0]] of size dim = 2N.
Mat symplectic_J(int dim);

// Largest absolute entry; used for scale-aware tolerances.
inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Time-indexed symmetric matrix function t -> M(t) of even size dim.
// Every evaluation is checked for symmetry and symmetrized exactly.
class SymMatFn {
public:
    using Fn = std::function<Mat(double)>;

    SymMatFn(int dim, Fn f, std::string name = "");

    static SymMatFn constant(const Mat& m, std::string name = "");
    static SymMatFn scalar(int dim, double c);

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    Mat operator()(double t) const;

    // Pointwise combinations; the result owns copies of the operands.
    SymMatFn scaled(double s) const;
    SymMatFn plus(const SymMatFn& other) const;
    SymMatFn shifted(double s) const;  // M(t) + s I

private:
    int dim_;
    Fn f_;
    std::string name_;
};

}  // namespace homlab
