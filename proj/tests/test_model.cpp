#include "homlab/potentials.hpp"

#include <doctest.h>

#include <cmath>

using namespace homlab;

namespace {

std::vector<double> symmetric_times(std::initializer_list<double> ts) {
    std::vector<double> out;
    for (double t : ts) {
        out.push_back(t);
        out.push_back(-t);
    }
    return out;
}

SymMatFn rotating(double alpha) {
    return SymMatFn(2, [alpha](double t) {
        Mat m(2, 2);
        m << std::cos(2 * t), std::sin(2 * t), std::sin(2 * t), -std::cos(2 * t);
        return Mat(std::pow(std::fabs(t), alpha) * m);
    });
}

}  // namespace

TEST_CASE("symplectic J has the standard block form") {
    const Mat J = symplectic_J(4);
    CHECK(J(0, 2) == -1.0);
    CHECK(J(2, 0) == 1.0);
    CHECK((J * J + Mat::Identity(4, 4)).norm() == 0.0);
    CHECK((J.transpose() + J).norm() == 0.0);
    CHECK_THROWS_AS(symplectic_J(3), DimensionError);
}

TEST_CASE("SymMatFn rejects asymmetric evaluations and odd sizes") {
    const SymMatFn bad(2, [](double) {
        Mat m(2, 2);
        m << 1, 2, 3, 4;
        return m;
    });
    CHECK_THROWS_AS(bad(0.0), DomainError);
    CHECK_THROWS_AS(SymMatFn(3, [](double) { return Mat::Identity(3, 3); }), DimensionError);
    Mat tiny(2, 2);
    tiny << 1, 1, 1 + 1e-14, 1;
    const Mat sym = SymMatFn::constant(tiny)(0.0);
    CHECK(sym(0, 1) == sym(1, 0));
}

TEST_CASE("L1 holds for (1+|t|) I4 with P = I") {
    const SymMatFn L(4, [](double t) { return Mat((1.0 + std::fabs(t)) * Mat::Identity(4, 4)); });
    const auto rep = validate_L1(L, {Mat::Identity(4, 4), 1.0, 1.0, 1.0}, symmetric_times({1, 5, 20}));
    CHECK(rep.pass());
    CHECK(rep.at("L1").samples == 6);
    CHECK(rep.at("L1").worst_violation == 0.0);
}

TEST_CASE("constant L cannot dominate a growing weight") {
    const auto rep = validate_L1(SymMatFn::scalar(2, 1.0), {Mat::Identity(2, 2), 1.0, 1.0, 1.0}, {2.0});
    CHECK_FALSE(rep.pass());
    // min eig of I - 2 I is -1.
    CHECK(rep.at("L1").worst_violation == doctest::Approx(1.0));
}

TEST_CASE("rotating L admits no witness among the standard candidates") {
    const Mat J = symplectic_J(2);
    Mat S(2, 2);
    S << 1, 0, 0, -1;
    const std::vector<Mat> cands{Mat::Identity(2, 2), -Mat::Identity(2, 2), J, -J, S};
    std::vector<double> times;
    for (double t = 1.0; t <= 20.0; t += 0.37) times.push_back(t);
    CHECK_FALSE(find_l1_witness(rotating(1.0), cands, 1.0, 1.0, 1.0, times).has_value());
    for (const Mat& P : cands) CHECK_FALSE(validate_L1(rotating(1.0), {P, 0.1, 1.0, 1.0}, times).pass());
}

TEST_CASE("split and scalar growth families witness L1") {
    Mat S = Mat::Identity(2, 2);
    S(1, 1) = -1.0;
    const auto ts = symmetric_times({0.5, 1, 3, 10, 20});
    CHECK(validate_L1(split_growth(1), {S, 1.0, 1.0, 0.0}, ts).pass());
    CHECK_FALSE(validate_L1(split_growth(1), {Mat::Identity(2, 2), 1.0, 1.0, 0.0}, ts).pass());
    CHECK(validate_L1(scalar_growth(1), {Mat::Identity(2, 2), 1.0, 1.0, 0.0}, ts).pass());
    CHECK(split_growth(2)(-3.0)(3, 3) == -4.0);
}

TEST_CASE("validate_L1 is monotone in c") {
    const auto ts = symmetric_times({1, 2, 4, 8});
    Mat S = Mat::Identity(2, 2);
    S(1, 1) = -1.0;
    bool passed = false;
    for (double c : {1.6, 1.4, 1.2, 1.0, 0.8, 0.5}) {
        const bool p = validate_L1(split_growth(1), {S, c, 1.0, 1.0}, ts).pass();
        if (passed) CHECK(p);
        passed = passed || p;
    }
    CHECK(passed);
}

TEST_CASE("validate_L1 errors") {
    CHECK_THROWS_AS(validate_L1(split_growth(1), {Mat::Identity(4, 4), 1, 1, 0}, {1.0}), DimensionError);
    CHECK_THROWS_AS(validate_L1(split_growth(1), {Mat::Identity(2, 2), 1, 1, 0}, {}), DomainError);
    CHECK_THROWS_AS(validate_L1(split_growth(1), {Mat::Identity(2, 2), 1, 1, 5}, {1.0}), DomainError);
}

TEST_CASE("validate_R on the quadratic, quartic and blended potentials") {
    const auto pts = sample_lattice(2, {-3, 0, 2}, {0, 0.5, 1, 1.5, 2, 3, 10}, 6);
    const auto q = validate_R(quadratic_scalar(2, 1.0), pts);
    CHECK(q.pass());
    CHECK(q.at("R1").worst_violation == 0.0);
    CHECK(q.at("R0").pass);
    CHECK(q.at("even").pass);

    const auto quart = validate_R(quartic(2, 10.0), sample_lattice(2, {0}, {10}, 3));
    CHECK_FALSE(quart.pass());
    CHECK(quart.at("R1").worst_violation > 1000.0);

    // Bound from a dense radial sample, checked against an independent lattice.
    const Potential b = blended_quadratic(2, 0.25, 3.25);
    std::vector<double> radii;
    for (double r = 0.0; r <= 4.0; r += 0.0123) radii.push_back(r);
    const auto rep = validate_R(b, sample_lattice(2, {0.0}, radii, 5, 11), Asymptotic{OneSided{SymMatFn::scalar(2, 3.25), Side::plus, 2.0}});
    CHECK(rep.pass());
    CHECK(std::isfinite(b.bound_c()));
}

TEST_CASE("finite-difference consistency") {
    const auto pts = sample_lattice(2, {0.0, 1.0}, {0.3, 1.1, 1.7, 2.5}, 4);
    CHECK(finite_diff_consistency(quadratic_scalar(2, 1.0), pts, 1e-5).max_error() <= 1e-10);
    CHECK(finite_diff_consistency(blended_quadratic(2, 0.25, 3.25), pts, 1e-4).max_error() <= 1e-6);

    const Potential q = quadratic_scalar(2, 1.0);
    const Potential wrong("wrong", 2, [q](double t, const Vec& z) { return q.value(t, z); },
                          [q](double t, const Vec& z) { return Vec(2.0 * q.grad(t, z)); },
                          [q](double t, const Vec& z) { return q.hess(t, z); }, 1.0, true);
    const auto rep = finite_diff_consistency(wrong, sample_lattice(2, {0.0}, {1e4}, 3), 1e-3);
    CHECK(rep.grad_error == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(rep.flagged());

    const Potential nan("nan", 2, [](double, const Vec&) { return std::nan(""); },
                        [](double, const Vec& z) { return z; },
                        [](double, const Vec&) { return Mat(Mat::Identity(2, 2)); }, 1.0, false);
    CHECK_THROWS_AS(finite_diff_consistency(nan, pts, 1e-4), NumericalError);
}
