#include "homlab/discretize.hpp"
#include "homlab/index.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace homlab;

namespace {

double smallest_positive(const Vec& ev) {
    for (Index k = 0; k < ev.size(); ++k)
        if (ev[k] > 0.0) return ev[k];
    return std::nan("");
}

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("make_grid") {
    const Grid g = make_grid(1.0, 3);
    CHECK(g.h == 0.5);
    const auto t = g.nodes();
    REQUIRE(t.size() == 3);
    CHECK(t[0] == -0.5);
    CHECK(t[1] == 0.0);
    CHECK(t[2] == 0.5);
    CHECK(make_grid(20.0, 2000).h == doctest::Approx(40.0 / 2001.0));
    CHECK_THROWS_AS(make_grid(0.0, 10), DomainError);
    CHECK_THROWS_AS(make_grid(1.0, 2), DomainError);
}

TEST_CASE("assembled operators are exactly symmetric and banded") {
    const Grid g = make_grid(3.0, 40);
    for (int N : {1, 2}) {
        for (Scheme s : {Scheme::staggered_forward, Scheme::staggered_backward, Scheme::central}) {
            const DiscreteOperator A = assemble(split_growth(N), g, s);
            const Mat d = A.matrix.dense();
            CHECK((d - d.transpose()).norm() == 0.0);
            CHECK(A.matrix.kd() <= 4 * N - 1);
            for (Index r = 0; r < d.rows(); ++r)
                for (Index c = 0; c < d.cols(); ++c)
                    if (std::abs(r - c) > 4 * N - 1) CHECK(d(r, c) == 0.0);
        }
    }
    CHECK_THROWS_AS(relative_index(assemble(split_growth(1), g), multiplier(SymMatFn::scalar(4, 1.0), g)),
                    DimensionError);
}

TEST_CASE("constant L on a grid with no couplings left is a pure multiplier") {
    // With L = diag(2,2) the difference part is traceless: the spectrum is symmetric about 2.
    const Grid g = make_grid(1.0, 5);
    const Vec ev = eigenvalues(assemble(SymMatFn::constant(diag2(2, 2)), g, Scheme::central));
    for (Index k = 0; k < ev.size(); ++k) CHECK(ev[k] + ev[ev.size() - 1 - k] == doctest::Approx(4.0));
}

TEST_CASE("smallest positive eigenvalue of the desk operator converges under refinement") {
    double prev = 0.0;
    std::vector<double> vals;
    for (Index n : {1000, 2000, 4000}) vals.push_back(smallest_positive(eigenvalues(assemble(split_growth(1), make_grid(20.0, n)))));
    prev = vals[0];
    for (std::size_t k = 1; k < vals.size(); ++k) {
        // 3 significant digits.
        CHECK(std::fabs(vals[k] - prev) / vals[k] < 5e-3);
        prev = vals[k];
    }
    CHECK(std::fabs(vals[2] - vals[1]) < std::fabs(vals[1] - vals[0]));
}

TEST_CASE("eigenvalues are independent of the truncation at fixed h") {
    const double h = 40.0 / 2001.0;
    const Vec a = eigenvalues(assemble(split_growth(1), make_grid(20.0, 2000)));
    const Vec b = eigenvalues(assemble(split_growth(1), make_grid(30.0, static_cast<Index>(std::lround(60.0 / h)) - 1)));
    const double pa = smallest_positive(a);
    const double pb = smallest_positive(b);
    CHECK(std::fabs(pa - pb) / pa < 1e-3);
}

TEST_CASE("multiplier") {
    const Grid g = make_grid(1.0, 3);
    CHECK((multiplier(SymMatFn::scalar(2, 1.0), g).matrix.dense() - Mat::Identity(6, 6)).norm() == 0.0);
    const auto m = multiplier(SymMatFn::constant(diag2(1, -1)), g).matrix.dense();
    CHECK((m.diagonal() - (Vec(6) << 1, -1, 1, -1, 1, -1).finished()).norm() == 0.0);

    // Node-dependent blocks: spectrum is the multiset of block spectra.
    std::mt19937_64 rng(11);
    const Grid g2 = make_grid(2.0, 9);
    std::vector<Mat> blocks;
    std::vector<double> expect;
    for (Index i = 0; i < g2.n; ++i) {
        blocks.push_back(testsupport::random_symmetric(4, rng));
        const Vec e = testsupport::dense_eigenvalues(blocks.back());
        expect.insert(expect.end(), e.data(), e.data() + e.size());
    }
    std::sort(expect.begin(), expect.end());
    const Vec got = eigenvalues(multiplier(blocks, g2));
    REQUIRE(got.size() == static_cast<Index>(expect.size()));
    for (Index k = 0; k < got.size(); ++k) CHECK(got[k] == doctest::Approx(expect[static_cast<std::size_t>(k)]).epsilon(1e-12));
    blocks.pop_back();
    CHECK_THROWS_AS(multiplier(blocks, g2), DimensionError);
}

TEST_CASE("spectrum windows") {
    const Grid g = make_grid(1.0, 3);
    const DiscreteOperator A = multiplier(std::vector<Mat>{diag2(-3, -1), diag2(1, 3), diag2(5, 7)}, g);
    const EigenDecomp w = spectrum(A, 0.0, 2.0);
    REQUIRE(w.size() == 1);
    CHECK(w.values[0] == 1.0);
    CHECK(w.signed_label(0) == 1);
    CHECK(spectrum(A, 5.5, 5.5001).size() == 0);
    CHECK_THROWS_AS(spectrum(A, 1.0, 0.0), DomainError);
    const EigenDecomp near = spectrum_nearest(A, 2);
    REQUIRE(near.size() == 2);
    CHECK(near.values[0] == -1.0);
    CHECK(near.values[1] == 1.0);
    CHECK(near.signed_label(0) == -1);
}

TEST_CASE("desk spectrum: simple eigenvalues in [-6, 6] that match a dense solve, certified pairs") {
    const Grid g = make_grid(20.0, 2000);
    const DiscreteOperator A = assemble(split_growth(1), g);
    const EigenDecomp d = spectrum(A, -6.0, 6.0);
    CHECK(d.size() >= 8);
    for (Index k = 0; k + 1 < d.size(); ++k) CHECK(d.values[k + 1] - d.values[k] > 1e-6);
    for (Index k = 0; k < d.size(); ++k) {
        CHECK(d.residuals[k] <= 1e-8 * (1 + std::fabs(d.values[k])));
        CHECK(l2_norm(d.vectors.col(k), g.h) == doctest::Approx(1.0).epsilon(1e-10));
    }
    const Mat gram = g.h * d.vectors.transpose() * d.vectors;
    CHECK((gram - Mat::Identity(d.size(), d.size())).cwiseAbs().maxCoeff() < 1e-8);

    // Dense oracle on a coarser grid, same code path.
    const DiscreteOperator Ac = assemble(split_growth(1), make_grid(20.0, 700));
    const Vec ref = testsupport::dense_eigenvalues(Ac.matrix.dense());
    const Vec got = eigenvalues(Ac);
    CHECK((ref - got).cwiseAbs().maxCoeff() < 1e-9 * (1 + ref.cwiseAbs().maxCoeff()));
}

TEST_CASE("inertia is invariant under a consistent node permutation") {
    const Grid g = make_grid(4.0, 30);
    const Mat A = (assemble(split_growth(1), g) - multiplier(SymMatFn::scalar(2, 1.9), g)).matrix.dense();
    std::vector<Index> perm(static_cast<std::size_t>(g.n));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    Mat P = Mat::Zero(A.rows(), A.cols());
    for (Index i = 0; i < g.n; ++i)
        for (int c = 0; c < 2; ++c) P(2 * i + c, 2 * perm[static_cast<std::size_t>(i)] + c) = 1.0;
    const Inertia a = inertia(A);
    const Inertia b = inertia(Mat(P * A * P.transpose()));
    CHECK(a.minus == b.minus);
    CHECK(a.zero == b.zero);
    CHECK(a.plus == b.plus);
}

TEST_CASE("norms") {
    const Grid g = make_grid(10.0, 600);
    const DiscreteOperator A = assemble(split_growth(1), g);
    const EigenDecomp all = spectrum_all(A);
    for (Index k : {Index(0), all.size() / 2, all.size() - 1}) {
        const Norms nm = norms(all.vectors.col(k), all);
        CHECK(nm.l2 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(nm.e_norm * nm.e_norm == doctest::Approx(1.0 + std::fabs(all.values[k])).epsilon(1e-8));
    }
    const Norms zero = norms(Vec::Zero(A.size()), all, {2.0, 4.0});
    CHECK(zero.l2 == 0.0);
    CHECK(zero.e_norm == 0.0);
    CHECK(zero.lp.at(4.0) == 0.0);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec z = testsupport::random_vec(A.size(), rng);
        const Norms nm = norms(z, all, {2.0, 4.0, 6.0});
        CHECK(nm.lp.at(2.0) == doctest::Approx(nm.l2).epsilon(1e-12));
        CHECK(std::pow(nm.lp.at(4.0), 4) <= nm.l2 * std::pow(nm.lp.at(6.0), 3) * (1 + 1e-12));
        CHECK(nm.e_norm >= nm.l2);
    }
    const EigenDecomp part = spectrum(A, -3.0, 3.0);
    CHECK_THROWS_AS(norms(testsupport::random_vec(A.size(), rng), part), DomainError);
    CHECK_THROWS_AS(lp_norm(Vec::Zero(4), 2, 0.1, 0.5), DomainError);
}

TEST_CASE("tail mass") {
    const Grid g = make_grid(20.0, 800);
    const DiscreteOperator A = assemble(split_growth(1), g);
    const EigenDecomp all = spectrum_all(A);
    Vec z = Vec::Zero(A.size());
    for (Index i = 0; i < g.n; ++i)
        if (std::fabs(g.node(i)) <= 5.0) z.segment(2 * i, 2) << 1.0, std::sin(g.node(i));
    CHECK(tail_mass(z, 6.0, all) == 0.0);
    CHECK(tail_mass(z, 4.0, all) > 0.0);
    CHECK_THROWS_AS(tail_mass(z, 20.0, all), DomainError);

    const Vec v = all.vectors.col(all.n_nonpositive);  // first positive eigenvalue
    const double m10 = tail_mass(v, 10.0, all);
    const double m15 = tail_mass(v, 15.0, all);
    const double m19 = tail_mass(v, 19.0, all);
    CHECK(m10 > m15);
    CHECK(m15 > m19);
    double prev = 1.0;
    for (double R = 1.0; R < 19.5; R += 0.5) {
        const double m = tail_mass(v, R, all);
        CHECK(m <= prev);
        prev = m;
    }
    // alpha = 1 for the desk L.
    CHECK(tail_decay_exponent(v, {2.0, 3.0, 4.0, 5.0}, all) <= -1.0);
}
