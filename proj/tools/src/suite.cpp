#include "homlab_cli/suite.hpp"

#include "homlab/linear.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

namespace homlab::cli {

namespace {

Mat random_symmetric(Index n, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> g;
    Mat m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) m(i, j) = g(rng);
    return scale * 0.5 * (m + m.transpose());
}

Vec sym_eigenvalues(const Mat& m) { return Eigen::SelfAdjointEigenSolver<Mat>(m, Eigen::EigenvaluesOnly).eigenvalues(); }

PropertyResult at_most(std::string suite, std::string name, double value, double threshold) {
    return {std::move(suite), std::move(name), value <= threshold, value, threshold};
}

void eta_suite(std::vector<PropertyResult>& out, const EtaFns& eta) {
    out.push_back(at_most("eta", "c2_junctions", eta_junction_error(eta), 1e-6));
    double worst = 0.0;
    for (double s = 0.05; s < 6.0; s += 0.1) {
        const double h = 1e-5;
        worst = std::max(worst, std::fabs((eta.f(s + h) - eta.f(s - h)) / (2 * h) - eta.d1(s)));
        worst = std::max(worst, std::fabs((eta.d1(s + h) - eta.d1(s - h)) / (2 * h) - eta.d2(s)));
    }
    out.push_back(at_most("eta", "derivative_consistency", worst, 1e-6));
}

void index_suite(std::vector<PropertyResult>& out, std::mt19937_64& rng) {
    int flow_bad = 0;
    int pairs = 0;
    while (pairs < 20) {
        const Index n = 2 + static_cast<Index>(rng() % 30);
        const Mat A = random_symmetric(n, rng, 3.0);
        const Mat B = random_symmetric(n, rng, 3.0);
        if (sym_eigenvalues(A).cwiseAbs().minCoeff() < 1e-3 || sym_eigenvalues(A - B).cwiseAbs().minCoeff() < 1e-3) continue;
        ++pairs;
        if (relative_index(A, B).mu != -spectral_flow(linear_pencil(A, B)).sf) ++flow_bad;
    }
    out.push_back(at_most("index", "mu_equals_minus_sf", flow_bad, 0));

    int mono_bad = 0;
    int add_bad = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const Mat A = random_symmetric(12, rng, 2.0);
        const Mat G = random_symmetric(12, rng, 1.0);
        const Mat B = G * G.transpose() + 0.1 * Mat::Identity(12, 12);
        if (monotone_count(A, B) != relative_index(A, B).mu) ++mono_bad;
        const Mat B2 = random_symmetric(12, rng, 2.0);
        if (relative_index(A, Mat(B + B2)).mu != relative_index(A, B).mu + relative_index(Mat(A - B), B2).mu) ++add_bad;
    }
    out.push_back(at_most("index", "monotone_count", mono_bad, 0));
    out.push_back(at_most("index", "additivity", add_bad, 0));
}

void truncation_suite(std::vector<PropertyResult>& out) {
    const auto ex = remark13_example({-2, -0.5, 1, 2.5, 4}, 1, 2);
    const double gamma = 4.25;
    const double C = ex.R.bound_c() + gamma;
    std::vector<double> radii;
    for (double r = 0.0; r < 800.0; r = r * 1.03 + 0.01) radii.push_back(r);
    const auto lattice = sample_lattice(2, {0.0}, radii, 6, 3);
    int broken = 0;
    double excess = -C;
    for (double M : {5.0, 10.0, 20.0}) {
        const TruncatedPotential tp = truncate(ex.R, M, gamma, 2.0, ex.B_inf);
        for (const auto& [t, z] : lattice) {
            if (z.norm() <= M && (tp.R_k.value(t, z) != ex.R.value(t, z) || tp.R_k.grad(t, z) != ex.R.grad(t, z))) ++broken;
            excess = std::max(excess, sym_eigenvalues(tp.R_k.hess(t, z)).cwiseAbs().maxCoeff() - C);
        }
    }
    out.push_back(at_most("truncation", "identity_region", broken, 0));
    out.push_back(at_most("truncation", "shared_hessian_bound_excess", excess, 0.0));
}

void reduction_suite(std::vector<PropertyResult>& out, std::mt19937_64& rng) {
    const Grid g = make_grid(10.0, 600);
    const DiscreteOperator A = assemble(split_growth(1), g);
    const Potential R = saturating(2, 2.0, 1.1);
    const ReducedProblem rp = build_reduction(A, R, choose_beta(R.bound_c(), 0.0, eigenvalues(A)).beta);
    out.push_back(at_most("reduction", "trivial_point", auxiliary_solve(rp, Vec::Zero(rp.d0())).z.norm(), 0.0));
    const double bound = lemma22_bound(rp.beta(), R.bound_c(), rp.eps(), rp.eps());
    std::normal_distribution<double> nrm;
    double worst = 0.0;
    for (int s = 0; s < 5; ++s) {
        Vec x(rp.d0());
        for (Index i = 0; i < x.size(); ++i) x[i] = nrm(rng);
        x *= (0.5 + 2.0 * s) / x.norm();
        const SplitNorms sn = split_norms(rp, auxiliary_solve(rp, x));
        worst = std::max(worst, (sn.u_plus + sn.u_minus) / l2_norm(rp.embed(x), rp.h()) / bound);
    }
    out.push_back(at_most("reduction", "lemma_bound_ratio", worst, 1.0));
}

void symplectic_suite(std::vector<PropertyResult>& out, std::mt19937_64& rng) {
    out.push_back(at_most("symplectic", "rotation_defect",
                          fundamental_solution(SymMatFn::scalar(2, 1.0), 20.0, 1e-3).defect, 1e-10));
    int over = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int N = 1 + trial % 2;
        Mat B = random_symmetric(2 * N, rng, 1.0);
        B *= 2.0 / sym_eigenvalues(B).cwiseAbs().maxCoeff();
        if (stable_subspace(fundamental_solution(SymMatFn::constant(B), 20.0, 1e-2)).dim > N) ++over;
    }
    out.push_back(at_most("symplectic", "stable_dim_above_N", over, 0));
}

void time_reversal_suite(std::vector<PropertyResult>& out) {
    const Grid g = make_grid(10.0, 600);
    const DiscreteOperator A = assemble(split_growth(1), g);
    const Vec ev = eigenvalues(A);
    const int l = static_cast<int>(std::count_if(ev.begin(), ev.end(), [](double v) { return v <= 0.0; })) - 1;
    const auto ex = remark13_example(std::vector<double>(ev.data(), ev.data() + ev.size()), l, 3);
    const SymMatFn B0 = SymMatFn::scalar(2, ex.B0);
    const SymMatFn Bi = SymMatFn::scalar(2, ex.B_inf);
    const int forward = relative_index(A, multiplier(B0, g)).mu - relative_index(A, multiplier(Bi, g)).mu;
    const DiscreteOperator Ar = assemble(time_reverse(split_growth(1)), g, Scheme::staggered_backward);
    const int reversed = relative_index(Ar, multiplier(time_reverse(Bi), g)).mu - relative_index(Ar, multiplier(time_reverse(B0), g)).mu;
    out.push_back(at_most("time_reversal", "index_relation_mismatch", std::abs(forward - reversed), 0));
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"eta", "index", "truncation", "reduction", "symplectic", "time_reversal"};
    return names;
}

double eta_junction_error(const EtaFns& eta) {
    const double d = 1e-9;
    const double expect[2][3] = {{0.0, 0.0, 0.0}, {1.0 / 9, 2.0 / 9, 0.0}};
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) {
        const double s = 1.0 + j;
        for (double at : {s - d, s + d}) {
            worst = std::max(worst, std::fabs(eta.f(at) - expect[j][0]));
            worst = std::max(worst, std::fabs(eta.d1(at) - expect[j][1]));
            worst = std::max(worst, std::fabs(eta.d2(at) - expect[j][2]));
        }
    }
    return worst;
}

EtaFns mistyped_eta() {
    const double c3 = 2.0 / 7.0;
    const double c4 = 1.0 / 9.0;
    auto mid = [](double s) { return s >= 1.0 && s < 2.0; };
    return EtaFns{[=](double s) { return mid(s) ? c3 * std::pow(s - 1, 3) - c4 * std::pow(s - 1, 4) : eta(s); },
                  [=](double s) { return mid(s) ? 3 * c3 * std::pow(s - 1, 2) - 4 * c4 * std::pow(s - 1, 3) : eta_d1(s); },
                  [=](double s) { return mid(s) ? 6 * c3 * (s - 1) - 12 * c4 * std::pow(s - 1, 2) : eta_d2(s); }};
}

std::vector<PropertyResult> run_suite(const std::vector<std::string>& only, const EtaFns& eta, unsigned seed) {
    for (const std::string& s : only)
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw ConfigError("unknown verify suite '" + s + "'");
    auto wanted = [&](const std::string& s) { return only.empty() || std::find(only.begin(), only.end(), s) != only.end(); };
    std::mt19937_64 rng(seed);
    std::vector<PropertyResult> out;
    if (wanted("eta")) eta_suite(out, eta);
    if (wanted("index")) index_suite(out, rng);
    if (wanted("truncation")) truncation_suite(out);
    if (wanted("reduction")) reduction_suite(out, rng);
    if (wanted("symplectic")) symplectic_suite(out, rng);
    if (wanted("time_reversal")) time_reversal_suite(out);
    return out;
}

}  // namespace homlab::cli
