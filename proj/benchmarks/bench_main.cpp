#include "homlab/linear.hpp"
#include "homlab/orbits.hpp"
#include "homlab/potentials.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace homlab;

namespace {

Mat random_symmetric(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Mat m(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) m(i, j) = g(rng);
    return 1.5 * (m + m.transpose());
}

DiscreteOperator desk(Index n) { return assemble(split_growth(1), make_grid(20.0, n)); }

void BM_Assemble(benchmark::State& s) {
    const Grid g = make_grid(20.0, s.range(0));
    for (auto _ : s) benchmark::DoNotOptimize(assemble(split_growth(1), g));
}
BENCHMARK(BM_Assemble)->Arg(1000)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Eigenvalues(benchmark::State& s) {
    const DiscreteOperator A = desk(s.range(0));
    for (auto _ : s) benchmark::DoNotOptimize(eigenvalues(A));
}
BENCHMARK(BM_Eigenvalues)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_SpectrumWindow(benchmark::State& s) {
    const DiscreteOperator A = desk(s.range(0));
    for (auto _ : s) benchmark::DoNotOptimize(spectrum(A, -6.0, 6.0));
}
BENCHMARK(BM_SpectrumWindow)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_RelativeIndex(benchmark::State& s) {
    const DiscreteOperator A = desk(s.range(0));
    const DiscreteOperator B = multiplier(SymMatFn::scalar(2, 2.5), A.grid);
    for (auto _ : s) benchmark::DoNotOptimize(relative_index(A, B));
}
BENCHMARK(BM_RelativeIndex)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_SpectralFlow(benchmark::State& s) {
    std::mt19937_64 rng(1);
    const Mat A = random_symmetric(s.range(0), rng);
    const Mat B = random_symmetric(s.range(0), rng);
    for (auto _ : s) benchmark::DoNotOptimize(spectral_flow(linear_pencil(A, B)));
}
BENCHMARK(BM_SpectralFlow)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

struct Reduction {
    DiscreteOperator A;
    ReducedProblem rp;
};

const Reduction& desk_reduction() {
    static const Reduction r = [] {
        DiscreteOperator A = desk(2000);
        const Potential R = saturating(2, 2.0, 1.1);
        const double beta = choose_beta(R.bound_c(), 0.0, eigenvalues(A)).beta;
        ReducedProblem rp = build_reduction(A, R, beta);
        return Reduction{std::move(A), std::move(rp)};
    }();
    return r;
}

void BM_BuildReduction(benchmark::State& s) {
    const DiscreteOperator A = desk(2000);
    const Potential R = saturating(2, 2.0, 1.1);
    const double beta = choose_beta(R.bound_c(), 0.0, eigenvalues(A)).beta;
    for (auto _ : s) benchmark::DoNotOptimize(build_reduction(A, R, beta));
}
BENCHMARK(BM_BuildReduction)->Unit(benchmark::kMillisecond);

void BM_AuxiliarySolve(benchmark::State& s) {
    const ReducedProblem& rp = desk_reduction().rp;
    Vec x = Vec::Ones(rp.d0());
    x *= 2.0 / x.norm();
    for (auto _ : s) benchmark::DoNotOptimize(auxiliary_solve(rp, x));
}
BENCHMARK(BM_AuxiliarySolve)->Unit(benchmark::kMillisecond);

void BM_SplitNormsLanczos(benchmark::State& s) {
    const ReducedProblem& rp = desk_reduction().rp;
    Vec x = Vec::Ones(rp.d0());
    x *= 2.0 / x.norm();
    const AuxiliarySolution aux = auxiliary_solve(rp, x);
    for (auto _ : s) benchmark::DoNotOptimize(split_norms(rp, aux));
}
BENCHMARK(BM_SplitNormsLanczos)->Unit(benchmark::kMillisecond);

void BM_SchurHessian(benchmark::State& s) {
    const ReducedProblem& rp = desk_reduction().rp;
    Vec x = Vec::Ones(rp.d0());
    x *= 2.0 / x.norm();
    const AuxiliarySolution aux = auxiliary_solve(rp, x);
    for (auto _ : s) benchmark::DoNotOptimize(a_hess_schur(rp, aux));
}
BENCHMARK(BM_SchurHessian)->Unit(benchmark::kMillisecond);

void BM_FundamentalSolution(benchmark::State& s) {
    Mat B(2, 2);
    B << 1.0, 0.3, 0.3, -1.0;
    const double h = 1.0 / static_cast<double>(s.range(0));
    for (auto _ : s) benchmark::DoNotOptimize(fundamental_solution(SymMatFn::constant(B), 20.0, h));
}
BENCHMARK(BM_FundamentalSolution)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
