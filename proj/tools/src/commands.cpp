#include "homlab_cli/commands.hpp"
#include "homlab_cli/suite.hpp"

#include "homlab/linear.hpp"
#include "homlab/potentials.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace homlab::cli {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
public:
    Stopwatch(Context& ctx, std::string name) : ctx_(ctx), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        ctx_.timings[name_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    Context& ctx_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

json ip_json(const IndexPair& ip) { return json{{"mu", ip.mu}, {"nu", ip.nu}, {"tol_stable", ip.stable}}; }

IndexPair index_on(const DiscreteOperator& A, const Mat& B, double tol) {
    return relative_index(A, multiplier(SymMatFn::constant(B), A.grid), tol);
}

Grid refined_grid(const RunConfig& rc) { return make_grid(rc.T, 2 * rc.n); }

void write_csv_header(std::ofstream& f, const std::vector<std::string>& cols) {
    for (std::size_t k = 0; k < cols.size(); ++k) f << (k ? "," : "") << cols[k];
    f << "\n";
}

fs::path prepare(const Context& ctx) {
    fs::create_directories(ctx.out);
    return ctx.out;
}

void log(const Context& ctx, const std::string& s) {
    if (ctx.log) *ctx.log << s << "\n";
}

}  // namespace

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path);
    f << j.dump(2) << "\n";
}

void write_timings(const Context& ctx) {
    fs::create_directories(ctx.out);
    const fs::path path = ctx.out / "timings.json";
    json j = json::object();
    if (fs::exists(path)) {
        std::ifstream in(path);
        try {
            in >> j;
        } catch (const std::exception&) {
            j = json::object();
        }
    }
    for (const auto& [k, v] : ctx.timings) j[k] = v;
    write_json(path, j);
}

json certified_index(const Problem& p, const RunConfig& rc, const Mat& B) {
    const IndexPair ip = index_on(p.A, B, rc.tol_null);
    json j = ip_json(ip);
    const DiscreteOperator A2 = assemble(p.L, refined_grid(rc), rc.scheme);
    Mat checked = B;
    if (ip.nu > 0) {
        // Degenerate B: shift down by half the distance to the nearest other eigenvalue.
        const double c = B.diagonal().mean();
        double gap = 1.0;
        for (Index k = 0; k < p.ev.size(); ++k) {
            const double d = std::fabs(p.ev[k] - c);
            if (d > 1e-6 * (1.0 + std::fabs(c))) gap = std::min(gap, d);
        }
        const double eps = 0.5 * gap;
        checked = B - eps * Mat::Identity(B.rows(), B.cols());
        const IndexPair sh = index_on(p.A, checked, rc.tol_null);
        j["degenerate"] = true;
        j["suggestion"] = json{{"eps", eps}, {"shifted", ip_json(sh)},
                               {"note", "B is degenerate (nu >= 1); use B - eps I, whose index is nondegenerate"}};
        const IndexPair fine = index_on(A2, checked, rc.tol_null);
        const IndexPair coarse = sh;
        j["grid_stable"] = fine.mu == coarse.mu && fine.nu == coarse.nu;
        j["refined"] = json{{"n", 2 * rc.n}, {"of", "shifted"}, {"index", ip_json(fine)}};
    } else {
        const IndexPair fine = index_on(A2, B, rc.tol_null);
        j["degenerate"] = false;
        j["grid_stable"] = fine.mu == ip.mu && fine.nu == ip.nu;
        j["refined"] = json{{"n", 2 * rc.n}, {"index", ip_json(fine)}};
    }
    return j;
}

json cmd_spectrum(Context& ctx) {
    Stopwatch sw(ctx, "spectrum");
    const RunConfig& rc = ctx.rc;
    const Grid g = make_grid(rc.T, rc.n);
    const DiscreteOperator A = assemble(growth(rc), g, rc.scheme);
    const EigenDecomp d = spectrum(A, rc.spec_lo, rc.spec_hi);
    const fs::path dir = prepare(ctx);
    std::ofstream csv(dir / "spectrum.csv");
    write_csv_header(csv, {"label", "lambda", "residual"});
    csv << std::setprecision(17);
    double worst = 0.0;
    for (Index k = 0; k < d.size(); ++k) {
        csv << d.signed_label(k) << "," << d.values[k] << "," << d.residuals[k] << "\n";
        worst = std::max(worst, d.residuals[k] / (1.0 + std::fabs(d.values[k])));
    }
    json j{{"command", "spectrum"},
           {"grid", {{"T", rc.T}, {"n", rc.n}, {"h", g.h}}},
           {"window", {rc.spec_lo, rc.spec_hi}},
           {"count", d.size()},
           {"n_nonpositive", d.n_nonpositive},
           {"max_relative_residual", worst},
           {"values", std::vector<double>(d.values.data(), d.values.data() + d.size())}};
    if (rc.refine) {
        const EigenDecomp f = spectrum(assemble(growth(rc), refined_grid(rc), rc.scheme), rc.spec_lo, rc.spec_hi);
        json r{{"n", 2 * rc.n}, {"count", f.size()}};
        if (f.size() == d.size() && d.size() > 0)
            r["max_relative_drift"] = ((f.values - d.values).cwiseAbs().array() / (1.0 + d.values.cwiseAbs().array())).maxCoeff();
        j["refined"] = r;
    }
    write_json(dir / "spectrum.json", j);
    log(ctx, "spectrum: " + std::to_string(d.size()) + " eigenvalues in window");
    return j;
}

json cmd_index(Context& ctx) {
    Stopwatch sw(ctx, "index");
    const RunConfig& rc = ctx.rc;
    const Problem p = build_problem(rc);
    const Mat B = named_matrix(p, rc.index_B, "index.B");
    json j{{"command", "index"}, {"B", rc.index_B}, {"n_zero_A", inertia(p.A.matrix, rc.tol_null).zero}};
    j["index"] = certified_index(p, rc, B);
    write_json(prepare(ctx) / "index.json", j);
    if (!j["index"]["grid_stable"].get<bool>()) throw IndexNotConverged("index not converged: mu differs between n and 2n");
    log(ctx, "index: mu " + std::to_string(j["index"]["mu"].get<int>()) + ", nu " + std::to_string(j["index"]["nu"].get<int>()));
    return j;
}

json cmd_flow(Context& ctx) {
    Stopwatch sw(ctx, "flow");
    const RunConfig& rc = ctx.rc;
    const Problem p = build_problem(rc);
    if (p.A.size() > rc.flow_max_dim)
        throw ConfigError("key 'flow.max_dim': operator size " + std::to_string(p.A.size()) + " exceeds " +
                          std::to_string(rc.flow_max_dim) + "; use a coarser grid");
    const Mat B = named_matrix(p, rc.index_B, "index.B");
    const Mat A = p.A.matrix.dense();
    const Mat MB = multiplier(SymMatFn::constant(B), p.grid).matrix.dense();
    const FlowResult fr = spectral_flow(linear_pencil(A, MB), -1, rc.tol_null);
    const IndexPair ip = relative_index(A, MB, rc.tol_null);
    json crossings = json::array();
    for (const Crossing& c : fr.crossings)
        crossings.push_back({{"theta", c.theta}, {"kernel_dim", c.kernel_dim}, {"signature", c.signature}, {"endpoint", c.endpoint}});
    json j{{"command", "flow"}, {"B", rc.index_B},      {"sf", fr.sf},
           {"index", ip_json(ip)},  {"agree", ip.mu == -fr.sf}, {"regular", fr.regular},
           {"regularization", fr.regularization}, {"crossings", crossings}};
    write_json(prepare(ctx) / "flow.json", j);
    log(ctx, "flow: sf " + std::to_string(fr.sf));
    return j;
}

namespace {

const Potential& require_potential(const Problem& p) {
    if (!p.R) throw ConfigError("key 'problem.potential': this command needs a potential");
    return *p.R;
}

}  // namespace

json cmd_reduce(Context& ctx) {
    Stopwatch sw(ctx, "reduce");
    const RunConfig& rc = ctx.rc;
    const Problem p = build_problem(rc);
    const Potential& R = require_potential(p);
    const BetaChoice bc = choose_beta(R.bound_c(), 0.0, p.ev);
    const ReducedProblem rp = build_reduction(p.A, R, bc.beta);
    const double bound = lemma22_bound(bc.beta, R.bound_c(), rp.eps(), rp.eps());
    std::mt19937_64 rng(rc.seed);
    std::normal_distribution<double> nrm;
    json samples = json::array();
    double worst = 0.0;
    for (int s = 0; s < rc.reduce_samples; ++s) {
        Vec x(rp.d0());
        for (Index i = 0; i < x.size(); ++i) x[i] = nrm(rng);
        x *= (0.5 + s) / x.norm();
        const AuxiliarySolution aux = auxiliary_solve(rp, x);
        const SplitNorms sn = split_norms(rp, aux);
        const double ratio = (sn.u_plus + sn.u_minus) / l2_norm(rp.embed(x), rp.h());
        worst = std::max(worst, ratio);
        samples.push_back({{"x_norm", x.norm()}, {"iterations", aux.iterations}, {"contraction", aux.contraction},
                           {"residual", aux.residual}, {"u_ratio", ratio}});
    }
    json j{{"command", "reduce"},
           {"beta", bc.beta},
           {"threshold", bc.threshold},
           {"gap", {bc.gap_lo, bc.gap_hi}},
           {"d0", rp.d0()},
           {"dim_Eminus_X0", rp.dim_Eminus_X0()},
           {"eps", rp.eps()},
           {"C_R", R.bound_c()},
           {"bound", bound},
           {"max_u_ratio", worst},
           {"bound_holds", worst <= bound},
           {"samples", samples}};
    write_json(prepare(ctx) / "reduce.json", j);
    log(ctx, "reduce: beta " + std::to_string(bc.beta) + ", d0 " + std::to_string(rp.d0()));
    return j;
}

json cmd_solve(Context& ctx) {
    Stopwatch sw(ctx, "solve");
    const RunConfig& rc = ctx.rc;
    const Problem p = build_problem(rc);
    const Potential& R = require_potential(p);
    const int dim = 2 * p.N;
    const json i0 = certified_index(p, rc, p.B0 * Mat::Identity(dim, dim));
    const json ii = certified_index(p, rc, p.B_inf * Mat::Identity(dim, dim));
    const fs::path dir = prepare(ctx);
    GuaranteeInput in{i0["mu"].get<int>(), i0["nu"].get<int>(), ii["mu"].get<int>(), ii["nu"].get<int>(),
                      R.even(), p.N, false, p.side};
    const Guarantee g = guarantee(in);
    json j{{"command", "solve"},
           {"potential", rc.potential},
           {"B0", p.B0},
           {"B_inf", p.B_inf},
           {"side", p.side == Side::plus ? "plus" : "minus"},
           {"index_B0", i0},
           {"index_B_inf", ii},
           {"guarantee", {{"count", g.count}, {"pairs", g.pairs}, {"rule", g.rule}}}};
    if (!i0["grid_stable"].get<bool>() || !ii["grid_stable"].get<bool>()) {
        write_json(dir / "solve.json", j);
        throw IndexNotConverged("index not converged: guarantee inputs differ between n and 2n");
    }

    const BetaChoice bc = choose_beta(R.bound_c(), 0.0, p.ev);
    const ReducedProblem rp = build_reduction(p.A, R, bc.beta);
    NewtonOptions opts;
    opts.deflation = rc.deflation;
    opts.reseed_directions = rc.reseed;
    const auto seeds = generate_seeds(rp, rc.directions, rc.amplitudes, rc.random, rc.seed);
    const SearchReport rep = run_search(rp, seeds, g, opts, rc.tol_orbit);
    const MultiplicityVerdict v = verify_multiplicity(g, rep.orbits, R.even(), rc.tol_nontrivial);

    fs::create_directories(dir / "orbits");
    json orbits = json::array();
    for (std::size_t k = 0; k < rep.orbits.size(); ++k) {
        const Orbit& o = rep.orbits[k];
        const std::string file = "orbits/orbit_" + std::to_string(k) + ".csv";
        std::ofstream csv(dir / file);
        std::vector<std::string> cols{"t"};
        for (int c = 0; c < dim; ++c) cols.push_back("z" + std::to_string(c));
        write_csv_header(csv, cols);
        csv << std::setprecision(17);
        for (Index i = 0; i < p.grid.n; ++i) {
            csv << p.grid.node(i);
            for (int c = 0; c < dim; ++c) csv << "," << o.z[dim * i + c];
            csv << "\n";
        }
        orbits.push_back({{"file", file},
                          {"nontrivial", o.nontrivial(rc.tol_nontrivial)},
                          {"l2_norm", o.l2_norm},
                          {"sup_norm", o.sup_norm},
                          {"residual", o.residual},
                          {"morse", {{"minus", o.morse.minus}, {"zero", o.morse.zero}}},
                          {"index", {{"mu", o.index_pair.mu},
                                     {"nu", o.index_pair.nu},
                                     {"tol_stable", o.index_pair.stable},
                                     {"grid_stable", nullptr},
                                     {"grid_certificate", "unconverged: not refined"}}},
                          {"dim_Eminus_X0", o.dim_eminus_X0},
                          {"index_identity", o.index_identity()},
                          {"hessian_source", o.hessian_source}});
    }
    j["reduction"] = {{"beta", bc.beta}, {"d0", rp.d0()}, {"dim_Eminus_X0", rp.dim_Eminus_X0()}, {"eps", rp.eps()}};
    j["search"] = {{"seeds", seeds.size()}, {"seeds_used", rep.seeds_used}, {"rejected", rep.rejected},
                   {"nontrivial_found", rep.nontrivial_found}};
    j["orbits"] = orbits;
    j["verdict"] = {{"pass", v.pass}, {"found", v.found}, {"required", v.required}, {"diagnostic", v.diagnostic}};
    write_json(dir / "solve.json", j);
    log(ctx, "solve: guarantee " + std::to_string(g.count) + ", found " + std::to_string(v.found) + ", verdict " +
                 (v.pass ? "pass" : "fail"));
    return j;
}

json cmd_linear(Context& ctx) {
    Stopwatch sw(ctx, "linear");
    const RunConfig& rc = ctx.rc;
    const Problem p = build_problem(rc);
    const Mat B = named_matrix(p, rc.linear_B, "linear.B");
    const SymplecticPath path = fundamental_solution(SymMatFn::constant(B), rc.linear_T, rc.linear_h);
    const StableSubspace s = stable_subspace(path, rc.decay_tol);
    NullityOptions no;
    no.decay_tol = rc.decay_tol;
    const NullityReport nr = nullity_crosscheck(p.L, SymMatFn::constant(B), p.grid, no);
    json j{{"command", "linear"},
           {"B", rc.linear_B},
           {"fundamental_solution",
            {{"T", rc.linear_T}, {"h", path.h}, {"defect", path.defect}, {"det_error", path.det_error}}},
           {"stable_subspace",
            {{"dim", s.dim},
             {"certificate", s.certificate},
             {"inconclusive", s.inconclusive},
             {"j_transversal", j_transversality(s)}}},
           {"nullity",
            {{"nu_index", nr.nu_index},
             {"dim_forward", nr.dim_forward},
             {"dim_backward", nr.dim_backward},
             {"dim_intersection", nr.dim_intersection},
             {"inconclusive", nr.inconclusive},
             {"agree", nr.agree}}}};
    write_json(prepare(ctx) / "linear.json", j);
    log(ctx, "linear: stable dim " + std::to_string(s.dim) + ", nullity agree " + (nr.agree ? "yes" : "no"));
    return j;
}

json cmd_verify(Context& ctx) {
    Stopwatch sw(ctx, "verify");
    const RunConfig& rc = ctx.rc;
    const EtaFns eta = rc.eta_mutation == "typo" ? mistyped_eta() : standard_eta();
    const auto results = run_suite(rc.verify_only, eta, rc.seed);
    json props = json::array();
    bool all = true;
    for (const PropertyResult& r : results) {
        props.push_back({{"suite", r.suite}, {"name", r.name}, {"pass", r.pass}, {"value", r.value}, {"threshold", r.threshold}});
        all = all && r.pass;
    }
    json j{{"command", "verify"}, {"eta_mutation", rc.eta_mutation}, {"pass", all}, {"properties", props}};
    write_json(prepare(ctx) / "verify.json", j);
    log(ctx, std::string("verify: ") + (all ? "all properties pass" : "some properties fail"));
    return j;
}

json cmd_report(Context& ctx) {
    json stages = json::array();
    for (const std::string& s : ctx.rc.stages) {
        json out;
        if (s == "spectrum") out = cmd_spectrum(ctx);
        else if (s == "index") out = cmd_index(ctx);
        else if (s == "reduce") out = cmd_reduce(ctx);
        else out = cmd_solve(ctx);
        stages.push_back({{"stage", s}, {"output", out}});
    }
    json j{{"command", "report"}, {"config", ctx.config}, {"stages", stages}};
    write_json(prepare(ctx) / "run_record.json", j);
    return j;
}

}  // namespace homlab::cli
