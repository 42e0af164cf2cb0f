#include "homlab_cli/problem.hpp"

#include "homlab/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace homlab::cli {

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "problem.L", "problem.N", "problem.potential", "potential.a", "potential.b", "potential.gaps",
        "potential.window", "grid.T", "grid.n", "grid.scheme", "spectrum.lo", "spectrum.hi", "index.B", "linear.B",
        "linear.T", "linear.h", "flow.max_dim", "reduce.samples", "tol.null", "tol.orbit", "tol.nontrivial",
        "tol.decay", "search.directions", "search.amplitudes", "search.random", "search.seed", "search.deflation",
        "search.reseed", "search.side", "verify.only", "verify.eta_mutation", "output.dir", "stages"};
    return keys;
}

void validate_stages(const std::vector<std::string>& stages) {
    static const std::vector<std::string> names{"spectrum", "index", "reduce", "solve"};
    auto has = [&](const std::string& s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
    for (const std::string& s : stages)
        if (std::find(names.begin(), names.end(), s) == names.end()) throw ConfigError("key 'stages': unknown stage '" + s + "'");
    if ((has("index") || has("reduce")) && !has("spectrum")) throw ConfigError("key 'stages': index and reduce need spectrum");
    if (has("solve") && !has("reduce")) throw ConfigError("key 'stages': solve needs reduce");
}

RunConfig run_config(const Config& c) {
    const auto unknown = c.unknown_keys(known_keys());
    if (!unknown.empty()) throw ConfigError("unknown key '" + unknown.front() + "'");
    RunConfig r;
    r.L = c.str("problem.L", r.L);
    if (r.L != "split_growth" && r.L != "scalar_growth") throw ConfigError("key 'problem.L': expected split_growth or scalar_growth");
    r.N = static_cast<int>(c.integer("problem.N", r.N));
    if (r.N < 1) throw ConfigError("key 'problem.N': must be >= 1");
    r.potential = c.str("problem.potential", r.potential);
    if (r.potential != "none" && r.potential != "quadratic" && r.potential != "saturating" && r.potential != "even_example")
        throw ConfigError("key 'problem.potential': expected none, quadratic, saturating or even_example");
    r.pot_a = c.num("potential.a", r.pot_a);
    r.pot_b = c.num("potential.b", r.pot_b);
    r.gaps = static_cast<int>(c.integer("potential.gaps", r.gaps));
    r.window = c.num("potential.window", r.window);
    if (r.gaps < 1) throw ConfigError("key 'potential.gaps': must be >= 1");

    r.T = c.num("grid.T", r.T);
    r.n = c.integer("grid.n", r.n);
    if (!(r.T > 0.0)) throw ConfigError("key 'grid.T': must be > 0");
    if (r.n < 3) throw ConfigError("key 'grid.n': must be >= 3");
    const std::string scheme = c.str("grid.scheme", "staggered_forward");
    if (scheme == "staggered_forward") r.scheme = Scheme::staggered_forward;
    else if (scheme == "staggered_backward") r.scheme = Scheme::staggered_backward;
    else if (scheme == "central") r.scheme = Scheme::central;
    else throw ConfigError("key 'grid.scheme': expected staggered_forward, staggered_backward or central");

    r.spec_lo = c.num("spectrum.lo", r.spec_lo);
    r.spec_hi = c.num("spectrum.hi", r.spec_hi);
    if (r.spec_hi < r.spec_lo) throw ConfigError("key 'spectrum.hi': must be >= spectrum.lo");
    r.index_B = c.str("index.B", r.index_B);
    r.linear_B = c.str("linear.B", r.linear_B);
    r.linear_T = c.num("linear.T", r.linear_T);
    r.linear_h = c.num("linear.h", r.linear_h);
    r.flow_max_dim = c.integer("flow.max_dim", r.flow_max_dim);
    r.reduce_samples = static_cast<int>(c.integer("reduce.samples", r.reduce_samples));

    r.tol_null = c.num("tol.null", r.tol_null);
    r.tol_orbit = c.num("tol.orbit", r.tol_orbit);
    r.tol_nontrivial = c.num("tol.nontrivial", r.tol_nontrivial);
    r.decay_tol = c.num("tol.decay", r.decay_tol);
    for (const char* k : {"tol.orbit", "tol.nontrivial", "tol.decay", "linear.T", "linear.h"})
        if (c.has(k) && !(c.num(k, 1.0) > 0.0)) throw ConfigError(std::string("key '") + k + "': must be > 0");
    if (c.has("tol.null") && !(r.tol_null > 0.0)) throw ConfigError("key 'tol.null': must be > 0");

    r.directions = static_cast<int>(c.integer("search.directions", r.directions));
    r.amplitudes = c.nums("search.amplitudes", r.amplitudes);
    r.random = static_cast<int>(c.integer("search.random", r.random));
    r.seed = static_cast<unsigned>(c.integer("search.seed", r.seed));
    r.deflation = c.flag("search.deflation", r.deflation);
    r.reseed = static_cast<int>(c.integer("search.reseed", r.reseed));
    r.side = c.str("search.side", r.side);
    if (r.side != "auto" && r.side != "plus" && r.side != "minus") throw ConfigError("key 'search.side': expected auto, plus or minus");
    if (r.directions < 0 || r.random < 0 || r.reseed < 0) throw ConfigError("key 'search.*': counts must be >= 0");

    r.verify_only = c.list("verify.only", r.verify_only);
    r.eta_mutation = c.str("verify.eta_mutation", r.eta_mutation);
    if (r.eta_mutation != "none" && r.eta_mutation != "typo") throw ConfigError("key 'verify.eta_mutation': expected none or typo");
    r.out_dir = c.str("output.dir", r.out_dir);
    r.stages = c.list("stages", r.stages);
    validate_stages(r.stages);
    return r;
}

SymMatFn growth(const RunConfig& rc) { return rc.L == "split_growth" ? split_growth(rc.N) : scalar_growth(rc.N); }

Problem build_problem(const RunConfig& rc) {
    const Grid grid = make_grid(rc.T, rc.n);
    const SymMatFn L = growth(rc);
    DiscreteOperator A = assemble(L, grid, rc.scheme);
    Vec ev = eigenvalues(A);
    Problem p{grid, L, std::move(A), std::move(ev), std::nullopt};
    p.N = rc.N;
    const int dim = 2 * rc.N;
    if (rc.potential == "quadratic") {
        p.R = quadratic_scalar(dim, rc.pot_b);
        p.B0 = p.B_inf = rc.pot_b;
    } else if (rc.potential == "saturating") {
        p.R = saturating(dim, rc.pot_a, rc.pot_b);
        p.B0 = rc.pot_a + rc.pot_b;
        p.B_inf = rc.pot_a;
        p.side = Side::minus;
    } else if (rc.potential == "even_example") {
        std::vector<double> win;
        for (Index k = 0; k < p.ev.size(); ++k)
            if (std::fabs(p.ev[k]) < rc.window) win.push_back(p.ev[k]);
        const auto first_pos = std::find_if(win.begin(), win.end(), [](double v) { return v > 0.0; });
        if (first_pos == win.begin() || first_pos == win.end())
            throw ConfigError("key 'potential.window': window must contain eigenvalues of both signs");
        const int l = static_cast<int>(first_pos - win.begin()) - 1;
        const Remark13Example ex = remark13_example(win, l, rc.gaps, dim);
        p.R = ex.R;
        p.B0 = ex.B0;
        p.B_inf = ex.B_inf;
    }
    if (rc.side == "plus") p.side = Side::plus;
    if (rc.side == "minus") p.side = Side::minus;
    return p;
}

Mat named_matrix(const Problem& p, const std::string& spec, const std::string& key) {
    const int dim = 2 * p.N;
    auto scalar = [&](double v) -> Mat {
        if (std::isnan(v)) throw ConfigError("key '" + key + "': " + spec + " is undefined for this potential");
        return v * Mat::Identity(dim, dim);
    };
    if (spec == "B0") return scalar(p.B0);
    if (spec == "B_inf") return scalar(p.B_inf);
    const auto items = split_list(spec);
    std::vector<double> vals;
    for (const std::string& s : items) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stod(s, &pos));
            if (pos != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected a number, a diagonal list, B0 or B_inf, got '" + spec + "'");
        }
    }
    if (vals.size() == 1) return scalar(vals[0]);
    if (static_cast<int>(vals.size()) != dim)
        throw ConfigError("key '" + key + "': diagonal needs " + std::to_string(dim) + " entries");
    Mat m = Mat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) m(i, i) = vals[static_cast<std::size_t>(i)];
    return m;
}

}  // namespace homlab::cli
