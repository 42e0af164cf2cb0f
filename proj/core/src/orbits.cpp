#include "homlab/orbits.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>

namespace homlab {

namespace {

double aux_tol(const Vec& x) { return 1e-12 * (1.0 + x.norm()); }

struct Deflation {
    const std::vector<Vec>* found;
    double p;
    double shift;

    // m(x) and grad m(x) / m(x).
    std::pair<double, Vec> eval(const Vec& x) const {
        double m = 1.0;
        Vec dlog = Vec::Zero(x.size());
        for (const Vec& xi : *found) {
            const Vec e = x - xi;
            const double r = std::max(e.norm(), 1e-300);
            const double f = std::pow(r, -p) + shift;
            m *= f;
            dlog += (-p * std::pow(r, -p - 2.0) / f) * e;
        }
        return {m, dlog};
    }
};

bool is_new(const std::vector<Vec>& pts, const Vec& x) {
    for (const Vec& y : pts)
        if ((x - y).norm() <= tol_distinct(std::max(x.norm(), y.norm()))) return false;
    return true;
}

}  // namespace

NewtonResult newton_search(const ReducedProblem& rp, const std::vector<Vec>& seeds, const NewtonOptions& opts) {
    for (const Vec& s : seeds) {
        if (s.size() != rp.d0()) throw DimensionError("newton_search: seed has wrong dimension");
        if (!s.allFinite()) throw DomainError("newton_search: seed is not finite");
    }
    NewtonResult out;
    std::deque<Vec> queue(seeds.begin(), seeds.end());
    const std::size_t reseed_cap = 4 * seeds.size() + 16;
    std::size_t reseeded = 0;
    const Deflation defl{&out.points, opts.deflation_power, opts.deflation_shift};
    const bool even = opts.mirror_even && rp.R().even();

    auto accept = [&](const Vec& x) {
        if (!is_new(out.points, x)) return;
        out.points.push_back(x);
        if (even && x.norm() > 0.0 && is_new(out.points, -x)) {
            const Vec g = a_grad(rp, auxiliary_solve(rp, -x, nullptr, aux_tol(x)));
            if (g.norm() <= tol_crit(x)) out.points.push_back(-x);
        }
        if (!opts.deflation || opts.reseed_directions <= 0 || reseeded >= reseed_cap) return;
        try {
            const AuxiliarySolution aux = auxiliary_solve(rp, x, nullptr, aux_tol(x));
            Eigen::SelfAdjointEigenSolver<Mat> es(a_hess_schur(rp, aux));
            std::vector<Index> order(static_cast<std::size_t>(es.eigenvalues().size()));
            std::iota(order.begin(), order.end(), Index{0});
            std::sort(order.begin(), order.end(), [&](Index a, Index b) {
                return std::fabs(es.eigenvalues()[a]) < std::fabs(es.eigenvalues()[b]);
            });
            const double step = std::max(0.5, 0.5 * x.norm());
            const int nd = std::min<int>(opts.reseed_directions, static_cast<int>(order.size()));
            for (int k = 0; k < nd; ++k) {
                const Vec v = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
                queue.push_back(x + step * v);
                queue.push_back(x - step * v);
                reseeded += 2;
            }
        } catch (const NumericalError&) {
            // Singular linearization: no Hessian directions to re-seed along.
        }
    };

    std::size_t seed_id = 0;
    while (!queue.empty()) {
        Vec x = queue.front();
        queue.pop_front();
        NewtonLog lg;
        lg.seed = seed_id++;
        ++out.seeds_used;
        Vec warm;
        std::vector<double> history;
        try {
            for (int it = 0; it <= opts.max_iter; ++it) {
                AuxiliarySolution aux = auxiliary_solve(rp, x, warm.size() ? &warm : nullptr, aux_tol(x));
                warm = aux.z_perp;
                const Vec g = a_grad(rp, aux);
                lg.iterations = it;
                lg.grad_norm = g.norm();
                if (lg.grad_norm <= tol_crit(x)) {
                    lg.converged = true;
                    break;
                }
                if (it == opts.max_iter) break;
                history.push_back(lg.grad_norm);
                const auto w = static_cast<std::size_t>(std::max(1, opts.stall_window));
                if (history.size() > w && history.back() > 0.9 * history[history.size() - 1 - w]) {
                    lg.note = "stalled";
                    break;
                }
                Vec d = newton_direction(rp, aux, g);
                double merit = lg.grad_norm;
                bool deflate = opts.deflation && !out.points.empty();
                if (deflate) {
                    const auto [m, dlog] = defl.eval(x);
                    const double denom = 1.0 - dlog.dot(d);
                    if (std::fabs(denom) > 1e-12) d /= denom;
                    merit *= m;
                }
                double alpha = 1.0;
                bool moved = false;
                for (int ls = 0; ls <= opts.max_backtracks; ++ls, alpha *= 0.5) {
                    const Vec xt = x + alpha * d;
                    const AuxiliarySolution at = auxiliary_solve(rp, xt, &warm, aux_tol(xt));
                    double mt = a_grad(rp, at).norm();
                    if (deflate) mt *= defl.eval(xt).first;
                    if (mt < (1.0 - 1e-4 * alpha) * merit) {
                        x = xt;
                        warm = at.z_perp;
                        moved = true;
                        break;
                    }
                }
                if (!moved) {
                    lg.note = "line search stalled";
                    break;
                }
            }
        } catch (const NumericalError& e) {
            lg.note = e.what();
        }
        if (lg.converged) {
            if (is_new(out.points, x)) accept(x);
            else lg.note = "duplicate";
        } else if (lg.note.empty()) {
            lg.note = "max_iter exhausted";
        }
        out.log.push_back(lg);
    }
    return out;
}

std::vector<Vec> generate_seeds(const ReducedProblem& rp, int directions, const std::vector<double>& amplitudes,
                                int random, unsigned seed) {
    const Index d0 = rp.d0();
    std::vector<Index> order(static_cast<std::size_t>(d0));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::fabs(rp.lambda0()[a]) < std::fabs(rp.lambda0()[b]); });
    std::vector<Vec> seeds;
    const int nd = std::min<int>(directions, static_cast<int>(d0));
    for (int k = 0; k < nd; ++k)
        for (double a : amplitudes)
            for (double s : {1.0, -1.0}) {
                Vec x = Vec::Zero(d0);
                x[order[static_cast<std::size_t>(k)]] = s * a;
                seeds.push_back(x);
            }
    if (random > 0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nrm;
        const double lo = amplitudes.empty() ? 1.0 : *std::min_element(amplitudes.begin(), amplitudes.end());
        const double hi = amplitudes.empty() ? 1.0 : *std::max_element(amplitudes.begin(), amplitudes.end());
        std::uniform_real_distribution<double> amp(lo, hi);
        const int span = std::min<int>(std::max(2 * nd, 1), static_cast<int>(d0));
        for (int r = 0; r < random; ++r) {
            Vec x = Vec::Zero(d0);
            for (int k = 0; k < span; ++k) x[order[static_cast<std::size_t>(k)]] = nrm(rng);
            const double nx = x.norm();
            if (nx > 0.0) x *= amp(rng) / nx;
            seeds.push_back(x);
        }
    }
    return seeds;
}

Morse morse_data(const ReducedProblem& rp, const AuxiliarySolution& aux, std::string* source) {
    const double tol_zero = 1e-7 * (1.0 + rp.beta());
    try {
        const DiscreteOperator D = multiplier(rp.hess_blocks(aux.z), rp.grid());
        BandedLU lu((rp.A() - D).matrix);
        if (!lu.singular()) {
            const Mat G = rp.h() * (rp.V0().transpose() * lu.solve(rp.V0()));
            Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly);
            const Vec& g = es.eigenvalues();
            bool clean = true;
            Morse m;
            for (Index k = 0; k < g.size(); ++k) {
                if (!(std::fabs(g[k]) > 0.0) || 1.0 / std::fabs(g[k]) <= tol_zero) clean = false;
                if (g[k] < 0.0) ++m.minus;
            }
            if (clean) {
                if (source) *source = "schur";
                return m;
            }
        }
    } catch (const NumericalError&) {
    }
    const Mat H = a_hess(rp, aux.x);
    Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
    const double tol = 1e-6 * (1.0 + rp.beta());
    Morse m;
    for (Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double v = es.eigenvalues()[k];
        if (v < -tol) ++m.minus;
        else if (v <= tol) ++m.zero;
    }
    if (source) *source = "finite-difference";
    return m;
}

Orbit lift(const ReducedProblem& rp, const Vec& x, double tol_orbit) {
    const AuxiliarySolution aux = auxiliary_solve(rp, x, nullptr, aux_tol(x));
    Orbit o;
    o.x = x;
    o.z = aux.z;
    const double h = rp.h();
    o.residual = l2_norm(rp.A().matrix.apply(aux.z) - rp.grad_field(aux.z), h);
    if (!(o.residual <= tol_orbit)) {
        std::ostringstream os;
        os << "lift: residual " << o.residual << " exceeds tol_orbit " << tol_orbit;
        throw NumericalError(os.str());
    }
    o.l2_norm = l2_norm(aux.z, h);
    o.sup_norm = sup_norm(aux.z, rp.dim());
    const DiscreteOperator D = multiplier(rp.hess_blocks(aux.z), rp.grid());
    o.index_pair = relative_index(rp.inertia_A(), (rp.A() - D).matrix, rp.tol_null());
    o.dim_eminus_X0 = rp.dim_Eminus_X0();
    o.morse = morse_data(rp, aux, &o.hessian_source);
    return o;
}

Guarantee guarantee(const GuaranteeInput& in) {
    if (in.nu0 < 0 || in.nu1 < 0) throw DomainError("guarantee: negative nullity");
    if (in.N < 1) throw DomainError("guarantee: N must be positive");
    Guarantee g;
    if (in.sandwich) {
        if (in.mu1 >= in.mu0 && in.mu1 <= in.mu0 + in.nu0) {
            g.rule = "sandwich: mu1 inside [mu0, mu0+nu0]";
            return g;
        }
        g.count = 1;
        g.rule = "sandwich: mu1 outside [mu0, mu0+nu0]";
        if (in.nu0 == 0 && std::abs(in.mu1 - in.mu0) >= in.N) {
            g.count = 2;
            g.rule = "sandwich: nu0 = 0 and |mu1 - mu0| >= N";
        }
        return g;
    }
    if (in.nu0 != 0) {
        g.rule = "one-sided: needs nu0 = 0";
        return g;
    }
    // A degenerate B_inf is replaced by a shifted one: minus-shift on the
    // plus side keeps mu, plus-shift on the minus side gives mu + nu.
    const int mu_inf = in.side == Side::plus ? in.mu1 : in.mu1 + in.nu1;
    const int gap = in.side == Side::plus ? mu_inf - in.mu0 : in.mu0 - mu_inf;
    if (gap < 2) {
        g.rule = "one-sided: index gap below 2";
        return g;
    }
    if (in.even) {
        g.count = gap - 1;
        g.pairs = true;
        g.rule = "even one-sided: |mu_inf - mu0| - 1 pairs";
    } else {
        g.count = 1;
        g.rule = "one-sided: index gap at least 2";
    }
    return g;
}

int count_nontrivial(const std::vector<Orbit>& orbits, bool even, double tol_nontrivial) {
    std::vector<const Orbit*> nt;
    for (const Orbit& o : orbits)
        if (o.nontrivial(tol_nontrivial)) nt.push_back(&o);
    if (!even) return static_cast<int>(nt.size());
    std::vector<bool> used(nt.size(), false);
    int classes = 0;
    for (std::size_t i = 0; i < nt.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        ++classes;
        for (std::size_t j = i + 1; j < nt.size(); ++j) {
            if (used[j]) continue;
            const double d = (nt[i]->z + nt[j]->z).norm() / std::max(1e-300, nt[i]->z.norm());
            if (d <= 1e-3) used[j] = true;
        }
    }
    return classes;
}

MultiplicityVerdict verify_multiplicity(const Guarantee& g, const std::vector<Orbit>& orbits, bool even,
                                        double tol_nontrivial) {
    MultiplicityVerdict v;
    v.required = g.count;
    v.found = count_nontrivial(orbits, even && g.pairs, tol_nontrivial);
    v.pass = v.found >= v.required;
    if (!v.pass) {
        std::ostringstream os;
        os << "guarantee unmet (" << v.found << " of " << v.required << (g.pairs ? " pairs" : " orbits")
           << "); enlarge seed set";
        v.diagnostic = os.str();
    }
    return v;
}

SearchReport run_search(const ReducedProblem& rp, const std::vector<Vec>& seeds, const Guarantee& g,
                        const NewtonOptions& opts, double tol_orbit, std::optional<double> k_tag) {
    const NewtonResult nr = newton_search(rp, seeds, opts);
    SearchReport rep;
    rep.seeds_used = nr.seeds_used;
    rep.guarantee = g;
    const double h = rp.h();
    for (const Vec& x : nr.points) {
        Orbit o;
        try {
            o = lift(rp, x, tol_orbit);
        } catch (const NumericalError&) {
            ++rep.rejected;
            continue;
        }
        o.k_tag = k_tag;
        bool dup = false;
        for (const Orbit& p : rep.orbits)
            if (l2_norm(o.z - p.z, h) <= tol_distinct(std::max(o.l2_norm, p.l2_norm))) dup = true;
        if (!dup) rep.orbits.push_back(std::move(o));
    }
    const MultiplicityVerdict v = verify_multiplicity(g, rep.orbits, rp.R().even());
    rep.nontrivial_found = v.found;
    rep.pass = v.pass;
    rep.diagnostic = v.diagnostic;
    return rep;
}

AprioriReport apriori_bound_check(const std::vector<FamilyRun>& family, int mu_inf, double h, double rel_tol) {
    AprioriReport rep;
    if (family.empty()) return rep;
    for (const auto& run : family)
        for (const Orbit& o : run.orbits) rep.sup_over_k = std::max(rep.sup_over_k, o.index_pair.mu <= mu_inf - 1 ? o.sup_norm : 0.0);
    for (const Orbit& o : family.front().orbits) {
        if (!o.nontrivial() || o.index_pair.mu > mu_inf - 1) continue;
        AprioriMatch m;
        m.mu = o.index_pair.mu;
        m.sup_norms.push_back(o.sup_norm);
        m.within_identity_region = o.sup_norm < family.front().M_k;
        bool ok = true;
        for (std::size_t k = 1; k < family.size() && ok; ++k) {
            const Orbit* best = nullptr;
            double bd = 0.0;
            for (const Orbit& c : family[k].orbits) {
                if (c.index_pair.mu != o.index_pair.mu || c.index_pair.nu != o.index_pair.nu) continue;
                if (c.z.size() != o.z.size()) continue;
                const double d = l2_norm(c.z - o.z, h);
                if (!best || d < bd) {
                    best = &c;
                    bd = d;
                }
            }
            if (!best || bd > 0.1 * std::max(1.0, o.l2_norm)) {
                ok = false;
                break;
            }
            m.sup_norms.push_back(best->sup_norm);
            m.within_identity_region = m.within_identity_region && best->sup_norm < family[k].M_k;
        }
        if (!ok) {
            ++rep.unmatched;
            continue;
        }
        const auto [lo, hi] = std::minmax_element(m.sup_norms.begin(), m.sup_norms.end());
        m.variation = *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
        rep.max_variation = std::max(rep.max_variation, m.variation);
        rep.matches.push_back(std::move(m));
    }
    rep.pass = rep.max_variation <= rel_tol;
    return rep;
}

}  // namespace homlab
