#include "parcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stencil.hpp"

namespace parcap {

namespace {

double face_integral(const Field& u, double q, double eps, int level_from) {
    const GridSpec& g = u.grid();
    detail::FaceOps ops(g);
    std::vector<double> ext;
    double total = 0;
    for (int m = level_from; m <= g.nt(); ++m) {
        ops.ext.fill(u.level(m), nullptr, g.level_time(m), ext);
        total += g.tau * q * ops.gradient_energy(ext, q, eps);
    }
    return total;
}

}  // namespace

double energy(const Field& u) {
    const GridSpec& g = u.grid();
    const double hn = std::pow(g.h, g.n);
    double sup_l2 = 0;
    for (int m = 0; m <= g.nt(); ++m) {
        double s = 0;
        for (double v : u.level(m)) s += v * v;
        sup_l2 = std::max(sup_l2, s * hn);
    }
    return sup_l2 + face_integral(u, g.pval(), 0.0, 1);
}

double v_norm(const Field& u, double exponent) {
    const double q = exponent > 0 ? exponent : u.grid().pval();
    return std::pow(face_integral(u, q, 0.0, 1), 1.0 / q);
}

DualNormResult dual_norm_full(const Field& v, double exponent, const SolverParams& params) {
    const GridSpec& g = v.grid();
    const double q = exponent > 0 ? exponent : g.pval();
    const double qp = q / (q - 1.0);
    DualNormResult out;
    out.w = Field(g);
    out.slice_gradnorm_p.assign(g.nt() + 1, 0.0);
    detail::FaceOps ops(g);
    detail::StepSolver solver(g);
    std::vector<double> ext;
    double acc = 0;
    for (int m = 1; m <= g.nt(); ++m) {
        detail::StepProblem pr;
        pr.grid = &g;
        pr.t = g.level_time(m);
        pr.source = v.level(m);
        pr.elliptic = true;
        pr.exponent = q;
        pr.step_index = m;
        auto res = solver.solve(pr, params);
        std::copy(res.u.begin(), res.u.end(), out.w.mutable_level(m).begin());
        ops.ext.fill(out.w.level(m), nullptr, pr.t, ext);
        const double gn = q * ops.gradient_energy(ext, q, 0.0);  // ||grad w||_q^q
        out.slice_gradnorm_p[m] = gn;
        acc += gn * g.tau;
    }
    out.value = std::pow(acc, 1.0 / qp);
    return out;
}

double dual_norm(const Field& v, double exponent, const SolverParams& params) {
    return dual_norm_full(v, exponent, params).value;
}

Field time_derivative(const Field& u) {
    const GridSpec& g = u.grid();
    Field d(g);
    for (int m = 1; m <= g.nt(); ++m)
        for (long sp = 0; sp < g.n_space_cells(); ++sp)
            d.at(sp, m) = (u.at(sp, m) - u.at(sp, m - 1)) / g.tau;
    return d;
}

NormReport norm_report(const Field& u, const SolverParams& params) {
    const double p = u.grid().pval();
    const double pp = p / (p - 1.0);
    NormReport r;
    r.v_norm = v_norm(u);
    r.vdual_norm = dual_norm(time_derivative(u), 0, params);
    r.w_norm = std::pow(r.v_norm, p) + std::pow(r.vdual_norm, pp);
    r.energy = energy(u);
    return r;
}

// ---------------------------------------------------------------------------
// Capacity estimators
// ---------------------------------------------------------------------------

namespace {

void require_margin(const PointSet& K) {
    if (!K.compactly_contained(1))
        throw InvalidArgument("capacity: set violates the one-cell margin from the parabolic boundary");
}

double balayage_value(const PointSet& K, const SolverParams& params) {
    if (K.empty()) return 0.0;
    return reduite(1.0, K, params).mu.total_mass();
}

double energy_value(const PointSet& K, const SolverParams& params) {
    if (K.empty()) return 0.0;
    return energy(reduite(1.0, K, params).R);
}

double variational_value(const PointSet& K, const SolverParams& params,
                         const CapacityOptions& opts, std::vector<std::string>& warnings);

// Shared trace/T-stabilization wrapper around a per-grid evaluator.
CapacityEstimate run_estimator(const PointSet& K, const char* method, const SolverParams&,
                               const CapacityOptions& opts,
                               const std::function<double(const PointSet&, std::vector<std::string>&)>& eval) {
    if (!K.empty()) require_margin(K);
    CapacityEstimate est;
    est.method = method;
    PointSet cur = K;
    for (int lvl = 0; lvl <= opts.refine_levels; ++lvl) {
        if (lvl > 0) cur = cur.refined(1);
        est.trace.push_back(eval(cur, est.warnings));
    }
    est.value = est.trace.back();
    if (est.trace.size() >= 2) {
        const double a = est.trace[est.trace.size() - 2], b = est.trace.back();
        est.last_two_osc = (a == 0 && b == 0) ? 0 : std::abs(b - a) / std::max(std::abs(a), std::abs(b));
    }
    if (opts.t_check && !K.empty()) {
        const GridSpec big = K.grid().with_T_factor(2.0);
        const double v2 = eval(K.on_grid(big), est.warnings);
        est.t_stab_change = est.trace.front() == 0 ? 0 : std::abs(v2 - est.trace.front()) /
                                                             std::max(est.trace.front(), 1e-300);
        est.t_stabilized = est.t_stab_change < 0.01;
        if (!est.t_stabilized)
            est.warnings.push_back("capacity not T-stabilized: doubling T changed the value by " +
                                   format_double(est.t_stab_change));
    }
    return est;
}

}  // namespace

CapacityEstimate cap_balayage(const PointSet& K, const SolverParams& params,
                              const CapacityOptions& opts) {
    return run_estimator(K, "balayage-mass", params, opts,
                         [&](const PointSet& S, std::vector<std::string>&) {
                             return balayage_value(S, params);
                         });
}

CapacityEstimate cap_energy(const PointSet& K, const SolverParams& params,
                            const CapacityOptions& opts) {
    return run_estimator(K, "energy", params, opts,
                         [&](const PointSet& S, std::vector<std::string>&) {
                             return energy_value(S, params);
                         });
}

namespace {

// Projected descent on J(phi) = ||grad phi||_p^p + ||phi_t||_V'^p' subject to
// phi >= 1 on K, phi = 0 at the terminal level (parabolic boundary values are
// structural). Returns the best feasible objective: an upper bound on the
// discrete infimum.
double variational_descent(const PointSet& K, const SolverParams& params,
                           const CapacityOptions& opts, Field phi0,
                           std::vector<std::string>& warnings) {
    const GridSpec& g = K.grid();
    const double p = g.pval();
    const double pp = p / (p - 1.0);
    const long nsp = g.n_space_cells();
    const int nt = g.nt();

    auto project = [&](Field& phi) {
        for (long c : K.cells()) {
            const long sp = g.cell_space(c);
            const int m = g.cell_level(c);
            if (phi.at(sp, m) < 1.0) phi.at(sp, m) = 1.0;
        }
        for (long sp = 0; sp < nsp; ++sp) phi.at(sp, nt) = 0.0;  // terminal condition
        for (long sp = 0; sp < nsp; ++sp) phi.at(sp, 0) = 0.0;
    };
    auto objective = [&](const Field& phi) {
        return std::pow(v_norm(phi), p) +
               std::pow(dual_norm(time_derivative(phi), 0, params), pp);
    };

    project(phi0);
    Field phi = phi0;
    double J = objective(phi);
    double step = 0.5;
    detail::FaceOps ops(g);
    std::vector<double> ext, sgrad(nsp);

    for (int it = 0; it < opts.descent_iters; ++it) {
        // gradient of the p-Dirichlet part
        Field grad(g);
        for (int m = 1; m < nt; ++m) {
            ops.ext.fill(phi.level(m), nullptr, g.level_time(m), ext);
            std::fill(sgrad.begin(), sgrad.end(), 0.0);
            ops.add_gradient(ext, p, 0.0, sgrad);
            for (long sp = 0; sp < nsp; ++sp) grad.at(sp, m) = p * sgrad[sp] * g.tau;
        }
        // gradient of the dual part: p' * N^(p'-1) * extremal / ||w||_V, chained
        // through the backward differences
        auto dn = dual_norm_full(time_derivative(phi), 0, params);
        const double wnorm = v_norm(dn.w);
        if (dn.value > 0 && wnorm > 0) {
            const double fac = pp * std::pow(dn.value, pp - 1.0) / wnorm;
            const double hn = std::pow(g.h, g.n);
            for (int m = 1; m < nt; ++m)
                for (long sp = 0; sp < nsp; ++sp) {
                    const double wm = dn.w.at(sp, m);
                    const double wm1 = m + 1 <= nt ? dn.w.at(sp, m + 1) : 0.0;
                    grad.at(sp, m) += fac * hn * (wm - wm1) / g.tau * g.tau;
                }
        }
        // projected backtracking step
        bool improved = false;
        for (int bt = 0; bt < 12; ++bt) {
            Field trial = phi;
            for (int m = 1; m < nt; ++m)
                for (long sp = 0; sp < nsp; ++sp)
                    trial.at(sp, m) -= step * grad.at(sp, m);
            project(trial);
            const double Jt = objective(trial);
            if (Jt < J) {
                phi = trial;
                J = Jt;
                improved = true;
                step *= 1.3;
                break;
            }
            step *= 0.4;
        }
        if (!improved && step < 1e-12) break;
    }
    if (step < 1e-12)
        warnings.push_back("variational descent stagnated; value is an upper bound");
    return J;
}

double variational_value(const PointSet& K, const SolverParams& params,
                         const CapacityOptions& opts, std::vector<std::string>& warnings) {
    if (K.empty()) return 0.0;
    const GridSpec& g = K.grid();
    const double p = g.pval();

    // start 1: the balayage solution, tapered to honor the terminal condition;
    // it is admissible (1 on K by contact) and already capacity-shaped
    Field from_reduite = reduite(1.0, K, params).R;
    for (int m = 0; m <= g.nt(); ++m) {
        const double chi = std::clamp((g.T - g.level_time(m)) / (0.1 * g.T), 0.0, 1.0);
        for (long sp = 0; sp < g.n_space_cells(); ++sp) from_reduite.at(sp, m) *= chi;
    }

    // start 2: metric tent over the set, 1 inside, decaying over a dilation
    const auto& bb = K.bbox();
    SpaceTimePoint ctr;
    ctr.x = {(bb.xlo[0] + bb.xhi[0]) / 2, (bb.xlo[1] + bb.xhi[1]) / 2};
    ctr.t = (bb.tlo + bb.thi) / 2;
    double r_set = 0;
    for (int a = 0; a < g.n; ++a) r_set = std::max(r_set, (bb.xhi[a] - bb.xlo[a]) / 2);
    r_set = std::max(r_set, std::pow((bb.thi - bb.tlo) / 2, 1.0 / p));
    const double reach = 2.0 * std::max(r_set, std::max(2 * g.h, std::pow(2 * g.tau, 1.0 / p)));

    std::mt19937_64 rng(opts.seed);
    double best = variational_descent(K, params, opts, std::move(from_reduite), warnings);
    for (int s = 1; s < std::max(1, opts.multistart); ++s) {
        Field phi0 = Field::sampled(g, [&](double x, double y, double t) {
            const double d = d_p({{x, y}, t}, ctr, p, g.n);
            double v = std::max(0.0, 1.0 - std::max(0.0, d - r_set) / reach);
            return v;
        });
        if (s > 1) {
            std::uniform_real_distribution<double> U(0.8, 1.2);
            for (double& v : phi0.mutable_values()) v *= U(rng);
        }
        best = std::min(best, variational_descent(K, params, opts, std::move(phi0), warnings));
    }
    return best;
}

}  // namespace

CapacityEstimate cap_variational(const PointSet& K, const SolverParams& params,
                                 const CapacityOptions& opts) {
    return run_estimator(K, "variational", params, opts,
                         [&](const PointSet& S, std::vector<std::string>& warn) {
                             return variational_value(S, params, opts, warn);
                         });
}

CapacityEstimate capacity(const PointSet& K, CapacityMethod method, const SolverParams& params,
                          const CapacityOptions& opts) {
    switch (method) {
        case CapacityMethod::BalayageMass: return cap_balayage(K, params, opts);
        case CapacityMethod::Energy: return cap_energy(K, params, opts);
        case CapacityMethod::Variational: return cap_variational(K, params, opts);
    }
    throw InvalidArgument("unknown capacity method");
}

CapacityEstimate inner_cap(const PointSet& E, CapacityMethod method, const SolverParams& params,
                           int steps) {
    CapacityEstimate est;
    est.method = "inner";
    double value = 0;
    // erosion radii halving in cell steps, ending at the set itself
    for (int j = steps - 1; j >= 0; --j) {
        const int k = j == 0 ? 0 : (1 << (j - 1));
        PointSet Kj = k == 0 ? E : E.erode_cells(k);
        const double v = Kj.empty() ? 0.0 : capacity(Kj, method, params).value;
        est.trace.push_back(v);
        value = std::max(value, v);
    }
    est.value = value;
    return est;
}

CapacityEstimate outer_cap(const PointSet& E, CapacityMethod method, const SolverParams& params,
                           int steps) {
    CapacityEstimate est;
    est.method = "outer";
    if (E.empty()) {
        est.value = 0;
        return est;
    }
    double value = std::numeric_limits<double>::infinity();
    // dilation radii halving in cell steps down to one cell
    for (int j = steps - 1; j >= 0; --j) {
        const int k = 1 << j;
        PointSet Uj = E.dilate_cells(k);
        if (!Uj.compactly_contained(1))
            throw InvalidArgument("outer_cap: dilation escapes the domain margin");
        est.trace.push_back(capacity(Uj, method, params).value);
        value = std::min(value, est.trace.back());
    }
    est.value = value;
    return est;
}

double capacitability_gap(const PointSet& E, const SolverParams& params) {
    if (E.empty()) return 0.0;
    const double outer = outer_cap(E, CapacityMethod::BalayageMass, params).value;
    const double plain = cap_balayage(E, params).value;
    return outer - plain;
}

LevelSetReport level_set_capacity_check(const Field& u, const PointSet& K,
                                        const std::vector<double>& lambdas,
                                        const SolverParams& params) {
    const GridSpec& g = u.grid();
    if (!K.grid().same_layout(g)) throw InvalidArgument("level_set_capacity_check: grid mismatch");
    const double p = g.pval();
    LevelSetReport rep;
    rep.reduite_mass = reduite(u, K, params).mu.total_mass();
    rep.max_C = 0;
    rep.min_C = std::numeric_limits<double>::infinity();
    for (double lam : lambdas) {
        LevelSetRow row;
        row.lambda = lam;
        std::vector<long> cells;
        for (long c : K.cells())
            if (u.at_cell(c) > lam) cells.push_back(c);
        PointSet S(g, std::move(cells));
        row.rhs_factor = rep.reduite_mass *
                         (std::pow(lam, 1.0 - p) + std::pow(lam, -1.0 / (p - 1.0)));
        if (!S.empty() && !S.compactly_contained(1)) {
            row.skipped = true;
        } else {
            row.lhs_cap = S.empty() ? 0.0 : cap_balayage(S, params).value;
            row.C = row.rhs_factor > 0 ? row.lhs_cap / row.rhs_factor : 0.0;
            if (row.lhs_cap > 0) {
                rep.max_C = std::max(rep.max_C, row.C);
                rep.min_C = std::min(rep.min_C, row.C);
            }
        }
        rep.rows.push_back(row);
    }
    if (!std::isfinite(rep.min_C)) rep.min_C = 0;
    return rep;
}

}  // namespace parcap
