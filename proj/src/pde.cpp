#include "parcap/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stencil.hpp"

namespace parcap {

namespace detail {

namespace {

// Tridiagonal solve (1D Hessians are tridiagonal).
void thomas_solve(std::vector<double>& dl, std::vector<double>& d, std::vector<double>& du,
                  std::vector<double>& b) {
    const size_t n = d.size();
    for (size_t i = 1; i < n; ++i) {
        const double m = dl[i] / d[i - 1];
        d[i] -= m * du[i - 1];
        b[i] -= m * b[i - 1];
    }
    b[n - 1] /= d[n - 1];
    for (size_t i = n - 1; i-- > 0;) b[i] = (b[i] - du[i] * b[i + 1]) / d[i];
}

// Jacobi-preconditioned CG on CSR arrays; the step Hessian is SPD.
void cg_solve(std::span<const long> row_ptr, std::span<const long> col,
              std::span<const double> val, std::span<const double> b, std::span<double> x) {
    const long n = static_cast<long>(row_ptr.size()) - 1;
    auto mul = [&](std::span<const double> in, std::span<double> out) {
        for (long r = 0; r < n; ++r) {
            double s = 0;
            for (long k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * in[col[k]];
            out[r] = s;
        }
    };
    std::vector<double> diag(n, 1.0);
    for (long r = 0; r < n; ++r)
        for (long k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            if (col[k] == r && val[k] != 0) diag[r] = val[k];
    std::vector<double> rvec(b.begin(), b.end()), z(n), pdir(n), Ap(n);
    std::fill(x.begin(), x.end(), 0.0);
    double bnorm = 0;
    for (double v : b) bnorm = std::max(bnorm, std::abs(v));
    if (bnorm == 0) return;
    for (long i = 0; i < n; ++i) z[i] = rvec[i] / diag[i];
    pdir = z;
    double rz = 0;
    for (long i = 0; i < n; ++i) rz += rvec[i] * z[i];
    const long maxit = 40 * n;
    for (long it = 0; it < maxit; ++it) {
        mul(pdir, Ap);
        double pAp = 0;
        for (long i = 0; i < n; ++i) pAp += pdir[i] * Ap[i];
        if (pAp <= 0) break;
        const double alpha = rz / pAp;
        double rmax = 0;
        for (long i = 0; i < n; ++i) {
            x[i] += alpha * pdir[i];
            rvec[i] -= alpha * Ap[i];
            rmax = std::max(rmax, std::abs(rvec[i]));
        }
        if (rmax <= 1e-13 * bnorm) return;
        double rz_new = 0;
        for (long i = 0; i < n; ++i) {
            z[i] = rvec[i] / diag[i];
            rz_new += rvec[i] * z[i];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (long i = 0; i < n; ++i) pdir[i] = z[i] + beta * pdir[i];
    }
}

struct StepWorkspace {
    const GridSpec& g;
    FaceOps ops;
    std::vector<double> ext;
    double hn;

    explicit StepWorkspace(const GridSpec& grid) : g(grid), ops(grid), hn(std::pow(grid.h, grid.n)) {}

    static double q_of(const StepProblem& pr) {
        return pr.exponent > 0 ? pr.exponent : pr.grid->pval();
    }
    double eps_of(const StepProblem& pr, const SolverParams& sp) const {
        return pr.eps_override >= 0 ? pr.eps_override : sp.eps_for(g);
    }
    double mass_coef(const StepProblem& pr) const { return pr.elliptic ? 0.0 : 1.0 / g.tau; }

    double energy(const StepProblem& pr, const SolverParams& sp, std::span<const double> u) {
        ops.ext.fill(u, pr.boundary, pr.t, ext);
        double e = ops.gradient_energy(ext, q_of(pr), eps_of(pr, sp));
        const double mc = mass_coef(pr);
        for (long c = 0; c < g.n_space_cells(); ++c) {
            const double f = pr.source.empty() ? 0.0 : pr.source[c];
            const double pv = pr.prev.empty() ? 0.0 : pr.prev[c];
            e += hn * (0.5 * u[c] * u[c] * mc - u[c] * (pv * mc + f));
        }
        return e;
    }

    void gradient(const StepProblem& pr, const SolverParams& sp, std::span<const double> u,
                  std::span<double> grad) {
        ops.ext.fill(u, pr.boundary, pr.t, ext);
        std::fill(grad.begin(), grad.end(), 0.0);
        ops.add_gradient(ext, q_of(pr), eps_of(pr, sp), grad);
        const double mc = mass_coef(pr);
        for (long c = 0; c < g.n_space_cells(); ++c) {
            const double f = pr.source.empty() ? 0.0 : pr.source[c];
            const double pv = pr.prev.empty() ? 0.0 : pr.prev[c];
            grad[c] += hn * ((u[c] - pv) * mc - f);
        }
    }
};

// Residual tolerance scale: the magnitude of the quantities an implicit step
// balances. An absolute tolerance is not representable against a 1e6 source
// density or a unit obstacle divided by tau.
double step_scale(const StepProblem& pr, const GridSpec& g) {
    double scale = 1.0;
    for (double f : pr.source) scale = std::max(scale, std::abs(f));
    if (!pr.elliptic) {
        for (double v : pr.prev) scale = std::max(scale, std::abs(v) / g.tau);
        for (double v : pr.obstacle) scale = std::max(scale, std::abs(v) / g.tau);
        if (!pr.pinned.empty()) scale = std::max(scale, std::abs(pr.pinned_value) / g.tau);
    }
    return scale;
}

// Damped Newton minimization of the step energy with `fixed` cells held at
// their current values. Returns the max-norm of the free-cell PDE residual.
// The convergence tolerance scales with the source magnitude so measure-data
// steps are solved to relative accuracy.
double newton_minimize(StepWorkspace& ws, const StepProblem& pr, const SolverParams& sp,
                       const std::vector<char>& fixed, std::vector<double>& u,
                       std::vector<double>& grad, int& iters_out) {
    const GridSpec& g = ws.g;
    const long n = g.n_space_cells();
    const double hn = ws.hn;
    std::vector<double> delta(n), trial(n);
    double res = std::numeric_limits<double>::infinity();
    double alpha_start = 1.0;
    const double tol = sp.newton_tol * step_scale(pr, g);

    for (int iter = 0; iter < sp.max_iter; ++iter) {
        ws.gradient(pr, sp, u, grad);
        res = 0;
        for (long c = 0; c < n; ++c)
            if (!fixed[c]) res = std::max(res, std::abs(grad[c]) / hn);
        iters_out = iter;
        if (res <= tol) return res;

        // Hessian of the step energy, with fixed rows/cols eliminated.
        const double q = StepWorkspace::q_of(pr);
        const double eps = ws.eps_of(pr, sp);
        const double mc = ws.mass_coef(pr);
        std::vector<double> rhs(n, 0.0);
        for (long c = 0; c < n; ++c) rhs[c] = fixed[c] ? 0.0 : -grad[c];

        if (g.n == 1) {
            std::vector<double> dl(n, 0), d(n, 0), du(n, 0);
            for (long c = 0; c < n; ++c) d[c] = fixed[c] ? 1.0 : hn * mc;
            ws.ops.add_hessian(ws.ext, q, eps,
                               [&](long r, long c, double v) {
                                   if (fixed[r] || fixed[c]) return;
                                   if (r == c)
                                       d[r] += v;
                                   else if (c == r - 1)
                                       dl[r] += v;
                                   else if (c == r + 1)
                                       du[r] += v;
                               });
            delta = rhs;
            thomas_solve(dl, d, du, delta);
        } else {
            std::vector<double> diag(n, hn * mc);
            static thread_local std::vector<double> values;
            ws.ops.hessian_values(ws.ext, q, eps, diag, fixed, values);
            const auto& pat = ws.ops.pattern();
            cg_solve(pat.row_ptr, pat.col, values, rhs, delta);
        }

        double gdot = 0;
        for (long c = 0; c < n; ++c) gdot += grad[c] * delta[c];
        if (gdot > 0) {  // safeguard: fall back to steepest descent scaling
            const double dscale = hn * std::max(mc, 1.0 / g.tau);
            for (long c = 0; c < n; ++c) delta[c] = fixed[c] ? 0.0 : -grad[c] / dscale;
        }
        // Backtracking on the squared gradient norm: the energy decrease per
        // step vanishes quadratically near the solution and drowns in rounding,
        // while |grad|^2 keeps resolving the contraction.
        double psi0 = 0;
        for (long c = 0; c < n; ++c)
            if (!fixed[c]) psi0 += grad[c] * grad[c];
        // warm-started backtracking: consecutive iterations tend to need
        // similar damping; floored so one bad step cannot poison the rest
        double alpha = std::min(1.0, std::max(alpha_start * 4.0, 1e-2));
        bool accepted = false;
        std::vector<double> gtrial(n);
        for (int bt = 0; bt < 60; ++bt) {
            for (long c = 0; c < n; ++c) trial[c] = u[c] + alpha * delta[c];
            ws.gradient(pr, sp, trial, gtrial);
            double psi = 0;
            for (long c = 0; c < n; ++c)
                if (!fixed[c]) psi += gtrial[c] * gtrial[c];
            if (psi <= (1.0 - 1e-4 * alpha) * psi0) {
                accepted = true;
                break;
            }
            alpha *= sp.damping;
        }
        if (!accepted)
            throw SolverDiverged("Newton line search exhausted", pr.step_index, res);
        alpha_start = alpha;
        u = trial;
    }
    ws.gradient(pr, sp, u, grad);
    res = 0;
    for (long c = 0; c < n; ++c)
        if (!fixed[c]) res = std::max(res, std::abs(grad[c]) / hn);
    if (res > tol) {
        std::ostringstream os;
        os << "Newton did not reach tolerance " << tol << " (residual " << res
           << ") at step " << pr.step_index;
        throw SolverDiverged(os.str(), pr.step_index, res);
    }
    return res;
}

}  // namespace

struct StepSolver::Impl {
    StepWorkspace ws;
    explicit Impl(const GridSpec& g) : ws(g) {}
};

StepSolver::StepSolver(const GridSpec& grid) : impl_(new Impl(grid)) {}
StepSolver::~StepSolver() = default;

StepResult StepSolver::solve(const StepProblem& prob, const SolverParams& params) {
    params.validate();
    const GridSpec& g = *prob.grid;
    if (!g.same_layout(impl_->ws.g)) throw InvalidArgument("StepSolver: grid changed");
    const long n = g.n_space_cells();
    StepWorkspace& ws = impl_->ws;

    std::vector<char> hard_pin(n, 0);
    for (long c : prob.pinned) hard_pin[c] = 1;

    StepResult out;
    if (prob.prev.empty())
        out.u.assign(n, 0.0);
    else
        out.u.assign(prob.prev.begin(), prob.prev.end());
    if (!prob.source.empty() && !prob.elliptic)
        for (long c = 0; c < n; ++c) out.u[c] += g.tau * prob.source[c];
    for (long c = 0; c < n; ++c)
        if (hard_pin[c]) out.u[c] = prob.pinned_value;
    out.grad.assign(n, 0.0);

    if (prob.obstacle.empty()) {
        std::vector<char> fixed(hard_pin.begin(), hard_pin.end());
        newton_minimize(ws, prob, params, fixed, out.u, out.grad, out.newton_iters);
        ws.gradient(prob, params, out.u, out.grad);
        return out;
    }

    // Primal active set around the pinned Newton solve.
    std::vector<char> active(n, 0);
    for (long c = 0; c < n; ++c) {
        if (hard_pin[c]) continue;
        if (out.u[c] <= prob.obstacle[c]) {
            active[c] = 1;
            out.u[c] = prob.obstacle[c];
        }
    }
    std::vector<int> trace;
    const double lam_tol = params.newton_tol * step_scale(prob, g) * ws.hn;
    for (int as = 0; as < params.max_active_set_iter; ++as) {
        std::vector<char> fixed(n, 0);
        long n_active = 0;
        for (long c = 0; c < n; ++c) {
            fixed[c] = hard_pin[c] || active[c];
            if (active[c]) {
                out.u[c] = prob.obstacle[c];
                ++n_active;
            }
        }
        trace.push_back(static_cast<int>(n_active));
        int it = 0;
        newton_minimize(ws, prob, params, fixed, out.u, out.grad, it);
        out.newton_iters += it;
        out.active_set_iters = as + 1;
        ws.gradient(prob, params, out.u, out.grad);

        bool changed = false;
        for (long c = 0; c < n; ++c) {
            if (hard_pin[c]) continue;
            if (active[c]) {
                if (out.grad[c] < -lam_tol) {  // negative multiplier: release
                    active[c] = 0;
                    changed = true;
                }
            } else if (out.u[c] < prob.obstacle[c]) {
                active[c] = 1;
                out.u[c] = prob.obstacle[c];
                changed = true;
            }
        }
        if (!changed) return out;
    }
    std::ostringstream os;
    os << "active-set iteration did not settle at step " << prob.step_index << "; trace:";
    for (int v : trace) os << " " << v;
    throw SolverDiverged(os.str(), prob.step_index, -1.0);
}

StepResult solve_step(const StepProblem& prob, const SolverParams& params) {
    StepSolver solver(*prob.grid);
    return solver.solve(prob, params);
}

}  // namespace detail

Field solve_forward(const DiscreteMeasure& rhs, const GridSpec& grid, const SolverParams& params,
                    const ForwardOptions& opts) {
    params.validate();
    if (!rhs.empty() && !rhs.grid().same_layout(grid))
        throw InvalidArgument("solve_forward: measure grid does not match");
    const long nsp = grid.n_space_cells();
    Field u(grid);
    if (!opts.initial.empty()) {
        if (opts.initial.size() != static_cast<size_t>(nsp))
            throw InvalidArgument("solve_forward: initial slice size mismatch");
        std::copy(opts.initial.begin(), opts.initial.end(), u.mutable_level(0).begin());
    }

    // per-level pinned spatial cells
    std::vector<std::vector<long>> pins(grid.nt() + 1);
    for (long cell : opts.pinned_cells) {
        pins[grid.cell_level(cell)].push_back(grid.cell_space(cell));
    }
    for (auto& v : pins) std::sort(v.begin(), v.end());

    const double cellvol = grid.cell_volume();
    detail::StepSolver solver(grid);
    std::vector<double> source(nsp);
    for (int m = 1; m <= grid.nt(); ++m) {
        std::fill(source.begin(), source.end(), 0.0);
        bool has_source = false;
        for (const auto& [cell, w] : rhs.entries()) {
            if (grid.cell_level(cell) == m) {
                source[grid.cell_space(cell)] += w / cellvol;
                has_source = true;
            }
        }
        if (opts.rhs_density) {
            if (!opts.rhs_density->grid().same_layout(grid))
                throw InvalidArgument("solve_forward: rhs density grid mismatch");
            const auto lv = opts.rhs_density->level(m);
            for (long c = 0; c < nsp; ++c) source[c] += lv[c];
            has_source = true;
        }
        detail::StepProblem pr;
        pr.grid = &grid;
        pr.t = grid.level_time(m);
        pr.prev = u.level(m - 1);
        pr.source = has_source ? std::span<const double>(source) : std::span<const double>();
        pr.boundary = opts.boundary ? &opts.boundary : nullptr;
        pr.pinned = pins[m];
        pr.pinned_value = opts.pinned_value;
        pr.step_index = m;
        auto res = solver.solve(pr, params);
        std::copy(res.u.begin(), res.u.end(), u.mutable_level(m).begin());
    }
    if (opts.truncate) u.truncate_at(params.m_cap);
    return u;
}

Field apply_operator(const Field& u, const SolverParams& params, const BoundaryFn* boundary,
                     const DiscreteMeasure* rhs) {
    const GridSpec& g = u.grid();
    if (rhs && !rhs->grid().same_layout(g))
        throw InvalidArgument("apply_operator: measure grid does not match field grid");
    detail::FaceOps ops(g);
    const double hn = std::pow(g.h, g.n);
    const double cellvol = g.cell_volume();
    Field r(g);
    std::vector<double> ext, grad(g.n_space_cells());
    for (int m = 1; m <= g.nt(); ++m) {
        ops.ext.fill(u.level(m), boundary, g.level_time(m), ext);
        std::fill(grad.begin(), grad.end(), 0.0);
        ops.add_gradient(ext, g.pval(), params.eps_for(g), grad);
        for (long c = 0; c < g.n_space_cells(); ++c) {
            double v = grad[c] / hn + (u.at(c, m) - u.at(c, m - 1)) / g.tau;
            if (rhs) v -= rhs->mass(g.cell_index(c, m)) / cellvol;
            r.at(c, m) = v;
        }
    }
    return r;
}

double boundary_flux(const GridSpec& grid, std::span<const double> level,
                     const SolverParams& params, const BoundaryFn* boundary, double t) {
    detail::FaceOps ops(grid);
    std::vector<double> ext;
    ops.ext.fill(level, boundary, t, ext);
    return ops.gradient_sum(ext, grid.pval(), params.eps_for(grid));
}

double level_mass(const GridSpec& grid, std::span<const double> level) {
    double s = 0;
    for (double v : level) s += v;
    return s * std::pow(grid.h, grid.n);
}

Field lsc_regularize(const Field& u) {
    const GridSpec& g = u.grid();
    const long nsp = g.n_space_cells();
    const int nt = g.nt();
    auto for_stencil = [&](long sp, int m, auto&& fn) {
        fn(sp, m);
        const int ix = g.space_ix(sp), iy = g.space_iy(sp);
        if (ix > 0) fn(sp - 1, m);
        if (ix < g.nx(0) - 1) fn(sp + 1, m);
        if (g.n == 2) {
            if (iy > 0) fn(sp - g.nx(0), m);
            if (iy < g.nx(1) - 1) fn(sp + g.nx(0), m);
        }
        if (m > 0) fn(sp, m - 1);
        if (m < nt) fn(sp, m + 1);
    };
    Field eroded(g), out(g);
    for (int m = 0; m <= nt; ++m)
        for (long sp = 0; sp < nsp; ++sp) {
            double v = u.at(sp, m);
            for_stencil(sp, m, [&](long s2, int m2) { v = std::min(v, u.at(s2, m2)); });
            eroded.at(sp, m) = v;
        }
    for (int m = 0; m <= nt; ++m)
        for (long sp = 0; sp < nsp; ++sp) {
            double v = eroded.at(sp, m);
            for_stencil(sp, m, [&](long s2, int m2) { v = std::max(v, eroded.at(s2, m2)); });
            out.at(sp, m) = v;
        }
    return out;
}

double barenblatt(const SpaceTimePoint& z, double p, int n, double mass) {
    if (!(z.t > 0)) throw InvalidArgument("barenblatt: t must be positive");
    if (!(p > 2)) throw InvalidArgument("barenblatt: p must exceed 2");
    const double lam = 1.0 / (n * (p - 2.0) + p);
    const double q = (p - 2.0) / p * std::pow(lam, 1.0 / (p - 1.0));
    const double expo = p / (p - 1.0);

    // profile mass as a function of the free constant C1
    auto profile_mass = [&](double c1) {
        const double ximax = std::pow(c1 / q, 1.0 / expo);
        const int N = 4096;
        double s = 0;
        for (int i = 0; i < N; ++i) {
            const double xi = (i + 0.5) * ximax / N;
            const double F = std::pow(std::max(0.0, c1 - q * std::pow(xi, expo)),
                                      (p - 1.0) / (p - 2.0));
            s += (n == 1 ? 2.0 * F : 2.0 * M_PI * F * xi) * (ximax / N);
        }
        return s;
    };
    // the bisection for C1 is memoized per (p, n, mass)
    struct Key {
        double p, mass;
        int n;
        bool operator==(const Key& o) const { return p == o.p && mass == o.mass && n == o.n; }
    };
    static thread_local Key cached_key{-1, -1, -1};
    static thread_local double cached_c1 = 0;
    double c1;
    if (cached_key == Key{p, mass, n}) {
        c1 = cached_c1;
    } else {
        double lo = 0.0, hi = 1.0;
        while (profile_mass(hi) < mass) hi *= 2;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (profile_mass(mid) < mass ? lo : hi) = mid;
        }
        c1 = 0.5 * (lo + hi);
        cached_key = Key{p, mass, n};
        cached_c1 = c1;
    }

    double r2 = 0;
    for (int a = 0; a < n; ++a) r2 += sqr(z.x[a]);
    const double xi = std::sqrt(r2) * std::pow(z.t, -lam);
    const double arg = c1 - q * std::pow(xi, expo);
    if (arg <= 0) return 0.0;
    return std::pow(z.t, -static_cast<double>(n) * lam) * std::pow(arg, (p - 1.0) / (p - 2.0));
}

IntegrabilityReport estimate_integrability_exponent(const Field& coarse, const PointSet& region_c,
                                                    const Field& fine, const PointSet& region_f,
                                                    double delta0, double growth_tol) {
    if (region_c.empty() || region_f.empty())
        throw InvalidArgument("estimate_integrability_exponent: empty region");
    auto norm_q = [](const Field& u, const PointSet& reg, double q) {
        double s = 0;
        for (long cell : reg.cells()) s += std::pow(std::abs(u.at_cell(cell)), q);
        return std::pow(s * reg.grid().cell_volume(), 1.0 / q);
    };
    IntegrabilityReport rep;
    const double p = coarse.grid().pval();
    bool all_stable = true;
    double q_hat = 0;
    for (double q = 1.0; q <= 10.0 + 1e-9; q += 0.5) {
        const double nc = norm_q(coarse, region_c, q);
        const double nf = norm_q(fine, region_f, q);
        const double ratio = nc > 0 ? nf / nc : (nf > 0 ? std::numeric_limits<double>::infinity() : 1.0);
        rep.ratios.emplace_back(q, ratio);
        if (ratio <= growth_tol)
            q_hat = std::max(q_hat, q);
        else
            all_stable = false;
    }
    rep.q_hat = q_hat;
    rep.unbounded_sentinel = all_stable;
    rep.class_B = all_stable || q_hat >= p - 2.0 + delta0;
    return rep;
}

}  // namespace parcap
