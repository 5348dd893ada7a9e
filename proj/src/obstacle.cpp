#include "parcap/obstacle.hpp"

#include <algorithm>
#include <cmath>

namespace parcap {

ObstacleSolution solve_obstacle(const Field& psi, const SolverParams& params) {
    params.validate();
    const GridSpec& g = psi.grid();
    const long nsp = g.n_space_cells();
    ObstacleSolution out;
    out.R = Field(g);
    out.mu = DiscreteMeasure(g);

    std::vector<long> contact_cells;
    detail::StepSolver solver(g);
    for (int m = 1; m <= g.nt(); ++m) {
        detail::StepProblem pr;
        pr.grid = &g;
        pr.t = g.level_time(m);
        pr.prev = out.R.level(m - 1);
        pr.obstacle = psi.level(m);
        pr.step_index = m;
        auto res = solver.solve(pr, params);
        out.newton_iters_total += res.newton_iters;
        std::copy(res.u.begin(), res.u.end(), out.R.mutable_level(m).begin());
        for (long c = 0; c < nsp; ++c) {
            // grad carries h^n * (PDE residual); mass = residual * cell volume
            const double mass = res.grad[c] * g.tau;
            if (mass > 0)
                out.mu.add(g.cell_index(c, m), mass);
            else
                out.negative_residual_mass += -mass;
            if (res.u[c] - psi.at(c, m) <= params.contact_tol())
                contact_cells.push_back(g.cell_index(c, m));
        }
    }
    out.contact = PointSet(g, std::move(contact_cells));
    return out;
}

ObstacleSolution reduite(const Field& psi, const PointSet& U, const SolverParams& params) {
    const GridSpec& g = psi.grid();
    if (!U.grid().same_layout(g)) throw InvalidArgument("reduite: grid mismatch");
    Field cut(g);
    for (long cell : U.cells()) {
        const long sp = g.cell_space(cell);
        const int m = g.cell_level(cell);
        cut.at(sp, m) = psi.at(sp, m);
    }
    return solve_obstacle(cut, params);
}

ObstacleSolution reduite(double lambda, const PointSet& U, const SolverParams& params) {
    const GridSpec& g = U.grid();
    Field psi(g);
    for (long cell : U.cells()) psi.at(g.cell_space(cell), g.cell_level(cell)) = lambda;
    return solve_obstacle(psi, params);
}

double lambda_scaling_check(const PointSet& K, double lambda, const SolverParams& params) {
    if (!(lambda > 0)) throw InvalidArgument("lambda_scaling_check: lambda must be positive");
    if (K.empty()) throw InvalidArgument("lambda_scaling_check: degenerate set");
    const double base = reduite(1.0, K, params).mu.total_mass();
    if (lambda == 1.0) return 1.0;
    const double scaled = reduite(lambda, K, params).mu.total_mass();
    return base > 0 ? scaled / base : 0.0;
}

}  // namespace parcap
