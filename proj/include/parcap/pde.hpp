#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "parcap/field.hpp"

namespace parcap {

/// Dirichlet data on the lateral boundary, sampled as g(x, y, t). An empty
/// function means homogeneous data.
using BoundaryFn = std::function<double(double, double, double)>;

struct ForwardOptions {
    BoundaryFn boundary;                  // lateral Dirichlet override (validation)
    std::vector<double> initial;          // level-0 slice; empty = zero
    const Field* rhs_density = nullptr;   // signed source density (validation/MMS)
    bool truncate = true;                 // apply the M_cap ceiling to the output
    // Cells pinned to fixed values while time-stepping (removability holes).
    std::vector<long> pinned_cells;       // sorted space-time cell ids
    double pinned_value = 1.0;
};

/// Implicit Euler / damped Newton solve of u_t - div((|grad u|^2+eps^2)^((p-2)/2) grad u) = mu.
/// Throws SolverDiverged (with step index and last residual) on failure.
Field solve_forward(const DiscreteMeasure& rhs, const GridSpec& grid, const SolverParams& params,
                    const ForwardOptions& opts = {});

/// Discrete residual D_t^- u - div_h(flux) - rhs_density, one value per cell,
/// levels 1..nt (level 0 is zero). Grids of u and rhs must match.
Field apply_operator(const Field& u, const SolverParams& params,
                     const BoundaryFn* boundary = nullptr,
                     const DiscreteMeasure* rhs = nullptr);

/// Net spatial flux term of one level (sums the discrete operator's gradient
/// part over all cells; equals the boundary outflux for the implicit step).
double boundary_flux(const GridSpec& grid, std::span<const double> level,
                     const SolverParams& params, const BoundaryFn* boundary, double t);

/// Spatial mass integral h^n * sum(u) of one level.
double level_mass(const GridSpec& grid, std::span<const double> level);

/// Discrete lower-semicontinuous regularization: morphological opening (erode
/// then dilate) with the face-adjacent space-time stencil. Exactly idempotent;
/// smooth fields change at the local-extremum truncation scale only.
Field lsc_regularize(const Field& u);

/// Self-similar source solution of u_t = div(|grad u|^(p-2) grad u) with total
/// mass `mass`; the validation oracle for the forward solver. Requires t > 0.
double barenblatt(const SpaceTimePoint& z, double p, int n, double mass);

/// Largest q with the region's L^q norm stable between a coarse and a fine
/// grid, plus the integrability-class verdict (heuristic; see report flag).
struct IntegrabilityReport {
    double q_hat = 0;           // largest stable exponent probed
    bool unbounded_sentinel = false;  // true = stable at every probed q ("q = +inf")
    bool class_B = false;       // q_hat >= p - 2 + delta0 (or sentinel)
    std::vector<std::pair<double, double>> ratios;  // (q, fine/coarse norm ratio)
    bool heuristic = true;      // classifier is an illustration, not a theorem
};
IntegrabilityReport estimate_integrability_exponent(const Field& coarse, const PointSet& region_c,
                                                    const Field& fine, const PointSet& region_f,
                                                    double delta0 = 0.1,
                                                    double growth_tol = 1.25);

namespace detail {
struct StepProblem {
    const GridSpec* grid = nullptr;
    double t = 0;                        // level time
    std::span<const double> prev;        // previous level (size nsp)
    std::span<const double> source;      // density per spatial cell; empty = 0
    const BoundaryFn* boundary = nullptr;
    std::span<const double> obstacle;    // empty = unconstrained
    std::span<const long> pinned;        // sorted spatial cells with fixed values
    double pinned_value = 0;
    int step_index = 0;                  // for error reporting
    // overrides for slice (elliptic) solves and norm oracles
    bool elliptic = false;               // drop the time-derivative mass term
    double exponent = 0;                 // 0 = grid p
    double eps_override = -1;            // < 0 = params.eps_for(grid)
};

struct StepResult {
    std::vector<double> u;
    std::vector<double> grad;  // dE at the solution (h^n * PDE residual)
    int newton_iters = 0;
    int active_set_iters = 0;
};

/// One implicit step: equality-pinned damped Newton inside a primal active-set
/// loop when an obstacle is present.
StepResult solve_step(const StepProblem& prob, const SolverParams& params);

/// Reusable step solver: face stencils and sparsity are built once per grid,
/// then shared across all steps of a sweep.
class StepSolver {
public:
    explicit StepSolver(const GridSpec& grid);
    ~StepSolver();
    StepSolver(const StepSolver&) = delete;
    StepSolver& operator=(const StepSolver&) = delete;
    StepResult solve(const StepProblem& prob, const SolverParams& params);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};
}  // namespace detail

}  // namespace parcap
