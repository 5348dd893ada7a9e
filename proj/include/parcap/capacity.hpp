#pragma once

#include <string>

#include "parcap/obstacle.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Functional norms on lattice fields. Gradient integrals use the same face
// quadrature as the solvers (with eps = 0); the dual norm is computed exactly
// through slice-wise p-Laplace solves.
// ---------------------------------------------------------------------------

/// sup_t int u^2 dx + int int |grad u|^p dx dt over levels 0..nt.
double energy(const Field& u);

/// (int int |grad u|^p)^(1/p) over levels 1..nt.
double v_norm(const Field& u, double exponent = 0);  // 0 = grid p

/// Dual norm of a density field v (levels 1..nt): each slice solves
/// -div(|grad w|^(p-2) grad w) = v(.,t) with zero boundary, and
/// ||v||_V' = (sum_t ||grad w||_p^p tau)^(1/p'). The returned extremal fields
/// feed the variational-capacity descent.
struct DualNormResult {
    double value = 0;
    std::vector<double> slice_gradnorm_p;  // ||grad w_t||_p^p per level
    Field w;                               // stacked slice solutions
};
DualNormResult dual_norm_full(const Field& v, double exponent, const SolverParams& params);
double dual_norm(const Field& v, double exponent, const SolverParams& params);

/// Backward time differences (u^m - u^(m-1))/tau as a density field on levels
/// 1..nt (level 0 of u is the initial slice).
Field time_derivative(const Field& u);

struct NormReport {
    double v_norm = 0;
    double vdual_norm = 0;  // of u_t
    double w_norm = 0;      // v_norm^p + vdual_norm^p'
    double energy = 0;
};
NormReport norm_report(const Field& u, const SolverParams& params);

// ---------------------------------------------------------------------------
// Capacity estimators.
// ---------------------------------------------------------------------------

struct CapacityEstimate {
    double value = 0;
    std::string method;            // balayage-mass | energy | variational
    std::vector<double> trace;     // value per refinement level, coarse first
    double last_two_osc = 0;       // relative oscillation of the last two levels
    bool t_stabilized = true;      // doubling T changed the value by < 1%
    double t_stab_change = 0;
    std::vector<std::string> warnings;
};

struct CapacityOptions {
    int refine_levels = 0;   // extra grid levels for the trace
    bool t_check = false;    // re-run with doubled horizon
    int descent_iters = 120; // variational: projected descent iterations
    int multistart = 2;      // variational: number of starts
    std::uint64_t seed = 1;  // variational: perturbation seed
};

/// Total Riesz mass of the balayage of 1_K (the computational definition of
/// the parabolic capacity). K needs a one-cell margin from the parabolic
/// boundary.
CapacityEstimate cap_balayage(const PointSet& K, const SolverParams& params,
                              const CapacityOptions& opts = {});

/// Energy of the balayage solution: an upper-bound-flavored estimate of the
/// parabolic energy capacity.
CapacityEstimate cap_energy(const PointSet& K, const SolverParams& params,
                            const CapacityOptions& opts = {});

/// Projected-descent upper bound for the variational capacity
/// inf { ||phi||_W : phi >= 1 on K, zero parabolic/terminal boundary }.
CapacityEstimate cap_variational(const PointSet& K, const SolverParams& params,
                                 const CapacityOptions& opts = {});

enum class CapacityMethod { BalayageMass, Energy, Variational };
CapacityEstimate capacity(const PointSet& K, CapacityMethod method, const SolverParams& params,
                          const CapacityOptions& opts = {});

/// Inner capacity: sup over an exhaustion by eroded compact subsets
/// (erosion radii halving down to the cell scale).
CapacityEstimate inner_cap(const PointSet& E, CapacityMethod method, const SolverParams& params,
                           int steps = 3);

/// Outer capacity: inf over open dilations (radii halving down to one cell).
CapacityEstimate outer_cap(const PointSet& E, CapacityMethod method, const SolverParams& params,
                           int steps = 3);

/// outer_cap - cap by the balayage method; near zero signals capacitability
/// at this resolution.
double capacitability_gap(const PointSet& E, const SolverParams& params);

// ---------------------------------------------------------------------------
// Super-level-set capacity bound check (empirical constant per lambda).
// ---------------------------------------------------------------------------

struct LevelSetRow {
    double lambda = 0;
    double lhs_cap = 0;       // cap({u > lambda} inside K)
    double rhs_factor = 0;    // mu_{R^u_K}(total) * (lambda^(1-p) + lambda^(-1/(p-1)))
    double C = 0;             // lhs / rhs_factor
    bool skipped = false;     // super-level set touched the margin
};
struct LevelSetReport {
    std::vector<LevelSetRow> rows;
    double reduite_mass = 0;
    double max_C = 0;
    double min_C = 0;  // over non-skipped rows with lhs > 0
};
LevelSetReport level_set_capacity_check(const Field& u, const PointSet& K,
                                        const std::vector<double>& lambdas,
                                        const SolverParams& params);

}  // namespace parcap
