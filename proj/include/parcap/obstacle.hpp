#pragma once

#include "parcap/pde.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Obstacle problem: per implicit step the complementarity system
//   residual >= 0,  R >= psi,  residual * (R - psi) = 0
// is solved by the active-set Newton in pde.cpp. The positive residual times
// cell volume is the Riesz measure of the solution.
// ---------------------------------------------------------------------------

struct ObstacleSolution {
    Field R;               // solution above the obstacle
    DiscreteMeasure mu;    // Riesz measure (nonnegative by construction)
    PointSet contact;      // cells with R - psi <= contact_tol
    double negative_residual_mass = 0;  // diagnostic, should be ~0
    long newton_iters_total = 0;
};

/// Solves the obstacle problem with a sampled obstacle field. psi is read on
/// levels 1..nt; it should be <= 0 near the parabolic boundary.
ObstacleSolution solve_obstacle(const Field& psi, const SolverParams& params);

/// Reduite of psi relative to U: obstacle psi * 1_U. The overload with a
/// height lambda solves the indicator obstacle lambda * 1_U (psi = 1 gives R_U).
ObstacleSolution reduite(const Field& psi, const PointSet& U, const SolverParams& params);
ObstacleSolution reduite(double lambda, const PointSet& U, const SolverParams& params);

/// mu_{R^lambda_K}(total) / mu_{R_K}(total): how the Riesz mass responds to
/// scaling the obstacle height; recorded across lambda sweeps.
double lambda_scaling_check(const PointSet& K, double lambda, const SolverParams& params);

}  // namespace parcap
