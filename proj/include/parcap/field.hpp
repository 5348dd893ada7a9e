#pragma once

#include <functional>
#include <span>
#include <vector>

#include "parcap/grid.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Scalar function on the space-time lattice: one value per spatial cell per
// time level 0..nt (level 0 holds the initial slice). Values at or above the
// configured ceiling are flagged truncated.
// ---------------------------------------------------------------------------

class Field {
public:
    Field() = default;
    Field(GridSpec grid, double fill = 0.0);
    Field(GridSpec grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<double> mutable_values() { return values_; }

    double at(long sp, int level) const { return values_[idx(sp, level)]; }
    double& at(long sp, int level) { return values_[idx(sp, level)]; }
    double at_cell(long cell) const {
        return at(grid_.cell_space(cell), grid_.cell_level(cell));
    }

    std::span<const double> level(int m) const {
        return std::span<const double>(values_).subspan(
            static_cast<size_t>(m) * grid_.n_space_cells(), grid_.n_space_cells());
    }
    std::span<double> mutable_level(int m) {
        return std::span<double>(values_).subspan(
            static_cast<size_t>(m) * grid_.n_space_cells(), grid_.n_space_cells());
    }

    /// Clamps values at `ceiling`, marking clamped nodes.
    void truncate_at(double ceiling);
    bool truncated(long sp, int level) const {
        return !trunc_.empty() && trunc_[idx(sp, level)] != 0;
    }
    long truncated_count() const;

    double max_abs() const;
    double max_value() const;
    /// Discrete space-time L2 norm over levels 1..nt (cell-volume weights).
    double l2() const;

    static Field sampled(const GridSpec& grid,
                         const std::function<double(double, double, double)>& f);

private:
    size_t idx(long sp, int level) const {
        return static_cast<size_t>(level) * grid_.n_space_cells() + sp;
    }
    GridSpec grid_;
    std::vector<double> values_;
    std::vector<unsigned char> trunc_;
};

// ---------------------------------------------------------------------------
// Nonnegative Radon measure on space-time cells, stored sparsely.
// ---------------------------------------------------------------------------

class DiscreteMeasure {
public:
    DiscreteMeasure() = default;
    explicit DiscreteMeasure(GridSpec grid) : grid_(grid) {}

    const GridSpec& grid() const { return grid_; }
    void add(long cell, double mass);
    double mass(long cell) const;
    double total_mass() const;
    const std::vector<std::pair<long, double>>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    /// Dirac-style measure: all mass on the cell containing z (nearest cell).
    static DiscreteMeasure dirac(const GridSpec& grid, const SpaceTimePoint& z, double mass);
    /// Uniform density over a set (mass spread by cell volume).
    static DiscreteMeasure uniform(const PointSet& support, double total);

    /// Mass inside a lower-half cylinder Q^-_rho(z) (cells by center rule).
    double mass_in_lower_cylinder(const SpaceTimePoint& z, double rho) const;

    std::string cache_token() const;

private:
    GridSpec grid_;
    std::vector<std::pair<long, double>> entries_;  // sorted by cell
};

// ---------------------------------------------------------------------------
// Solver knobs shared by the forward and obstacle solvers.
// ---------------------------------------------------------------------------

struct SolverParams {
    double eps = -1.0;          // gradient regularization; < 0 means "use h"
    double newton_tol = 1e-9;   // max-norm of the PDE-scale step residual
    int max_iter = 50;          // Newton iterations per implicit step
    double damping = 0.5;       // Armijo backtracking factor
    double m_cap = 1e6;         // value ceiling (truncation flagging)
    int max_active_set_iter = 60;
    double contact_tol_factor = 10.0;  // contact_tol = factor * newton_tol

    double eps_for(const GridSpec& g) const { return eps < 0 ? g.h : eps; }
    double contact_tol() const { return contact_tol_factor * newton_tol; }
    void validate() const;
    std::string cache_token(const GridSpec& g) const;
};

}  // namespace parcap
