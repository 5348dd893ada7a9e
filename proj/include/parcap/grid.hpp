#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "parcap/common.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Uniform space-time lattice on Omega x (0,T].
//
// Spatial cells per axis: nx[a] = extent[a]/h with centers (i+1/2)h.
// Time levels m = 1..nt at t = m*tau carry unknowns; level 0 is initial data.
// A space-time "cell" is (spatial cell, time level m >= 1); its lattice point
// is the pair (spatial center, m*tau) and its volume is h^n * tau.
// ---------------------------------------------------------------------------

struct GridSpec {
    int n = 1;                                // spatial dimension, 1 or 2
    std::array<double, 2> extent = {1.0, 1.0};
    double h = 1.0 / 64;
    double tau = 1.0 / 256;
    double T = 1.0;
    Rational p = Rational(3, 1);

    static GridSpec make(int n, std::array<double, 2> extent, double h, double tau,
                         double T, Rational p);

    int nx(int axis) const { return nx_[axis]; }
    int nt() const { return nt_; }
    long n_space_cells() const { return nsp_; }
    long n_cells() const { return nsp_ * nt_; }
    double cell_volume() const;            // h^n * tau
    double pval() const { return p.value(); }

    long space_index(int ix, int iy = 0) const { return ix + static_cast<long>(nx_[0]) * iy; }
    long cell_index(long sp, int m) const { return static_cast<long>(m - 1) * nsp_ + sp; }
    int cell_level(long cell) const { return static_cast<int>(cell / nsp_) + 1; }
    long cell_space(long cell) const { return cell % nsp_; }
    int space_ix(long sp) const { return static_cast<int>(sp % nx_[0]); }
    int space_iy(long sp) const { return static_cast<int>(sp / nx_[0]); }

    double center_x(int i) const { return (i + 0.5) * h; }
    double level_time(int m) const { return m * tau; }

    /// Grid refined by one level: h/2 in space, tau/4 in time (parabolic-ish path
    /// used by the refinement traces).
    GridSpec refined(int levels = 1) const;

    /// Same spatial grid, time horizon scaled by `factor` (same tau).
    GridSpec with_T_factor(double factor) const;

    bool same_layout(const GridSpec& o) const;
    std::string cache_token() const;  // canonical serialization for hashes

private:
    std::array<int, 2> nx_ = {0, 0};
    int nt_ = 0;
    long nsp_ = 0;
};

struct SpaceTimePoint {
    std::array<double, 2> x = {0.0, 0.0};
    double t = 0.0;
};

/// Parabolic metric d_p = max(|x_a - x_b|, |t_a - t_b|^(1/p)).
double d_p(const SpaceTimePoint& a, const SpaceTimePoint& b, double p, int n);

/// Parabolic diameter of a finite point list (0 for empty or singleton).
double p_diam(std::span<const SpaceTimePoint> pts, double p, int n);

enum class CylinderVariant { Full, LowerHalf };

/// Metric ball Q_r(center) of the metric d_p; the lower-half variant restricts
/// time to (t - r^p, t].
struct ParabolicCylinder {
    SpaceTimePoint center;
    double r = 0.0;
    CylinderVariant variant = CylinderVariant::Full;
};

// ---------------------------------------------------------------------------
// Rasterized subsets of the lattice. Cells are identified with their centers
// everywhere (rasterization, covers, measures); this keeps every set operation
// deterministic and monotone.
// ---------------------------------------------------------------------------

class PointSet {
public:
    PointSet() = default;
    PointSet(GridSpec grid, std::vector<long> cells);  // sorts, rejects dupes

    const GridSpec& grid() const { return grid_; }
    const std::vector<long>& cells() const { return cells_; }
    bool empty() const { return cells_.empty(); }
    size_t size() const { return cells_.size(); }
    bool contains(long cell) const;

    /// Lattice space-time volume: count * h^n * tau.
    double volume() const;

    /// Closed bounding box in physical coordinates (over cell boxes).
    struct BBox {
        std::array<double, 2> xlo, xhi;
        double tlo = 0, thi = 0;
    };
    const BBox& bbox() const { return bbox_; }

    /// d_p diameter over cell-corner pairs; single cell gives that cell's
    /// diameter, empty set gives 0.
    double p_diameter() const;

    /// True when every cell keeps `margin` cells of clearance from the lateral
    /// boundary and the bottom (time level >= margin+1, level <= nt-1).
    bool compactly_contained(int margin = 1) const;

    PointSet unite(const PointSet& other) const;
    bool subset_of(const PointSet& other) const;

    /// Geometrically identical set on the grid refined `levels` times
    /// (each cell splits into its 2^n x 4 sub-cells).
    PointSet refined(int levels = 1) const;

    /// Same cell ids reinterpreted on a grid with a longer horizon.
    PointSet on_grid(const GridSpec& g) const;

    /// Cells whose center lies within d_p distance rho of some member center.
    PointSet dilate(double rho) const;
    /// Member cells whose d_p-rho neighbourhood of centers stays inside the set.
    PointSet erode(double rho) const;

    /// Lattice morphology in cell steps (box stencil of k cells per axis);
    /// the natural "one-cell" neighbourhood regardless of the grid's aspect.
    PointSet dilate_cells(int k) const;
    PointSet erode_cells(int k) const;

    SpaceTimePoint cell_center(long cell) const;

private:
    GridSpec grid_;
    std::vector<long> cells_;
    BBox bbox_{};
};

// ---------------------------------------------------------------------------
// Shape descriptors (the config file's set-description blocks).
// ---------------------------------------------------------------------------

struct DiscShape {  // spatial ball on a single time level (time snapped)
    SpaceTimePoint center;
    double r = 0;
};

struct BoxShape {  // full extents, centered
    SpaceTimePoint center;
    std::array<double, 2> xext = {0, 0};
    double text = 0;
};

struct DustShape {  // dyadic-fractal Cantor dust, see dyadic hierarchy below
    SpaceTimePoint center;
    double r0 = 0.25;       // root spatial side; temporal side is r0^p
    double dimension = 0.5; // target parabolic Hausdorff dimension
    int generations = 3;
    std::uint64_t seed = 0; // 0 = evenly strided deterministic pick
};

struct Shape;
struct UnionShape {
    std::vector<Shape> members;
};

struct Shape {
    std::variant<ParabolicCylinder, BoxShape, DiscShape, DustShape, UnionShape> v;
};

/// Cells of `grid` whose centers lie in the closed shape (empty result if the
/// shape misses the lattice).
PointSet rasterize(const Shape& shape, const GridSpec& grid);
PointSet rasterize(const ParabolicCylinder& cyl, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Generalized dyadic grid of parabolic rectangles: generation i rectangles
// have spatial sides 2^(-il) r0 and temporal side 2^(-ik) r0^p, and each
// rectangle splits into exactly 2^(n l + k) children.
// ---------------------------------------------------------------------------

struct DyadicRect {
    int gen = 0;
    std::array<std::int64_t, 2> cx = {0, 0};  // per-axis coordinate in [0, 2^(gen*l))
    std::int64_t ct = 0;                      // temporal coordinate in [0, 2^(gen*k))
};

class DyadicHierarchy {
public:
    /// Root box with spatial side r0 (every axis) and temporal side r0^p,
    /// lower corner at `origin`.
    DyadicHierarchy(int n, Rational p, double r0, SpaceTimePoint origin);

    /// Smallest root covering Omega x (0,T): r0 = max(extents, T^(1/p)).
    static DyadicHierarchy covering(const GridSpec& grid);

    int n() const { return n_; }
    int l() const { return p_.den; }
    int k() const { return p_.num; }
    double r0() const { return r0_; }
    double pval() const { return p_.value(); }
    long children_per_rect() const;  // 2^(n*l + k)

    DyadicRect root() const { return DyadicRect{}; }
    std::vector<DyadicRect> children(const DyadicRect& r) const;

    double spatial_side(int gen) const;
    double temporal_side(int gen) const;
    /// Closed-form d_p diameter: max(sqrt(n) * s_x, s_t^(1/p)).
    double rect_diam(int gen) const;

    /// Half-open box [lo, hi) of a rectangle in physical coordinates.
    void rect_box(const DyadicRect& r, std::array<double, 2>& xlo, std::array<double, 2>& xhi,
                  double& tlo, double& thi) const;
    bool contains(const DyadicRect& r, const SpaceTimePoint& z) const;

    /// Child slot of `r` containing z (z must lie in r).
    DyadicRect child_containing(const DyadicRect& r, const SpaceTimePoint& z) const;

    std::string rect_token(const DyadicRect& r) const;

private:
    int n_;
    Rational p_;
    double r0_;
    SpaceTimePoint origin_;
};

/// Minimal set of generation-`gen` rectangles whose boxes contain at least one
/// cell center of S. Throws if S escapes the root.
std::vector<DyadicRect> dyadic_cover(const PointSet& S, int gen, const DyadicHierarchy& hier);

/// Leaf boxes of the Cantor dust construction (kept rectangles at the last
/// generation), as a Shape-independent list for rasterization and reporting.
struct DustLeaves {
    DyadicHierarchy hier;
    std::vector<DyadicRect> leaves;
};
DustLeaves dyadic_dust_leaves(const DustShape& dust, Rational p, int n);

}  // namespace parcap
