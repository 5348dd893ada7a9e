#pragma once

// Face-based discrete gradient machinery shared by the forward, obstacle and
// slice solvers. Each implicit step minimizes the strictly convex energy
//
//   E(u) = sum_c h^n [ u_c^2/(2 tau) - u_c (prev_c/tau + f_c) ]
//        + tau-free  sum_f w_f (1/p)(|G_f(u)|^2 + eps^2)^(p/2)
//
// where G_f is the face gradient (normal difference plus, for n = 2, the
// averaged tangential difference) on an array extended by Dirichlet mirror
// ghosts: ghost = 2 g - u_inner reproduces the half-cell wall difference.
// Face weights tile Omega once per direction family, so the face sum is a
// midpoint-consistent quadrature of the gradient integrand.

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "parcap/field.hpp"
#include "parcap/grid.hpp"

namespace parcap::detail {

using BoundaryFn = std::function<double(double, double, double)>;

// Extended spatial array with one ghost ring. Each ghost entry is affine in
// exactly one interior cell: ext = gconst + gcoef * u[cell].
struct ExtGrid {
    explicit ExtGrid(const GridSpec& g);

    const GridSpec& grid;
    int ex, ey;  // extended dims (nx+2, ny+2 or 1)
    long size() const { return static_cast<long>(ex) * ey; }
    long eidx(int i, int j) const { return (i + 1) + static_cast<long>(ex) * (j + 1); }

    struct Entry {
        long cell = -1;     // interior cell index, -1 for pure constants
        double coef = 0.0;  // du contribution
        // wall point where the boundary value is sampled (ghosts only)
        double gx = 0.0, gy = 0.0;
        bool is_ghost = false;
    };
    std::vector<Entry> map;  // one per extended slot

    /// Fills `ext` for one time level: interior copied, ghosts = 2g - mirror.
    void fill(std::span<const double> u, const BoundaryFn* boundary, double t,
              std::vector<double>& ext) const;
};

struct Face {
    double w = 0;             // energy weight
    // Linear forms of the two gradient components over extended slots.
    // Component 0 is the normal difference, component 1 the tangential average
    // (n = 2 only; nt1 = 0 in 1D).
    std::array<long, 2> slot0{};   // normal: (b - a)/h
    int n_tang = 0;
    std::array<long, 4> tslot{};
    std::array<double, 4> tcoef{};
};

struct FaceOps {
    explicit FaceOps(const GridSpec& g);

    const GridSpec& grid;
    ExtGrid ext;
    std::vector<Face> faces;
    double inv_h;

    /// sum_f w_f (1/q)(|G_f|^2 + eps^2)^(q/2) for one level.
    double gradient_energy(std::span<const double> extvals, double q, double eps) const;

    /// Accumulates d/du of gradient_energy into `grad` (size nsp).
    void add_gradient(std::span<const double> extvals, double q, double eps,
                      std::span<double> grad) const;

    /// Sum over cells of the gradient (equals the net boundary flux term).
    double gradient_sum(std::span<const double> extvals, double q, double eps) const;

    /// Dense-stencil Hessian accumulation through a callback(row, col, value).
    void add_hessian(std::span<const double> extvals, double q, double eps,
                     const std::function<void(long, long, double)>& emit) const;

    // Precomputed sparsity for fast numeric refills (n = 2 path).
    struct CsrPattern {
        std::vector<long> row_ptr, col;
        std::vector<int> face_slots;  // value index per face-local pair, in face order
        std::vector<long> diag_slot;  // value index of each diagonal entry
    };
    const CsrPattern& pattern() const;
    /// Fills CSR values: `diag` added on the diagonal, face Hessian scattered,
    /// rows/cols of fixed cells zeroed with unit diagonal.
    void hessian_values(std::span<const double> extvals, double q, double eps,
                        std::span<const double> diag, std::span<const char> fixed,
                        std::vector<double>& values) const;

private:
    mutable CsrPattern pattern_;
    mutable bool pattern_built_ = false;
};

/// phi(s) = (s^2 + eps^2)^((q-2)/2) evaluated safely.
inline double flux_coef(double s2, double q, double eps) {
    return std::pow(s2 + eps * eps, (q - 2.0) / 2.0);
}

}  // namespace parcap::detail
