#include "stencil.hpp"

namespace parcap::detail {

ExtGrid::ExtGrid(const GridSpec& g) : grid(g) {
    const int nx = g.nx(0);
    const int ny = g.n == 2 ? g.nx(1) : 1;
    ex = nx + 2;
    ey = g.n == 2 ? ny + 2 : 1;
    map.assign(static_cast<size_t>(ex) * ey, Entry{});

    for (int j = (g.n == 2 ? -1 : 0); j <= (g.n == 2 ? ny : 0); ++j) {
        for (int i = -1; i <= nx; ++i) {
            Entry e;
            const bool gx_out = (i < 0 || i >= nx);
            const bool gy_out = g.n == 2 && (j < 0 || j >= ny);
            const int mi = std::clamp(i, 0, nx - 1);
            const int mj = g.n == 2 ? std::clamp(j, 0, ny - 1) : 0;
            e.cell = grid.space_index(mi, mj);
            if (!gx_out && !gy_out) {
                e.coef = 1.0;
            } else {
                // mirror ghost, 2 g(wall) - u(mirror); the wall sample point is
                // the boundary location nearest the ghost slot
                e.coef = -1.0;
                e.is_ghost = true;
                e.gx = gx_out ? (i < 0 ? 0.0 : g.extent[0]) : grid.center_x(mi);
                e.gy = g.n == 2 ? (gy_out ? (j < 0 ? 0.0 : g.extent[1]) : grid.center_x(mj)) : 0.0;
            }
            map[g.n == 2 ? eidx(i, j) : static_cast<long>(i + 1)] = e;
        }
    }
}

void ExtGrid::fill(std::span<const double> u, const BoundaryFn* boundary, double t,
                   std::vector<double>& extvals) const {
    extvals.resize(map.size());
    for (size_t s = 0; s < map.size(); ++s) {
        const Entry& e = map[s];
        double v = e.coef * u[e.cell];
        if (e.is_ghost && boundary && *boundary) v += 2.0 * (*boundary)(e.gx, e.gy, t);
        extvals[s] = v;
    }
}

FaceOps::FaceOps(const GridSpec& g) : grid(g), ext(g), inv_h(1.0 / g.h) {
    const int nx = g.nx(0);
    const int ny = g.n == 2 ? g.nx(1) : 1;
    const double dual = std::pow(g.h, g.n) / g.n;
    auto E = [&](int i, int j) { return g.n == 2 ? ext.eidx(i, j) : static_cast<long>(i + 1); };

    // x-faces between (i-1,j) and (i,j) for i = 0..nx
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            Face f;
            const bool bdry = (i == 0 || i == nx);
            f.w = bdry ? dual / 2 : dual;
            f.slot0 = {E(i - 1, j), E(i, j)};
            if (g.n == 2) {
                f.n_tang = 4;
                const double c = 1.0 / (4.0 * g.h);
                f.tslot = {E(i - 1, j + 1), E(i - 1, j - 1), E(i, j + 1), E(i, j - 1)};
                f.tcoef = {c, -c, c, -c};
            }
            faces.push_back(f);
        }
    }
    if (g.n == 2) {
        // y-faces between (i,j-1) and (i,j) for j = 0..ny
        for (int j = 0; j <= ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                Face f;
                const bool bdry = (j == 0 || j == ny);
                f.w = bdry ? dual / 2 : dual;
                f.slot0 = {E(i, j - 1), E(i, j)};
                f.n_tang = 4;
                const double c = 1.0 / (4.0 * g.h);
                f.tslot = {E(i + 1, j - 1), E(i - 1, j - 1), E(i + 1, j), E(i - 1, j)};
                f.tcoef = {c, -c, c, -c};
                faces.push_back(f);
            }
        }
    }
}

double FaceOps::gradient_energy(std::span<const double> v, double q, double eps) const {
    double total = 0;
    for (const Face& f : faces) {
        const double gx = (v[f.slot0[1]] - v[f.slot0[0]]) * inv_h;
        double gy = 0;
        for (int k = 0; k < f.n_tang; ++k) gy += f.tcoef[k] * v[f.tslot[k]];
        const double s2 = gx * gx + gy * gy;
        total += f.w * std::pow(s2 + eps * eps, q / 2.0) / q;
    }
    return total;
}

void FaceOps::add_gradient(std::span<const double> v, double q, double eps,
                           std::span<double> grad) const {
    for (const Face& f : faces) {
        const double gx = (v[f.slot0[1]] - v[f.slot0[0]]) * inv_h;
        double gy = 0;
        for (int k = 0; k < f.n_tang; ++k) gy += f.tcoef[k] * v[f.tslot[k]];
        const double phi = flux_coef(gx * gx + gy * gy, q, eps);
        const double dx = f.w * phi * gx;
        const double dy = f.w * phi * gy;
        // chain rule through the extended-slot map
        {
            const auto& ea = ext.map[f.slot0[0]];
            const auto& eb = ext.map[f.slot0[1]];
            grad[ea.cell] += dx * (-inv_h) * ea.coef;
            grad[eb.cell] += dx * (+inv_h) * eb.coef;
        }
        for (int k = 0; k < f.n_tang; ++k) {
            const auto& e = ext.map[f.tslot[k]];
            grad[e.cell] += dy * f.tcoef[k] * e.coef;
        }
    }
}

double FaceOps::gradient_sum(std::span<const double> v, double q, double eps) const {
    std::vector<double> grad(grid.n_space_cells(), 0.0);
    add_gradient(v, q, eps, grad);
    double s = 0;
    for (double g : grad) s += g;
    return s;
}

void FaceOps::add_hessian(std::span<const double> v, double q, double eps,
                          const std::function<void(long, long, double)>& emit) const {
    std::array<long, 6> cells{};
    std::array<double, 6> cx{}, cy{};
    for (const Face& f : faces) {
        const double gx = (v[f.slot0[1]] - v[f.slot0[0]]) * inv_h;
        double gy = 0;
        for (int k = 0; k < f.n_tang; ++k) gy += f.tcoef[k] * v[f.tslot[k]];
        const double s2 = gx * gx + gy * gy;
        const double phi = flux_coef(s2, q, eps);
        const double dphi = (q - 2.0) * std::pow(s2 + eps * eps, (q - 4.0) / 2.0);
        // D2 psi = phi I + dphi G G^T
        const double hxx = phi + dphi * gx * gx;
        const double hxy = dphi * gx * gy;
        const double hyy = phi + dphi * gy * gy;

        int m = 0;
        {
            const auto& ea = ext.map[f.slot0[0]];
            cells[m] = ea.cell;
            cx[m] = -inv_h * ea.coef;
            cy[m] = 0;
            ++m;
            const auto& eb = ext.map[f.slot0[1]];
            cells[m] = eb.cell;
            cx[m] = +inv_h * eb.coef;
            cy[m] = 0;
            ++m;
        }
        for (int k = 0; k < f.n_tang; ++k) {
            const auto& e = ext.map[f.tslot[k]];
            cells[m] = e.cell;
            cx[m] = 0;
            cy[m] = f.tcoef[k] * e.coef;
            ++m;
        }
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                const double val = f.w * (hxx * cx[a] * cx[b] + hyy * cy[a] * cy[b] +
                                          hxy * (cx[a] * cy[b] + cy[a] * cx[b]));
                if (val != 0.0) emit(cells[a], cells[b], val);
            }
    }
}

}  // namespace parcap::detail

// ---------------------------------------------------------------------------
// CSR pattern with precomputed face-local slots
// ---------------------------------------------------------------------------

namespace parcap::detail {

namespace {

void face_locals(const FaceOps& ops, const Face& f, std::array<long, 6>& cells,
                 std::array<double, 6>& cx, std::array<double, 6>& cy, int& m) {
    m = 0;
    const auto& ea = ops.ext.map[f.slot0[0]];
    cells[m] = ea.cell;
    cx[m] = -ops.inv_h * ea.coef;
    cy[m] = 0;
    ++m;
    const auto& eb = ops.ext.map[f.slot0[1]];
    cells[m] = eb.cell;
    cx[m] = +ops.inv_h * eb.coef;
    cy[m] = 0;
    ++m;
    for (int k = 0; k < f.n_tang; ++k) {
        const auto& e = ops.ext.map[f.tslot[k]];
        cells[m] = e.cell;
        cx[m] = 0;
        cy[m] = f.tcoef[k] * e.coef;
        ++m;
    }
}

}  // namespace

const FaceOps::CsrPattern& FaceOps::pattern() const {
    if (pattern_built_) return pattern_;
    const long n = grid.n_space_cells();
    std::vector<std::vector<long>> cols(n);
    for (long r = 0; r < n; ++r) cols[r].push_back(r);
    std::array<long, 6> cells;
    std::array<double, 6> cx, cy;
    int m = 0;
    for (const Face& f : faces) {
        face_locals(*this, f, cells, cx, cy, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) cols[cells[a]].push_back(cells[b]);
    }
    pattern_.row_ptr.assign(n + 1, 0);
    for (long r = 0; r < n; ++r) {
        auto& v = cols[r];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        pattern_.row_ptr[r + 1] = pattern_.row_ptr[r] + static_cast<long>(v.size());
    }
    pattern_.col.reserve(pattern_.row_ptr[n]);
    for (long r = 0; r < n; ++r)
        for (long c : cols[r]) pattern_.col.push_back(c);

    auto slot_of = [&](long r, long c) {
        for (long k = pattern_.row_ptr[r]; k < pattern_.row_ptr[r + 1]; ++k)
            if (pattern_.col[k] == c) return k;
        return static_cast<long>(-1);
    };
    pattern_.diag_slot.resize(n);
    for (long r = 0; r < n; ++r) pattern_.diag_slot[r] = slot_of(r, r);
    pattern_.face_slots.reserve(faces.size() * 36);
    for (const Face& f : faces) {
        face_locals(*this, f, cells, cx, cy, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                pattern_.face_slots.push_back(static_cast<int>(slot_of(cells[a], cells[b])));
    }
    pattern_built_ = true;
    return pattern_;
}

void FaceOps::hessian_values(std::span<const double> v, double q, double eps,
                             std::span<const double> diag, std::span<const char> fixed,
                             std::vector<double>& values) const {
    const CsrPattern& pat = pattern();
    values.assign(pat.col.size(), 0.0);
    std::array<long, 6> cells;
    std::array<double, 6> cx, cy;
    int m = 0;
    size_t slot_idx = 0;
    for (const Face& f : faces) {
        const double gx = (v[f.slot0[1]] - v[f.slot0[0]]) * inv_h;
        double gy = 0;
        for (int k = 0; k < f.n_tang; ++k) gy += f.tcoef[k] * v[f.tslot[k]];
        const double s2 = gx * gx + gy * gy;
        const double phi = flux_coef(s2, q, eps);
        const double dphi = (q - 2.0) * std::pow(s2 + eps * eps, (q - 4.0) / 2.0);
        const double hxx = phi + dphi * gx * gx;
        const double hxy = dphi * gx * gy;
        const double hyy = phi + dphi * gy * gy;
        face_locals(*this, f, cells, cx, cy, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                const int slot = pat.face_slots[slot_idx++];
                if (fixed[cells[a]] || fixed[cells[b]]) continue;
                values[slot] += f.w * (hxx * cx[a] * cx[b] + hyy * cy[a] * cy[b] +
                                       hxy * (cx[a] * cy[b] + cy[a] * cx[b]));
            }
    }
    for (long r = 0; r < grid.n_space_cells(); ++r)
        values[pat.diag_slot[r]] += fixed[r] ? 1.0 : diag[r];
}

}  // namespace parcap::detail
