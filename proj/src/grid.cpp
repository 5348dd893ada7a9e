#include "parcap/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace parcap {

namespace {

long checked_axis_cells(double extent, double step, const char* what) {
    if (!(step > 0) || !(extent > 0))
        throw InvalidArgument(std::string(what) + " must be positive");
    const double q = extent / step;
    const long cells = std::lround(q);
    if (cells < 1 || std::abs(q - cells) > 1e-9 * std::max(1.0, q))
        throw InvalidArgument(std::string(what) + ": extent/step must be a positive integer");
    return cells;
}

}  // namespace

GridSpec GridSpec::make(int n, std::array<double, 2> extent, double h, double tau,
                        double T, Rational p) {
    if (n != 1 && n != 2) throw InvalidArgument("spatial dimension must be 1 or 2");
    if (!(p.value() > 2.0)) throw InvalidArgument("p must exceed 2");
    if (p.num > 9 || p.den > 3)
        throw InvalidArgument("p must be rational k/l with k <= 9, l <= 3");
    GridSpec g;
    g.n = n;
    g.extent = extent;
    g.h = h;
    g.tau = tau;
    g.T = T;
    g.p = p;
    g.nx_[0] = static_cast<int>(checked_axis_cells(extent[0], h, "grid x-axis"));
    g.nx_[1] = n == 2 ? static_cast<int>(checked_axis_cells(extent[1], h, "grid y-axis")) : 1;
    g.nt_ = static_cast<int>(checked_axis_cells(T, tau, "grid time axis"));
    g.nsp_ = static_cast<long>(g.nx_[0]) * g.nx_[1];
    return g;
}

double GridSpec::cell_volume() const {
    double v = tau;
    for (int a = 0; a < n; ++a) v *= h;
    return v;
}

GridSpec GridSpec::refined(int levels) const {
    GridSpec g = *this;
    for (int i = 0; i < levels; ++i) {
        g = GridSpec::make(g.n, g.extent, g.h / 2, g.tau / 4, g.T, g.p);
    }
    return g;
}

GridSpec GridSpec::with_T_factor(double factor) const {
    const long extra = std::lround(nt_ * factor);
    return GridSpec::make(n, extent, h, tau, tau * extra, p);
}

bool GridSpec::same_layout(const GridSpec& o) const {
    return n == o.n && nx_ == o.nx_ && nt_ == o.nt_ && h == o.h && tau == o.tau && p == o.p;
}

std::string GridSpec::cache_token() const {
    std::ostringstream os;
    os << "grid{n=" << n << ";ex=" << format_double(extent[0]) << "," << format_double(extent[1])
       << ";h=" << format_double(h) << ";tau=" << format_double(tau)
       << ";T=" << format_double(T) << ";p=" << p.num << "/" << p.den << "}";
    return os.str();
}

double d_p(const SpaceTimePoint& a, const SpaceTimePoint& b, double p, int n) {
    if (!(p >= 2.0)) throw InvalidArgument("d_p needs p >= 2");
    double s2 = 0;
    for (int ax = 0; ax < n; ++ax) s2 += sqr(a.x[ax] - b.x[ax]);
    const double spatial = std::sqrt(s2);
    const double temporal = std::pow(std::abs(a.t - b.t), 1.0 / p);
    return std::max(spatial, temporal);
}

double p_diam(std::span<const SpaceTimePoint> pts, double p, int n) {
    double d = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            d = std::max(d, d_p(pts[i], pts[j], p, n));
    return d;
}

// ---------------------------------------------------------------------------
// PointSet
// ---------------------------------------------------------------------------

PointSet::PointSet(GridSpec grid, std::vector<long> cells)
    : grid_(grid), cells_(std::move(cells)) {
    std::sort(cells_.begin(), cells_.end());
    if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end())
        throw InvalidArgument("PointSet: duplicate cell indices");
    if (!cells_.empty() && (cells_.front() < 0 || cells_.back() >= grid_.n_cells()))
        throw InvalidArgument("PointSet: cell index out of range");
    bbox_.xlo = {0, 0};
    bbox_.xhi = {0, 0};
    bool first = true;
    for (long c : cells_) {
        const long sp = grid_.cell_space(c);
        const int m = grid_.cell_level(c);
        const std::array<int, 2> ij = {grid_.space_ix(sp), grid_.space_iy(sp)};
        for (int a = 0; a < grid_.n; ++a) {
            const double lo = ij[a] * grid_.h, hi = lo + grid_.h;
            if (first || lo < bbox_.xlo[a]) bbox_.xlo[a] = lo;
            if (first || hi > bbox_.xhi[a]) bbox_.xhi[a] = hi;
        }
        const double tlo = (m - 1) * grid_.tau, thi = m * grid_.tau;
        if (first || tlo < bbox_.tlo) bbox_.tlo = tlo;
        if (first || thi > bbox_.thi) bbox_.thi = thi;
        first = false;
    }
}

bool PointSet::contains(long cell) const {
    return std::binary_search(cells_.begin(), cells_.end(), cell);
}

double PointSet::volume() const {
    return static_cast<double>(cells_.size()) * grid_.cell_volume();
}

SpaceTimePoint PointSet::cell_center(long cell) const {
    const long sp = grid_.cell_space(cell);
    SpaceTimePoint z;
    z.x = {grid_.center_x(grid_.space_ix(sp)),
           grid_.n == 2 ? grid_.center_x(grid_.space_iy(sp)) : 0.0};
    z.t = grid_.level_time(grid_.cell_level(cell));
    return z;
}

double PointSet::p_diameter() const {
    if (cells_.empty()) return 0.0;
    // Temporal and spatial maxima can be taken separately under the max-metric.
    const double tspan = bbox_.thi - bbox_.tlo;
    double spatial = 0;
    if (grid_.n == 1) {
        spatial = bbox_.xhi[0] - bbox_.xlo[0];
    } else {
        std::vector<long> sp;
        sp.reserve(cells_.size());
        for (long c : cells_) sp.push_back(grid_.cell_space(c));
        std::sort(sp.begin(), sp.end());
        sp.erase(std::unique(sp.begin(), sp.end()), sp.end());
        for (size_t i = 0; i < sp.size(); ++i) {
            const double ax = grid_.space_ix(sp[i]) * grid_.h;
            const double ay = grid_.space_iy(sp[i]) * grid_.h;
            for (size_t j = i; j < sp.size(); ++j) {
                const double bx = grid_.space_ix(sp[j]) * grid_.h;
                const double by = grid_.space_iy(sp[j]) * grid_.h;
                const double dx = std::abs(ax - bx) + grid_.h;  // corner-to-corner max
                const double dy = std::abs(ay - by) + grid_.h;
                spatial = std::max(spatial, std::sqrt(dx * dx + dy * dy));
            }
        }
    }
    return std::max(spatial, std::pow(tspan, 1.0 / grid_.pval()));
}

bool PointSet::compactly_contained(int margin) const {
    for (long c : cells_) {
        const long sp = grid_.cell_space(c);
        const int m = grid_.cell_level(c);
        if (m < 1 + margin || m > grid_.nt() - 1) return false;
        const int ix = grid_.space_ix(sp);
        if (ix < margin || ix >= grid_.nx(0) - margin) return false;
        if (grid_.n == 2) {
            const int iy = grid_.space_iy(sp);
            if (iy < margin || iy >= grid_.nx(1) - margin) return false;
        }
    }
    return true;
}

PointSet PointSet::refined(int levels) const {
    if (levels <= 0) return *this;
    const GridSpec fine = grid_.refined(1);
    std::vector<long> out;
    out.reserve(cells_.size() * (grid_.n == 2 ? 16 : 8));
    for (long c : cells_) {
        const long sp = grid_.cell_space(c);
        const int m = grid_.cell_level(c);
        const int ix = grid_.space_ix(sp), iy = grid_.space_iy(sp);
        for (int dm = 0; dm < 4; ++dm) {
            const int mf = 4 * (m - 1) + 1 + dm;
            for (int dy = 0; dy < (grid_.n == 2 ? 2 : 1); ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const long spf = fine.space_index(2 * ix + dx, grid_.n == 2 ? 2 * iy + dy : 0);
                    out.push_back(fine.cell_index(spf, mf));
                }
        }
    }
    PointSet res(fine, std::move(out));
    return levels == 1 ? res : res.refined(levels - 1);
}

PointSet PointSet::on_grid(const GridSpec& g) const {
    if (!(g.n == grid_.n && g.h == grid_.h && g.tau == grid_.tau && g.nt() >= grid_.nt()))
        throw InvalidArgument("PointSet::on_grid: incompatible layout");
    return PointSet(g, cells_);
}

PointSet PointSet::unite(const PointSet& other) const {
    if (!grid_.same_layout(other.grid_))
        throw InvalidArgument("PointSet::unite: grid mismatch");
    std::vector<long> merged;
    merged.reserve(cells_.size() + other.cells_.size());
    std::set_union(cells_.begin(), cells_.end(), other.cells_.begin(), other.cells_.end(),
                   std::back_inserter(merged));
    return PointSet(grid_, std::move(merged));
}

bool PointSet::subset_of(const PointSet& other) const {
    return std::includes(other.cells_.begin(), other.cells_.end(), cells_.begin(), cells_.end());
}

namespace {

std::vector<std::array<int, 3>> metric_offsets(const GridSpec& g, double rho) {
    const int rx = static_cast<int>(std::floor(rho / g.h));
    const int rt = static_cast<int>(std::floor(std::pow(rho, g.pval()) / g.tau));
    std::vector<std::array<int, 3>> offs;
    const int ry = g.n == 2 ? rx : 0;
    for (int dm = -rt; dm <= rt; ++dm)
        for (int dy = -ry; dy <= ry; ++dy)
            for (int dx = -rx; dx <= rx; ++dx) {
                const double spatial = std::sqrt(sqr(dx * g.h) + sqr(dy * g.h));
                const double temporal = std::pow(std::abs(dm) * g.tau, 1.0 / g.pval());
                if (std::max(spatial, temporal) <= rho) offs.push_back({dx, dy, dm});
            }
    return offs;
}

}  // namespace

PointSet PointSet::dilate(double rho) const {
    const auto offs = metric_offsets(grid_, rho);
    std::set<long> out;
    for (long c : cells_) {
        const long sp = grid_.cell_space(c);
        const int m = grid_.cell_level(c);
        const int ix = grid_.space_ix(sp), iy = grid_.space_iy(sp);
        for (const auto& o : offs) {
            const int jx = ix + o[0], jy = iy + o[1], jm = m + o[2];
            if (jx < 0 || jx >= grid_.nx(0)) continue;
            if (grid_.n == 2 && (jy < 0 || jy >= grid_.nx(1))) continue;
            if (jm < 1 || jm > grid_.nt()) continue;
            out.insert(grid_.cell_index(grid_.space_index(jx, grid_.n == 2 ? jy : 0), jm));
        }
    }
    return PointSet(grid_, std::vector<long>(out.begin(), out.end()));
}

PointSet PointSet::erode(double rho) const {
    const auto offs = metric_offsets(grid_, rho);
    std::vector<long> out;
    for (long c : cells_) {
        const long sp = grid_.cell_space(c);
        const int m = grid_.cell_level(c);
        const int ix = grid_.space_ix(sp), iy = grid_.space_iy(sp);
        bool keep = true;
        for (const auto& o : offs) {
            const int jx = ix + o[0], jy = iy + o[1], jm = m + o[2];
            if (jx < 0 || jx >= grid_.nx(0) || jm < 1 || jm > grid_.nt() ||
                (grid_.n == 2 && (jy < 0 || jy >= grid_.nx(1)))) {
                keep = false;
                break;
            }
            if (!contains(grid_.cell_index(grid_.space_index(jx, grid_.n == 2 ? jy : 0), jm))) {
                keep = false;
                break;
            }
        }
        if (keep) out.push_back(c);
    }
    return PointSet(grid_, std::move(out));
}

namespace {

std::vector<std::array<int, 3>> box_offsets(const GridSpec& g, int k) {
    std::vector<std::array<int, 3>> offs;
    const int ky = g.n == 2 ? k : 0;
    for (int dm = -k; dm <= k; ++dm)
        for (int dy = -ky; dy <= ky; ++dy)
            for (int dx = -k; dx <= k; ++dx) offs.push_back({dx, dy, dm});
    return offs;
}

}  // namespace

PointSet PointSet::dilate_cells(int k) const {
    const auto offs = box_offsets(grid_, k);
    std::set<long> out;
    for (long c : cells_) {
        const long sp = grid_.cell_space(c);
        const int m = grid_.cell_level(c);
        const int ix = grid_.space_ix(sp), iy = grid_.space_iy(sp);
        for (const auto& o : offs) {
            const int jx = ix + o[0], jy = iy + o[1], jm = m + o[2];
            if (jx < 0 || jx >= grid_.nx(0)) continue;
            if (grid_.n == 2 && (jy < 0 || jy >= grid_.nx(1))) continue;
            if (jm < 1 || jm > grid_.nt()) continue;
            out.insert(grid_.cell_index(grid_.space_index(jx, grid_.n == 2 ? jy : 0), jm));
        }
    }
    return PointSet(grid_, std::vector<long>(out.begin(), out.end()));
}

PointSet PointSet::erode_cells(int k) const {
    const auto offs = box_offsets(grid_, k);
    std::vector<long> out;
    for (long c : cells_) {
        const long sp = grid_.cell_space(c);
        const int m = grid_.cell_level(c);
        const int ix = grid_.space_ix(sp), iy = grid_.space_iy(sp);
        bool keep = true;
        for (const auto& o : offs) {
            const int jx = ix + o[0], jy = iy + o[1], jm = m + o[2];
            if (jx < 0 || jx >= grid_.nx(0) || jm < 1 || jm > grid_.nt() ||
                (grid_.n == 2 && (jy < 0 || jy >= grid_.nx(1)))) {
                keep = false;
                break;
            }
            if (!contains(grid_.cell_index(grid_.space_index(jx, grid_.n == 2 ? jy : 0), jm))) {
                keep = false;
                break;
            }
        }
        if (keep) out.push_back(c);
    }
    return PointSet(grid_, std::move(out));
}

// ---------------------------------------------------------------------------
// Shapes and rasterization
// ---------------------------------------------------------------------------

namespace {

bool shape_contains(const Shape& shape, const SpaceTimePoint& z, const GridSpec& g);

bool cylinder_contains(const ParabolicCylinder& c, const SpaceTimePoint& z, const GridSpec& g) {
    double s2 = 0;
    for (int a = 0; a < g.n; ++a) s2 += sqr(z.x[a] - c.center.x[a]);
    if (std::sqrt(s2) > c.r) return false;
    const double rp = std::pow(c.r, g.pval());
    if (c.variant == CylinderVariant::Full)
        return std::abs(z.t - c.center.t) <= rp;
    return z.t <= c.center.t && z.t >= c.center.t - rp;
}

bool box_contains(const BoxShape& b, const SpaceTimePoint& z, const GridSpec& g) {
    for (int a = 0; a < g.n; ++a)
        if (std::abs(z.x[a] - b.center.x[a]) > b.xext[a] / 2) return false;
    return std::abs(z.t - b.center.t) <= b.text / 2;
}

bool disc_contains(const DiscShape& d, const SpaceTimePoint& z, const GridSpec& g) {
    // Zero temporal thickness: snapped to the nearest time level.
    const int m = std::clamp(static_cast<int>(std::lround(d.center.t / g.tau)), 1, g.nt());
    if (std::abs(z.t - g.level_time(m)) > g.tau / 4) return false;
    double s2 = 0;
    for (int a = 0; a < g.n; ++a) s2 += sqr(z.x[a] - d.center.x[a]);
    return std::sqrt(s2) <= d.r;
}

bool dust_contains_built(const DustLeaves& dl, const SpaceTimePoint& z) {
    for (const auto& r : dl.leaves)
        if (dl.hier.contains(r, z)) return true;
    return false;
}

bool shape_contains(const Shape& shape, const SpaceTimePoint& z, const GridSpec& g) {
    if (const auto* c = std::get_if<ParabolicCylinder>(&shape.v)) return cylinder_contains(*c, z, g);
    if (const auto* b = std::get_if<BoxShape>(&shape.v)) return box_contains(*b, z, g);
    if (const auto* d = std::get_if<DiscShape>(&shape.v)) return disc_contains(*d, z, g);
    if (const auto* u = std::get_if<UnionShape>(&shape.v)) {
        for (const auto& m : u->members)
            if (shape_contains(m, z, g)) return true;
        return false;
    }
    throw InvalidArgument("shape_contains: dust shapes are rasterized via their leaves");
}

}  // namespace

PointSet rasterize(const Shape& shape, const GridSpec& grid) {
    if (const auto* dust = std::get_if<DustShape>(&shape.v)) {
        const DustLeaves dl = dyadic_dust_leaves(*dust, grid.p, grid.n);
        std::vector<long> cells;
        for (int m = 1; m <= grid.nt(); ++m)
            for (long sp = 0; sp < grid.n_space_cells(); ++sp) {
                SpaceTimePoint z;
                z.x = {grid.center_x(grid.space_ix(sp)),
                       grid.n == 2 ? grid.center_x(grid.space_iy(sp)) : 0.0};
                z.t = grid.level_time(m);
                if (dust_contains_built(dl, z)) cells.push_back(grid.cell_index(sp, m));
            }
        return PointSet(grid, std::move(cells));
    }
    std::vector<long> cells;
    for (int m = 1; m <= grid.nt(); ++m)
        for (long sp = 0; sp < grid.n_space_cells(); ++sp) {
            SpaceTimePoint z;
            z.x = {grid.center_x(grid.space_ix(sp)),
                   grid.n == 2 ? grid.center_x(grid.space_iy(sp)) : 0.0};
            z.t = grid.level_time(m);
            if (shape_contains(shape, z, grid)) cells.push_back(grid.cell_index(sp, m));
        }
    return PointSet(grid, std::move(cells));
}

PointSet rasterize(const ParabolicCylinder& cyl, const GridSpec& grid) {
    Shape s;
    s.v = cyl;
    return rasterize(s, grid);
}

// ---------------------------------------------------------------------------
// Dyadic hierarchy
// ---------------------------------------------------------------------------

DyadicHierarchy::DyadicHierarchy(int n, Rational p, double r0, SpaceTimePoint origin)
    : n_(n), p_(p), r0_(r0), origin_(origin) {
    if (!(r0 > 0)) throw InvalidArgument("dyadic root radius must be positive");
    if (n != 1 && n != 2) throw InvalidArgument("dyadic hierarchy: n must be 1 or 2");
}

DyadicHierarchy DyadicHierarchy::covering(const GridSpec& grid) {
    double r0 = std::pow(grid.T, 1.0 / grid.pval());
    for (int a = 0; a < grid.n; ++a) r0 = std::max(r0, grid.extent[a]);
    r0 *= 1.0 + 1e-9;  // keeps boundary cell centers strictly inside the half-open root
    return DyadicHierarchy(grid.n, grid.p, r0, SpaceTimePoint{});
}

long DyadicHierarchy::children_per_rect() const { return 1L << (n_ * l() + k()); }

double DyadicHierarchy::spatial_side(int gen) const {
    return r0_ * std::pow(2.0, -static_cast<double>(gen) * l());
}

double DyadicHierarchy::temporal_side(int gen) const {
    return std::pow(r0_, pval()) * std::pow(2.0, -static_cast<double>(gen) * k());
}

double DyadicHierarchy::rect_diam(int gen) const {
    return std::max(std::sqrt(static_cast<double>(n_)) * spatial_side(gen),
                    std::pow(temporal_side(gen), 1.0 / pval()));
}

std::vector<DyadicRect> DyadicHierarchy::children(const DyadicRect& r) const {
    const int sx = 1 << l();
    const int st = 1 << k();
    std::vector<DyadicRect> out;
    out.reserve(children_per_rect());
    const int sy = n_ == 2 ? sx : 1;
    for (std::int64_t dt = 0; dt < st; ++dt)
        for (std::int64_t dy = 0; dy < sy; ++dy)
            for (std::int64_t dx = 0; dx < sx; ++dx) {
                DyadicRect c;
                c.gen = r.gen + 1;
                c.cx = {r.cx[0] * sx + dx, n_ == 2 ? r.cx[1] * sx + dy : 0};
                c.ct = r.ct * st + dt;
                out.push_back(c);
            }
    return out;
}

void DyadicHierarchy::rect_box(const DyadicRect& r, std::array<double, 2>& xlo,
                               std::array<double, 2>& xhi, double& tlo, double& thi) const {
    const double sx = spatial_side(r.gen);
    const double st = temporal_side(r.gen);
    for (int a = 0; a < 2; ++a) {
        xlo[a] = origin_.x[a] + r.cx[a] * sx;
        xhi[a] = xlo[a] + sx;
    }
    tlo = origin_.t + r.ct * st;
    thi = tlo + st;
}

bool DyadicHierarchy::contains(const DyadicRect& r, const SpaceTimePoint& z) const {
    std::array<double, 2> xlo, xhi;
    double tlo, thi;
    rect_box(r, xlo, xhi, tlo, thi);
    for (int a = 0; a < n_; ++a)
        if (z.x[a] < xlo[a] || z.x[a] >= xhi[a]) return false;
    return z.t >= tlo && z.t < thi;
}

DyadicRect DyadicHierarchy::child_containing(const DyadicRect& r, const SpaceTimePoint& z) const {
    const int sx = 1 << l();
    const int st = 1 << k();
    std::array<double, 2> xlo, xhi;
    double tlo, thi;
    rect_box(r, xlo, xhi, tlo, thi);
    DyadicRect c;
    c.gen = r.gen + 1;
    const double csx = spatial_side(r.gen + 1);
    const double cst = temporal_side(r.gen + 1);
    for (int a = 0; a < n_; ++a) {
        auto d = static_cast<std::int64_t>((z.x[a] - xlo[a]) / csx);
        d = std::clamp<std::int64_t>(d, 0, sx - 1);
        c.cx[a] = r.cx[a] * sx + d;
    }
    auto dt = static_cast<std::int64_t>((z.t - tlo) / cst);
    dt = std::clamp<std::int64_t>(dt, 0, st - 1);
    c.ct = r.ct * st + dt;
    return c;
}

std::string DyadicHierarchy::rect_token(const DyadicRect& r) const {
    std::ostringstream os;
    os << r.gen << ":" << r.cx[0] << "," << r.cx[1] << "," << r.ct;
    return os.str();
}

std::vector<DyadicRect> dyadic_cover(const PointSet& S, int gen, const DyadicHierarchy& hier) {
    std::set<std::array<std::int64_t, 4>> keys;
    for (long cell : S.cells()) {
        const SpaceTimePoint z = S.cell_center(cell);
        DyadicRect r = hier.root();
        if (!hier.contains(r, z)) throw InvalidArgument("dyadic_cover: root too small");
        for (int g = 0; g < gen; ++g) r = hier.child_containing(r, z);
        keys.insert({r.gen, r.cx[0], r.cx[1], r.ct});
    }
    std::vector<DyadicRect> out;
    for (const auto& k : keys)
        out.push_back(DyadicRect{static_cast<int>(k[0]), {k[1], k[2]}, k[3]});
    return out;
}

DustLeaves dyadic_dust_leaves(const DustShape& dust, Rational p, int n) {
    SpaceTimePoint origin;
    for (int a = 0; a < n; ++a) origin.x[a] = dust.center.x[a] - dust.r0 / 2;
    origin.t = dust.center.t - std::pow(dust.r0, p.value()) / 2;
    DyadicHierarchy hier(n, p, dust.r0, origin);

    std::vector<DyadicRect> kept = {hier.root()};
    const double ld = p.den * dust.dimension;
    std::mt19937_64 rng(dust.seed);
    for (int g = 1; g <= dust.generations; ++g) {
        std::vector<DyadicRect> pool;
        for (const auto& r : kept)
            for (const auto& c : hier.children(r)) pool.push_back(c);
        const auto want = static_cast<size_t>(std::max<long long>(
            1, std::llround(std::pow(2.0, ld * g))));
        const size_t take = std::min(pool.size(), want);
        std::vector<DyadicRect> next;
        if (dust.seed == 0) {
            for (size_t i = 0; i < take; ++i) {
                const size_t idx = (i * pool.size() + pool.size() / 2) / take;
                next.push_back(pool[std::min(idx, pool.size() - 1)]);
            }
        } else {
            std::vector<size_t> order(pool.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::shuffle(order.begin(), order.end(), rng);
            order.resize(take);
            std::sort(order.begin(), order.end());
            for (size_t idx : order) next.push_back(pool[idx]);
        }
        kept = std::move(next);
    }
    return DustLeaves{hier, std::move(kept)};
}

}  // namespace parcap
