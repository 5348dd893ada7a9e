#include "parcap/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace parcap {

Field::Field(GridSpec grid, double fill)
    : grid_(grid),
      values_(static_cast<size_t>(grid.n_space_cells()) * (grid.nt() + 1), fill) {}

Field::Field(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != static_cast<size_t>(grid_.n_space_cells()) * (grid_.nt() + 1))
        throw InvalidArgument("Field: value buffer size does not match grid layout");
}

void Field::truncate_at(double ceiling) {
    if (trunc_.empty()) trunc_.assign(values_.size(), 0);
    for (size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > ceiling) {
            values_[i] = ceiling;
            trunc_[i] = 1;
        }
    }
}

long Field::truncated_count() const {
    long c = 0;
    for (unsigned char b : trunc_) c += b;
    return c;
}

double Field::max_abs() const {
    double m = 0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::max_value() const {
    double m = values_.empty() ? 0 : values_[0];
    for (double v : values_) m = std::max(m, v);
    return m;
}

double Field::l2() const {
    double s = 0;
    const long nsp = grid_.n_space_cells();
    for (int m = 1; m <= grid_.nt(); ++m)
        for (long sp = 0; sp < nsp; ++sp) s += sqr(at(sp, m));
    return std::sqrt(s * grid_.cell_volume());
}

Field Field::sampled(const GridSpec& grid,
                     const std::function<double(double, double, double)>& f) {
    Field out(grid);
    for (int m = 0; m <= grid.nt(); ++m)
        for (long sp = 0; sp < grid.n_space_cells(); ++sp) {
            const double x = grid.center_x(grid.space_ix(sp));
            const double y = grid.n == 2 ? grid.center_x(grid.space_iy(sp)) : 0.0;
            out.at(sp, m) = f(x, y, grid.level_time(m));
        }
    return out;
}

void DiscreteMeasure::add(long cell, double mass) {
    if (mass < 0) throw InvalidArgument("DiscreteMeasure: negative mass");
    if (cell < 0 || cell >= grid_.n_cells())
        throw InvalidArgument("DiscreteMeasure: cell out of range");
    if (mass == 0) return;
    auto it = std::lower_bound(entries_.begin(), entries_.end(), cell,
                               [](const auto& e, long c) { return e.first < c; });
    if (it != entries_.end() && it->first == cell)
        it->second += mass;
    else
        entries_.insert(it, {cell, mass});
}

double DiscreteMeasure::mass(long cell) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), cell,
                               [](const auto& e, long c) { return e.first < c; });
    return (it != entries_.end() && it->first == cell) ? it->second : 0.0;
}

double DiscreteMeasure::total_mass() const {
    double s = 0;
    for (const auto& e : entries_) s += e.second;
    return s;
}

DiscreteMeasure DiscreteMeasure::dirac(const GridSpec& grid, const SpaceTimePoint& z,
                                       double mass) {
    const int ix = std::clamp(static_cast<int>(z.x[0] / grid.h), 0, grid.nx(0) - 1);
    const int iy = grid.n == 2
                       ? std::clamp(static_cast<int>(z.x[1] / grid.h), 0, grid.nx(1) - 1)
                       : 0;
    const int m = std::clamp(static_cast<int>(std::lround(z.t / grid.tau)), 1, grid.nt());
    DiscreteMeasure mu(grid);
    mu.add(grid.cell_index(grid.space_index(ix, iy), m), mass);
    return mu;
}

DiscreteMeasure DiscreteMeasure::uniform(const PointSet& support, double total) {
    DiscreteMeasure mu(support.grid());
    if (support.empty()) return mu;
    const double per = total / static_cast<double>(support.size());
    for (long c : support.cells()) mu.add(c, per);
    return mu;
}

double DiscreteMeasure::mass_in_lower_cylinder(const SpaceTimePoint& z, double rho) const {
    const double rp = std::pow(rho, grid_.pval());
    double s = 0;
    for (const auto& [cell, w] : entries_) {
        const long sp = grid_.cell_space(cell);
        const double t = grid_.level_time(grid_.cell_level(cell));
        if (t > z.t || t < z.t - rp) continue;
        double s2 = sqr(grid_.center_x(grid_.space_ix(sp)) - z.x[0]);
        if (grid_.n == 2) s2 += sqr(grid_.center_x(grid_.space_iy(sp)) - z.x[1]);
        if (std::sqrt(s2) <= rho) s += w;
    }
    return s;
}

std::string DiscreteMeasure::cache_token() const {
    std::ostringstream os;
    os << "mu{";
    for (const auto& [cell, w] : entries_) os << cell << ":" << format_double(w) << ";";
    os << "}";
    return os.str();
}

void SolverParams::validate() const {
    if (eps >= 0 && !(eps >= 0)) throw InvalidArgument("eps must be >= 0");
    if (!(newton_tol > 0)) throw InvalidArgument("newton_tol must be positive");
    if (!(damping > 0 && damping < 1)) throw InvalidArgument("damping must lie in (0,1)");
    if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
}

std::string SolverParams::cache_token(const GridSpec& g) const {
    std::ostringstream os;
    os << "sp{eps=" << format_double(eps_for(g)) << ";tol=" << format_double(newton_tol)
       << ";it=" << max_iter << ";damp=" << format_double(damping)
       << ";cap=" << format_double(m_cap) << "}";
    return os.str();
}

}  // namespace parcap
