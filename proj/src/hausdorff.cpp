#include "parcap/hausdorff.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace parcap {

namespace {

struct CellRef {
    SpaceTimePoint z;
    long cell;
};

// Recursive partition of cell centers among a rectangle's children.
std::vector<std::vector<CellRef>> split_cells(const DyadicHierarchy& hier, const DyadicRect& r,
                                              const std::vector<CellRef>& cells,
                                              const std::vector<DyadicRect>& children) {
    std::map<std::string, size_t> slot;
    for (size_t i = 0; i < children.size(); ++i) slot[hier.rect_token(children[i])] = i;
    std::vector<std::vector<CellRef>> parts(children.size());
    for (const auto& c : cells) {
        const DyadicRect ch = hier.child_containing(r, c.z);
        parts[slot.at(hier.rect_token(ch))].push_back(c);
    }
    return parts;
}

std::vector<CellRef> collect_cells(const PointSet& E, const DyadicHierarchy& hier) {
    std::vector<CellRef> cells;
    cells.reserve(E.size());
    for (long c : E.cells()) {
        CellRef ref{E.cell_center(c), c};
        if (!hier.contains(hier.root(), ref.z))
            throw InvalidArgument("hausdorff: root too small for the set");
        cells.push_back(ref);
    }
    return cells;
}

}  // namespace

bool Cover::feasible_for(const PointSet& E, const DyadicHierarchy& hier) const {
    for (const auto& r : rects)
        if (!(hier.rect_diam(r.gen) < delta)) return false;
    for (long c : E.cells()) {
        const SpaceTimePoint z = E.cell_center(c);
        bool covered = false;
        for (const auto& r : rects)
            if (hier.contains(r, z)) {
                covered = true;
                break;
            }
        if (!covered) return false;
    }
    return true;
}

int leaf_generation(const DyadicHierarchy& hier, const GridSpec& grid) {
    // deepest generation whose rectangles are still at least one cell in both
    // axes: below that, covering cell centers no longer covers cells and every
    // content would collapse to zero
    int gen = 0;
    while (gen < 48 && hier.spatial_side(gen + 1) >= grid.h * (1 - 1e-12) &&
           hier.temporal_side(gen + 1) >= grid.tau * (1 - 1e-12))
        ++gen;
    return gen;
}

namespace {

// Greedy descent: take R when its cost beats the recursive children total.
void descend_cover(const DyadicHierarchy& hier, const DyadicRect& r,
                   const std::vector<CellRef>& cells, double s, double delta, int max_gen,
                   std::vector<DyadicRect>& out, double& cost) {
    if (cells.empty()) return;
    const double own = std::pow(hier.rect_diam(r.gen), s);
    const bool own_ok = hier.rect_diam(r.gen) < delta;
    if (r.gen >= max_gen) {
        if (!own_ok) throw InvalidArgument("content: delta below the leaf diameter");
        out.push_back(r);
        cost += own;
        return;
    }
    const auto children = hier.children(r);
    const auto parts = split_cells(hier, r, cells, children);
    std::vector<DyadicRect> sub;
    double sub_cost = 0;
    for (size_t i = 0; i < children.size(); ++i)
        if (!parts[i].empty()) descend_cover(hier, children[i], parts[i], s, delta, max_gen, sub, sub_cost);
    if (own_ok && own <= sub_cost) {
        out.push_back(r);
        cost += own;
    } else {
        for (auto& x : sub) out.push_back(x);
        cost += sub_cost;
    }
}

// Pool of candidate rectangles: every rect between the root and max_gen that
// meets E and satisfies the delta constraint.
void build_pool(const DyadicHierarchy& hier, const DyadicRect& r, const std::vector<CellRef>& cells,
                double delta, int max_gen, std::vector<std::pair<DyadicRect, std::vector<long>>>& pool) {
    if (cells.empty()) return;
    if (hier.rect_diam(r.gen) < delta) {
        std::vector<long> ids;
        ids.reserve(cells.size());
        for (const auto& c : cells) ids.push_back(c.cell);
        pool.push_back({r, std::move(ids)});
    }
    if (r.gen >= max_gen) return;
    const auto children = hier.children(r);
    const auto parts = split_cells(hier, r, cells, children);
    for (size_t i = 0; i < children.size(); ++i)
        if (!parts[i].empty()) build_pool(hier, children[i], parts[i], delta, max_gen, pool);
}

}  // namespace

Cover content_upper(const PointSet& E, double s, double delta, const DyadicHierarchy& hier,
                    int max_gen) {
    if (!(s > 0)) throw InvalidArgument("content: s must be positive");
    Cover cov;
    cov.s = s;
    cov.delta = delta;
    if (E.empty()) return cov;
    const int floor_gen = leaf_generation(hier, E.grid());
    max_gen = max_gen < 0 ? floor_gen : std::min(max_gen, floor_gen);
    const auto cells = collect_cells(E, hier);
    descend_cover(hier, hier.root(), cells, s, delta, max_gen, cov.rects, cov.cost);
    return cov;
}

ExactContent content_exact_small(const PointSet& E, double s, double delta,
                                 const DyadicHierarchy& hier, int max_gen) {
    if (!(s > 0)) throw InvalidArgument("content: s must be positive");
    ExactContent out;
    out.cover.s = s;
    out.cover.delta = delta;
    if (E.empty()) return out;
    const int floor_gen = leaf_generation(hier, E.grid());
    max_gen = max_gen < 0 ? floor_gen : std::min(max_gen, floor_gen);
    const auto cells = collect_cells(E, hier);

    std::vector<std::pair<DyadicRect, std::vector<long>>> pool;
    build_pool(hier, hier.root(), cells, delta, max_gen, pool);
    if (pool.size() > 2000) throw InvalidArgument("content pool too large: use greedy");

    std::map<long, int> elem_id;
    for (const auto& c : cells) elem_id.emplace(c.cell, static_cast<int>(elem_id.size()));
    SetCoverInstance inst;
    inst.n_elements = static_cast<int>(elem_id.size());
    for (const auto& [rect, ids] : pool) {
        std::vector<int> elems;
        elems.reserve(ids.size());
        for (long id : ids) elems.push_back(elem_id.at(id));
        std::sort(elems.begin(), elems.end());
        inst.sets.push_back(std::move(elems));
        inst.weights.push_back(std::pow(hier.rect_diam(rect.gen), s));
    }
    const SetCoverResult sc = solve_set_cover(inst);
    if (!sc.feasible) throw Error("content_exact_small: no feasible cover in pool");
    out.lp_bound = sc.lp_bound;
    out.nodes = sc.nodes_explored;
    out.cover.cost = sc.cost;
    for (int idx : sc.chosen) out.cover.rects.push_back(pool[idx].first);
    out.greedy_cost = content_upper(E, s, delta, hier, max_gen).cost;
    return out;
}

FrostmanMeasure frostman_measure(const PointSet& E, double s, const DyadicHierarchy& hier,
                                 int max_gen) {
    if (!(s > 0)) throw InvalidArgument("frostman: s must be positive");
    if (E.empty()) throw InvalidArgument("frostman: empty set");
    FrostmanMeasure fm;
    fm.s = s;
    const int floor_gen = leaf_generation(hier, E.grid());
    max_gen = max_gen < 0 ? floor_gen : std::min(max_gen, floor_gen);
    fm.leaf_gen = max_gen;
    const auto cells = collect_cells(E, hier);

    // leaves meeting E, with the cells they contain
    std::map<std::string, std::pair<DyadicRect, double>> leaves;
    std::vector<std::string> cell_leaf(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) {
        DyadicRect r = hier.root();
        for (int g = 0; g < max_gen; ++g) r = hier.child_containing(r, cells[i].z);
        const std::string tok = hier.rect_token(r);
        leaves.emplace(tok, std::make_pair(r, 0.0));
        cell_leaf[i] = tok;
    }
    const double leaf_cap = std::pow(hier.rect_diam(max_gen), s);
    std::vector<DyadicRect> leaf_rects;
    std::vector<double> mass;
    std::map<std::string, size_t> leaf_slot;
    for (auto& [tok, rv] : leaves) {
        leaf_slot[tok] = leaf_rects.size();
        leaf_rects.push_back(rv.first);
        mass.push_back(leaf_cap);
    }

    // ancestor key of a leaf at generation g: coordinates shifted down
    auto ancestor_key = [&](const DyadicRect& leaf, int g) {
        const int dg = leaf.gen - g;
        std::array<std::int64_t, 4> key;
        key[0] = g;
        key[1] = leaf.cx[0] >> (dg * hier.l());
        key[2] = leaf.cx[1] >> (dg * hier.l());
        key[3] = leaf.ct >> (dg * hier.k());
        return key;
    };

    for (int g = max_gen - 1; g >= 0; --g) {
        const double cap = std::pow(hier.rect_diam(g), s);
        std::map<std::array<std::int64_t, 4>, double> group_mass;
        for (size_t i = 0; i < leaf_rects.size(); ++i)
            group_mass[ancestor_key(leaf_rects[i], g)] += mass[i];
        std::map<std::array<std::int64_t, 4>, double> scale;
        double min_slack = std::numeric_limits<double>::infinity();
        for (auto& [key, m] : group_mass) {
            if (m > cap) {
                scale[key] = cap / m;
                m = cap;
            }
            min_slack = std::min(min_slack, cap - m);
        }
        if (!scale.empty())
            for (size_t i = 0; i < leaf_rects.size(); ++i) {
                auto it = scale.find(ancestor_key(leaf_rects[i], g));
                if (it != scale.end()) mass[i] *= it->second;
            }
        fm.certificate.push_back({g, min_slack, static_cast<long>(group_mass.size())});
        if (min_slack < 0) fm.certificate_ok = false;
    }
    std::reverse(fm.certificate.begin(), fm.certificate.end());

    fm.total_mass = 0;
    for (size_t i = 0; i < leaf_rects.size(); ++i) {
        fm.leaf_masses.emplace_back(leaf_rects[i], mass[i]);
        fm.total_mass += mass[i];
    }
    return fm;
}

DiscreteMeasure frostman_cell_measure(const FrostmanMeasure& fm, const PointSet& E,
                                      const DyadicHierarchy& hier) {
    DiscreteMeasure mu(E.grid());
    for (const auto& [rect, m] : fm.leaf_masses) {
        std::vector<long> inside;
        for (long c : E.cells())
            if (hier.contains(rect, E.cell_center(c))) inside.push_back(c);
        if (inside.empty()) continue;
        const double per = m / static_cast<double>(inside.size());
        for (long c : inside) mu.add(c, per);
    }
    return mu;
}

double frostman_lp_value(const PointSet& E, double s, const DyadicHierarchy& hier, int max_gen) {
    if (E.empty()) return 0.0;
    const int floor_gen = leaf_generation(hier, E.grid());
    max_gen = max_gen < 0 ? floor_gen : std::min(max_gen, floor_gen);
    const auto cells = collect_cells(E, hier);

    // leaves (variables) and all ancestors (constraints)
    std::map<std::array<std::int64_t, 4>, std::vector<size_t>> constraint;  // key -> leaf ids
    std::map<std::string, size_t> leaf_slot;
    std::vector<DyadicRect> leaf_rects;
    for (const auto& c : cells) {
        DyadicRect r = hier.root();
        for (int g = 0; g < max_gen; ++g) r = hier.child_containing(r, c.z);
        const std::string tok = hier.rect_token(r);
        if (!leaf_slot.count(tok)) {
            leaf_slot[tok] = leaf_rects.size();
            leaf_rects.push_back(r);
        }
    }
    auto ancestor_key = [&](const DyadicRect& leaf, int g) {
        const int dg = leaf.gen - g;
        std::array<std::int64_t, 4> key;
        key[0] = g;
        key[1] = leaf.cx[0] >> (dg * hier.l());
        key[2] = leaf.cx[1] >> (dg * hier.l());
        key[3] = leaf.ct >> (dg * hier.k());
        return key;
    };
    for (size_t i = 0; i < leaf_rects.size(); ++i)
        for (int g = 0; g <= max_gen; ++g) constraint[ancestor_key(leaf_rects[i], g)].push_back(i);

    std::vector<std::vector<double>> A(constraint.size(), std::vector<double>(leaf_rects.size(), 0.0));
    std::vector<double> b(constraint.size());
    size_t row = 0;
    for (const auto& [key, ids] : constraint) {
        b[row] = std::pow(hier.rect_diam(static_cast<int>(key[0])), s);
        for (size_t id : ids) A[row][id] = 1.0;
        ++row;
    }
    std::vector<double> c(leaf_rects.size(), 1.0);
    const LpResult lp = lp_solve_pack(A, b, c);
    if (!lp.feasible) throw Error("frostman LP infeasible");
    return lp.value;
}

double wolff_potential(const DiscreteMeasure& mu, const SpaceTimePoint& z, double r, double p,
                       int n) {
    if (!(r > 0)) throw InvalidArgument("wolff_potential: r must be positive");
    const double beta = p / (n * (p - 2.0) + p);
    const GridSpec& g = mu.grid();
    const double leaf = std::max(g.h, std::pow(g.tau, 1.0 / p));
    int J = 0;
    while (r * std::pow(2.0, -(J + 1)) > leaf && J < 60) ++J;
    double acc = 0;
    for (int j = 0; j <= J; ++j) {
        const double rho = r * std::pow(2.0, -j);
        const double m = mu.mass_in_lower_cylinder(z, rho);
        if (m > 0) acc += std::pow(m / std::pow(rho, n), beta) * std::log(2.0);
    }
    return std::pow(acc, 1.0 / beta);
}

LebesgueCheck lebesgue_capacity_check(const PointSet& E, const SolverParams& params,
                                      double mass_tol) {
    LebesgueCheck out;
    out.volume = E.volume();
    if (E.empty()) {
        out.vacuous = true;
        return out;
    }
    const GridSpec& g = E.grid();
    out.cap = cap_balayage(E, params).value;
    const double expo = (g.n + g.pval()) / g.n;
    if (out.cap <= mass_tol) {
        out.flagged_violation = out.volume > 0;
        out.ratio = 0;
    } else {
        out.ratio = out.volume / std::pow(out.cap, expo);
    }
    return out;
}

}  // namespace parcap
