#include <doctest.h>

#include <cmath>
#include <random>

#include "parcap/capacity.hpp"
#include "parcap/hausdorff.hpp"

using namespace parcap;

namespace {
GridSpec grid1d(int nx = 32, int nt = 128, double T = 0.25) {
    return GridSpec::make(1, {1.0, 1.0}, 1.0 / nx, T / nt, T, Rational(3, 1));
}
PointSet cyl(const GridSpec& g, double r, double x0 = 0.5, double t0 = 0.125) {
    return rasterize(ParabolicCylinder{{{x0, 0}, t0}, r, CylinderVariant::Full}, g);
}
}  // namespace

TEST_CASE("energy: trivial, closed form, homogeneity") {
    auto g = GridSpec::make(1, {1.0, 1.0}, 1.0 / 256, 1.0 / 256, 1.0, Rational(3, 1));
    CHECK(energy(Field(g)) == 0);

    // u = sin(pi x), constant in t: int u^2 = 1/2,
    // int int |u'|^3 = T pi^3 (4 / (3 pi))
    Field u = Field::sampled(g, [](double x, double, double) { return std::sin(M_PI * x); });
    const double expect = 0.5 + std::pow(M_PI, 3) * 4.0 / (3.0 * M_PI);
    CHECK(energy(u) == doctest::Approx(expect).epsilon(0.002));

    // scaling: quadratic part c^2, gradient part c^p
    Field uc = u;
    const double c = 0.35;
    for (double& v : uc.mutable_values()) v *= c;
    const double vp = std::pow(v_norm(u), 3.0);
    CHECK(v_norm(uc) == doctest::Approx(c * v_norm(u)).epsilon(1e-10));
    CHECK(energy(uc) == doctest::Approx(c * c * 0.5 + c * c * c * vp).epsilon(0.002));
}

TEST_CASE("dual norm: zero, linear closed form, sampled-sup lower bound") {
    SolverParams sp;
    auto g = GridSpec::make(1, {1.0, 1.0}, 1.0 / 256, 0.5, 0.5, Rational(3, 1));  // one slice
    CHECK(dual_norm(Field(g), 0, sp) == 0);

    // p = 2 single slice: -w'' = sin(pi x), dual slice norm = 1/(pi sqrt 2)
    Field v = Field::sampled(g, [](double x, double, double t) {
        return t > 0 ? std::sin(M_PI * x) : 0.0;
    });
    auto dn = dual_norm_full(v, 2.0, sp);
    CHECK(std::sqrt(dn.slice_gradnorm_p[1]) == doctest::Approx(1.0 / (M_PI * std::sqrt(2.0)))
                                                   .epsilon(1e-4));

    // weak duality: random normalized test fields never beat the computed norm
    auto g2 = grid1d(32, 32);
    Field dens = Field::sampled(g2, [](double x, double, double t) {
        return std::sin(2 * M_PI * x) * (t > 0.1 ? 1.0 : -0.5);
    });
    const double dual = dual_norm(dens, 0, sp);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int rep = 0; rep < 100; ++rep) {
        Field phi(g2);
        for (int m = 1; m <= g2.nt(); ++m)
            for (long c = 0; c < g2.n_space_cells(); ++c) phi.at(c, m) = U(rng);
        const double vn = v_norm(phi);
        if (vn == 0) continue;
        double pairing = 0;
        for (int m = 1; m <= g2.nt(); ++m)
            for (long c = 0; c < g2.n_space_cells(); ++c)
                pairing += dens.at(c, m) * phi.at(c, m);
        pairing = std::abs(pairing) * g2.cell_volume() / vn;
        CHECK(pairing <= dual * (1.0 + 1e-9));
    }
}

TEST_CASE("balayage capacity: basics and monotonicity") {
    auto g = grid1d();
    SolverParams sp;
    CHECK(cap_balayage(PointSet(g, {}), sp).value == 0);

    auto small = cap_balayage(cyl(g, 0.08), sp);
    auto large = cap_balayage(cyl(g, 0.14), sp);
    CHECK(small.value > 0);
    CHECK(small.value <= large.value + 1e-9);
    CHECK(small.method == "balayage-mass");

    // margin violation
    PointSet wall(g, {g.cell_index(g.space_index(0), 10)});
    CHECK_THROWS_AS(static_cast<void>(cap_balayage(wall, sp)), InvalidArgument);

    // T-stabilization: the measure stops accruing after the obstacle support
    CapacityOptions copt;
    copt.t_check = true;
    auto est = cap_balayage(cyl(g, 0.1), sp, copt);
    CHECK(est.t_stabilized);
    CHECK(est.t_stab_change < 0.01);
}

TEST_CASE("energy capacity vs a direct admissible-field minimization") {
    // tiny instance: projected subgradient on E_inf over fields >= 1_K
    auto g = GridSpec::make(1, {1.0, 1.0}, 1.0 / 8, 0.02, 0.1, Rational(3, 1));
    SolverParams sp;
    PointSet K(g, {g.cell_index(g.space_index(4), 2)});
    const double cap_en = cap_energy(K, sp).value;

    // oracle: subgradient descent on max_m sum u^2 h + sum_faces w |g|^3 tau
    const long nsp = g.n_space_cells();
    const int nt = g.nt();
    auto project = [&](std::vector<double>& u) {
        for (long c = 0; c < nsp * (nt + 1); ++c) u[c] = std::max(u[c], 0.0);
        u[2 * nsp + 4] = std::max(u[2 * nsp + 4], 1.0);  // level 2, cell 4
    };
    auto energy_of = [&](const std::vector<double>& u) {
        Field f(g, std::vector<double>(u));
        return energy(f);
    };
    std::vector<double> u(nsp * (nt + 1), 0.0), best_u;
    project(u);
    double best = energy_of(u);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1, 1);
    // finite-difference subgradient descent with decaying steps
    for (int it = 1; it <= 3000; ++it) {
        std::vector<double> grad(u.size(), 0.0);
        const double e0 = energy_of(u);
        const double fd = 1e-6;
        for (size_t i = 0; i < u.size(); ++i) {
            auto pert = u;
            pert[i] += fd;
            grad[i] = (energy_of(pert) - e0) / fd;
        }
        const double step = 0.2 / std::sqrt(static_cast<double>(it));
        for (size_t i = 0; i < u.size(); ++i) u[i] -= step * grad[i];
        project(u);
        const double e = energy_of(u);
        if (e < best) best = e;
    }
    INFO("oracle best ", best, " cap_energy ", cap_en);
    // the reduite energy is an upper-bound-flavored estimate: above the true
    // infimum, within a small factor on this tiny instance
    CHECK(cap_en >= best * 0.999);
    CHECK(cap_en <= best * 2.5);
}

TEST_CASE("variational capacity: tents never beat the estimate") {
    auto g = grid1d(32, 96);
    SolverParams sp;
    PointSet K = cyl(g, 0.1);
    CapacityOptions copt;
    copt.descent_iters = 60;
    copt.multistart = 1;
    const double est = cap_variational(K, sp, copt).value;
    CHECK(cap_variational(PointSet(g, {}), sp, copt).value == 0);

    const double p = g.pval();
    const double pp = p / (p - 1.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(1.0, 2.2);
    for (int rep = 0; rep < 10; ++rep) {
        const double reach = U(rng) * 0.25;
        Field tent = Field::sampled(g, [&](double x, double, double t) {
            const double d = d_p({{x, 0}, t}, {{0.5, 0}, 0.125}, p, 1);
            return std::clamp(1.0 - std::max(0.0, d - 0.11) / reach, 0.0, 1.0);
        });
        for (long c = 0; c < g.n_space_cells(); ++c) {
            tent.at(c, 0) = 0;
            tent.at(c, g.nt()) = 0;
        }
        bool admissible = true;
        for (long cell : K.cells())
            if (tent.at_cell(cell) < 1.0) admissible = false;
        if (!admissible) continue;
        const double w = std::pow(v_norm(tent), p) +
                         std::pow(dual_norm(time_derivative(tent), 0, sp), pp);
        CHECK(w >= est * 0.999);
    }
}

TEST_CASE("inner and outer capacities bracket the set") {
    auto g = grid1d(32, 96);
    SolverParams sp;
    PointSet K = cyl(g, 0.12);

    const double plain = cap_balayage(K, sp).value;
    auto inner = inner_cap(K, CapacityMethod::BalayageMass, sp);
    auto outer = outer_cap(K, CapacityMethod::BalayageMass, sp);
    // compact set: the exhaustion reaches the set itself
    CHECK(inner.value == doctest::Approx(plain));
    CHECK(outer.value >= inner.value - 1e-12);
    // one-cell dilation slack only
    CHECK(outer.value <= plain * 2.0);
    CHECK(outer.trace.size() >= 2);
    CHECK(outer.trace.front() >= outer.trace.back() - 1e-12);  // decreasing in the dilation

    // disc: outer capacity bounded away from zero under refinement
    DiscShape d;
    d.center = {{0.5, 0}, 0.125};
    d.r = 0.15;
    Shape s;
    s.v = d;
    const double o0 = outer_cap(rasterize(s, g), CapacityMethod::BalayageMass, sp).value;
    const double o1 =
        outer_cap(rasterize(s, g.refined(1)), CapacityMethod::BalayageMass, sp).value;
    CHECK(o1 > o0 / 3);
}

TEST_CASE("capacitability gap shrinks under refinement") {
    SolverParams sp;
    auto g = grid1d(32, 96);
    PointSet K = cyl(g, 0.12);
    const double gap0 = capacitability_gap(K, sp);
    const double cap0 = cap_balayage(K, sp).value;
    CHECK(gap0 >= -1e-9);
    CHECK(gap0 <= 0.8 * cap0);

    PointSet Kf = cyl(g.refined(1), 0.12);
    const double gap1 = capacitability_gap(Kf, sp);
    const double cap1 = cap_balayage(Kf, sp).value;
    CHECK(gap1 / cap1 < gap0 / cap0 + 0.02);  // relative gap not growing

    CHECK(capacitability_gap(PointSet(g, {}), sp) == 0);

    // open box and dust rows: gaps stay small fractions of the capacity
    BoxShape b;
    b.center = {{0.5, 0}, 0.125};
    b.xext = {0.25, 0};
    b.text = 0.06;
    Shape sb;
    sb.v = b;
    PointSet box = rasterize(sb, g).erode_cells(1);  // open: one shell removed
    CHECK(capacitability_gap(box, sp) <= 0.8 * cap_balayage(box, sp).value);

    DustShape d;
    d.center = {{0.5, 0}, 0.125};
    d.r0 = 0.3;
    d.dimension = 0.5;
    d.generations = 1;
    Shape sd;
    sd.v = d;
    PointSet dust = rasterize(sd, g);
    CHECK(capacitability_gap(dust, sp) <= 1.2 * cap_balayage(dust, sp).value);
}

TEST_CASE("capacity is bounded by the margin box") {
    auto g = grid1d(32, 96);
    SolverParams sp;
    // the largest admissible compact: everything one cell off the boundary
    std::vector<long> cells;
    for (int m = 2; m <= g.nt() - 1; ++m)
        for (int ix = 1; ix < g.nx(0) - 1; ++ix)
            cells.push_back(g.cell_index(g.space_index(ix), m));
    const double box_cap = cap_balayage(PointSet(g, std::move(cells)), sp).value;
    for (double r : {0.06, 0.1, 0.14}) {
        const double c = cap_balayage(cyl(g, r), sp).value;
        CHECK(c >= 0);
        CHECK(c <= box_cap);
    }
}

TEST_CASE("capacity bounded by a stable multiple of the content at s = n") {
    SolverParams sp;
    std::vector<double> suite_C;
    for (int lvl = 0; lvl < 2; ++lvl) {
        auto g = grid1d(32, 128).refined(lvl);
        const DyadicHierarchy hier = DyadicHierarchy::covering(g);
        double C = 0;
        for (double r : {0.08, 0.14}) {
            PointSet K = cyl(g, r);
            const double cap = cap_balayage(K, sp).value;
            const double content =
                content_upper(K, g.n, 2 * hier.rect_diam(0), hier).cost;
            REQUIRE(content > 0);
            C = std::max(C, cap / content);
        }
        {
            DustShape d;
            d.center = {{0.5, 0}, 0.125};
            d.r0 = 0.3;
            d.dimension = 0.5;
            d.generations = 1;
            Shape sh;
            sh.v = d;
            PointSet E = rasterize(sh, g);
            const double cap = cap_balayage(E, sp).value;
            const double content =
                content_upper(E, g.n, 2 * hier.rect_diam(0), hier).cost;
            REQUIRE(content > 0);
            C = std::max(C, cap / content);
        }
        suite_C.push_back(C);
    }
    CHECK(suite_C[0] < 50.0);
    const double drift = std::max(suite_C[0] / suite_C[1], suite_C[1] / suite_C[0]);
    CHECK(drift < 2.5);
}

TEST_CASE("level sets above the max are trivially bounded") {
    auto g = grid1d(32, 96);
    SolverParams sp;
    Field u = solve_forward(DiscreteMeasure::dirac(g, {{0.5, 0}, 0.02}, 0.01), g, sp);
    PointSet K = cyl(g, 0.15);
    auto rep = level_set_capacity_check(u, K, {u.max_value() * 2}, sp);
    REQUIRE(rep.rows.size() == 1);
    CHECK(!rep.rows[0].skipped);
    CHECK(rep.rows[0].lhs_cap == 0);
}

TEST_CASE("norm report composes the pieces") {
    auto g = grid1d(32, 64);
    SolverParams sp;
    Field u = Field::sampled(g, [](double x, double, double t) {
        return std::sin(M_PI * x) * t * (0.25 - t);
    });
    for (long c = 0; c < g.n_space_cells(); ++c) u.at(c, g.nt()) = 0;
    auto nr = norm_report(u, sp);
    CHECK(nr.v_norm > 0);
    CHECK(nr.vdual_norm > 0);
    const double p = g.pval();
    CHECK(nr.w_norm ==
          doctest::Approx(std::pow(nr.v_norm, p) + std::pow(nr.vdual_norm, p / (p - 1))));
    CHECK(nr.energy > 0);
}
