// Acceptance suite: one pass/fail line per criterion. Exit code equals the
// number of failed criteria. Tolerances are pinned here, in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "parcap/experiments.hpp"
#include "parcap/io.hpp"

using namespace parcap;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void line(int idx, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", pass ? "PASS" : "FAIL", idx, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) { return format_double(v); }

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const ExperimentCriterion* find(const ExperimentReport& rep, const std::string& needle) {
    for (const auto& c : rep.criteria)
        if (c.name.find(needle) != std::string::npos) return &c;
    return nullptr;
}

// --- criterion 1: cylinder scaling --------------------------------------
void criterion_1(const ExperimentEnv& env) {
    auto t0 = Clock::now();
    CylinderScalingParams p1;  // n = 1, levels end at 256 x 4096
    auto rep = exp_cylinder_scaling(p1, env);
    const auto* slope = find(rep, "loglog slope");
    const double runtime = elapsed(t0);

    CylinderScalingParams p2;
    p2.n = 2;
    p2.h0 = 1.0 / 16;
    p2.nt0 = 128;
    p2.levels = 2;
    p2.r_list = {0.08, 0.12, 0.16, 0.2};
    p2.slope_tol = 0.5;
    auto rep2 = exp_cylinder_scaling(p2, env);
    const auto* slope2 = find(rep2, "loglog slope");

    const bool pass = slope && slope->pass && slope2 && slope2->pass && runtime <= 600.0;
    line(1, "cylinder scaling cap(Q_r) ~ r^n", pass,
         "n=1 slope dev " + fmt(slope ? slope->value : -1) + " <= 0.3, n=2 dev " +
             fmt(slope2 ? slope2->value : -1) + " <= 0.5, runtime " + fmt(runtime) + "s <= 600s");
}

// --- criterion 2: capacity equivalence -----------------------------------
void criterion_2(const ExperimentEnv& env) {
    auto t0 = Clock::now();
    auto rep = exp_capacity_equivalence({}, env);
    const double runtime = elapsed(t0);
    const auto* band = find(rep, "C* finite");
    const auto* drift = find(rep, "drift");
    const bool pass = band && band->pass && drift && drift->pass && runtime <= 1200.0;
    line(2, "capacity equivalence band on the cylinder-union suite", pass,
         "C* " + fmt(band ? band->value : -1) + ", drift " + fmt(drift ? drift->value : -1) +
             " < 2, runtime " + fmt(runtime) + "s <= 1200s");
}

// --- criterion 3: Lebesgue bound and sharpness ---------------------------
void criterion_3(const ExperimentEnv& env) {
    auto g = GridSpec::make(1, {1.0, 1.0}, 1.0 / 64, 0.25 / 512, 0.25, Rational(3, 1));
    bool no_violation = true;
    std::vector<double> cyl_ratios;
    // suite: cylinder sweep + a flat box + dust
    for (double r : {0.04, 0.08, 0.12, 0.16}) {
        auto rep = lebesgue_capacity_check(
            rasterize(ParabolicCylinder{{{0.5, 0}, 0.125}, r, CylinderVariant::Full}, g),
            env.solver);
        no_violation = no_violation && !rep.flagged_violation;
        cyl_ratios.push_back(rep.ratio);
    }
    {
        BoxShape b;
        b.center = {{0.5, 0}, 0.125};
        b.xext = {0.3, 0};
        b.text = 0.05;
        Shape s;
        s.v = b;
        no_violation =
            no_violation && !lebesgue_capacity_check(rasterize(s, g), env.solver).flagged_violation;
    }
    {
        DustShape d;
        d.center = {{0.5, 0}, 0.125};
        d.r0 = 0.3;
        d.dimension = 0.5;
        d.generations = 2;
        Shape s;
        s.v = d;
        no_violation =
            no_violation && !lebesgue_capacity_check(rasterize(s, g), env.solver).flagged_violation;
    }
    double mx = 0, mn = 1e300;
    for (double v : cyl_ratios) {
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    const bool pass = no_violation && mx / mn < 3.0;
    line(3, "Lebesgue bound |E| <= C cap^((n+p)/n), sharp on cylinders", pass,
         "violations none=" + std::string(no_violation ? "yes" : "no") + ", cylinder ratio band " +
             fmt(mx / mn) + " < 3");
}

// --- criterion 4: balayage characterization ------------------------------
void criterion_4(const ExperimentEnv& env) {
    auto rep = exp_balayage_equivalence({}, env);
    const auto* rows = find(rep, "co-vanishing rows");
    const bool pass = rows && rows->pass;
    line(4, "balayage co-vanishing (sup R_E < 1e-3 iff cap < 1e-3 scale)", pass,
         "violating rows " + fmt(rows ? rows->value : -1));
}

// --- criterion 5: removability --------------------------------------------
void criterion_5(const ExperimentEnv& env) {
    auto rep = exp_removability({}, env);
    const auto* mono = find(rep, "decreasing");
    const auto* slope = find(rep, "loglog slope vs cap");
    const auto* band = find(rep, "within band");
    const bool pass = mono && mono->pass && slope && slope->pass && band && band->pass;
    line(5, "removability: arm A shrinks with cap, arm B bounded", pass,
         "arm A slope " + fmt(slope ? slope->value : -1) + " >= 0.5, arm B band " +
             fmt(band ? band->value : -1) + " <= 3");
}

// --- criterion 6: polar construction --------------------------------------
void criterion_6(const ExperimentEnv& env) {
    auto rep = exp_polar_construction({}, env);
    const auto* eband = find(rep, "energy max/min");
    const auto* minE = find(rep, "strictly increasing");
    const bool pass = eband && eband->pass && minE && minE->pass;
    line(6, "polar construction: bounded energies, growing pole", pass,
         "energy max/min " + fmt(eband ? eband->value : -1) + " < 10, min growth " +
             std::string(minE && minE->pass ? "strict" : "violated"));
}

// --- criterion 7: level-set estimate ---------------------------------------
void criterion_7(const ExperimentEnv& env) {
    auto rep = exp_level_set_estimate({}, env);
    const auto* band = find(rep, "C(lambda) band");
    const bool pass = band && band->pass;
    line(7, "level-set estimate: C(lambda) stable over a decade", pass,
         "max/min " + fmt(band ? band->value : -1) + " < 4");
}

// --- criterion 8: Frostman certificate -------------------------------------
void criterion_8(const ExperimentEnv& env) {
    (void)env;
    auto g = GridSpec::make(1, {1.0, 1.0}, 1.0 / 64, 0.25 / 1024, 0.25, Rational(3, 1));
    const DyadicHierarchy hier = DyadicHierarchy::covering(g);
    std::mt19937_64 rng(env.seed);
    std::uniform_real_distribution<double> Udim(0.4, 1.6), Ur0(0.25, 0.4);
    std::uniform_int_distribution<int> Ugen(1, 2);
    int ok_cert = 0, ok_lp = 0, ok_greedy = 0, total = 0, bnb_total = 0;
    for (int i = 0; i < 20; ++i) {
        DustShape d;
        d.center = {{0.5, 0}, 0.125};
        d.r0 = Ur0(rng);
        d.dimension = Udim(rng);
        d.generations = Ugen(rng);
        d.seed = 1000 + i;
        Shape s;
        s.v = d;
        PointSet E = rasterize(s, g);
        if (E.empty()) continue;
        ++total;
        const double sexp = 0.8;
        const int gen = std::min(5, leaf_generation(hier, g));
        auto fm = frostman_measure(E, sexp, hier, gen);
        bool cert = fm.certificate_ok;
        for (const auto& gs : fm.certificate) cert = cert && gs.min_slack >= 0.0;
        if (cert) ++ok_cert;
        const double lp = frostman_lp_value(E, sexp, hier, gen);
        if (fm.total_mass >= lp / hier.children_per_rect() - 1e-12) ++ok_lp;
        try {
            auto ex = content_exact_small(E, sexp, 2 * hier.rect_diam(0), hier, gen);
            ++bnb_total;
            if (ex.greedy_cost <= 2 * ex.cover.cost + 1e-12) ++ok_greedy;
        } catch (const Error&) {
            // pool too large: not branch-and-bound solvable, excluded
        }
    }
    const bool pass = total >= 15 && ok_cert == total && ok_lp == total &&
                      bnb_total > 0 && ok_greedy == bnb_total;
    line(8, "Frostman certificate on 20 random dust sets", pass,
         "sets " + std::to_string(total) + ", certificates " + std::to_string(ok_cert) +
             ", mass >= LP/2^(nl+k) " + std::to_string(ok_lp) + ", greedy <= 2x exact " +
             std::to_string(ok_greedy) + "/" + std::to_string(bnb_total));
}

// --- criterion 9: solver verification --------------------------------------
void criterion_9(const ExperimentEnv& env) {
    // (a) manufactured-solution order
    const double a = 0.5;
    auto exact = [&](double x, double t) { return a * std::sin(M_PI * x) * (1 + t); };
    auto rhs = [&](double x, double t) {
        return a * std::sin(M_PI * x) +
               2 * std::pow(M_PI, 3) * a * a * (1 + t) * (1 + t) *
                   std::abs(std::cos(M_PI * x)) * std::sin(M_PI * x);
    };
    std::vector<double> hs, errs;
    for (int nx : {32, 64, 128}) {
        auto g = GridSpec::make(1, {1.0, 1.0}, 1.0 / nx, 0.25 / (2 * nx), 0.25, Rational(3, 1));
        Field f = Field::sampled(g, [&](double x, double, double t) { return rhs(x, t); });
        ForwardOptions fo;
        fo.rhs_density = &f;
        fo.initial.resize(g.n_space_cells());
        for (long c = 0; c < g.n_space_cells(); ++c)
            fo.initial[c] = exact(g.center_x(static_cast<int>(c)), 0);
        Field u = solve_forward(DiscreteMeasure(g), g, env.solver, fo);
        double l2 = 0;
        for (int m = 1; m <= g.nt(); ++m)
            for (long c = 0; c < g.n_space_cells(); ++c)
                l2 += sqr(u.at(c, m) - exact(g.center_x(static_cast<int>(c)), g.level_time(m)));
        errs.push_back(std::sqrt(l2 * g.cell_volume()));
        hs.push_back(g.h);
    }
    const double order = fit_loglog_slope(hs, errs);

    // (b) Barenblatt comparison at 512 cells
    const double mass = 0.002, T = 0.25;
    auto g = GridSpec::make(1, {1.0, 1.0}, 1.0 / 512, T / 2048, T, Rational(3, 1));
    Field u = solve_forward(DiscreteMeasure::dirac(g, {{0.5, 0}, g.tau}, mass), g, env.solver);
    double worst = 0, scale = 0;
    for (int m = g.nt() / 2; m <= g.nt(); m += 32)
        for (long i = 0; i < g.n_space_cells(); ++i) {
            const double x = g.center_x(static_cast<int>(i));
            const double b = barenblatt({{x - 0.5, 0}, g.level_time(m)}, 3, 1, mass);
            scale = std::max(scale, b);
            if (std::abs(x - 0.5) < 0.1) worst = std::max(worst, std::abs(u.at(i, m) - b));
        }
    const double bb_rel = worst / scale;

    // (c) tiny obstacle instance vs an independent minimizer (replicates the
    // unit-test oracle at lower iteration count for the gate)
    auto gt = GridSpec::make(1, {1.0, 1.0}, 0.2, 0.1, 0.3, Rational(3, 1));
    SolverParams spt = env.solver;
    spt.newton_tol = 1e-12;
    Field psi(gt);
    psi.at(2, 1) = 1.0;
    auto sol = solve_obstacle(psi, spt);
    // the oracle: energy descent by cyclic scalar golden-section
    const double eps = spt.eps_for(gt);
    auto face_e = [&](const std::vector<double>& u) {
        auto term = [&](double grad, double w) {
            return w * std::pow(grad * grad + eps * eps, 1.5) / 3.0;
        };
        double e = term(u[0] / (gt.h / 2), gt.h / 2);
        for (int i = 0; i + 1 < 5; ++i) e += term((u[i + 1] - u[i]) / gt.h, gt.h);
        e += term(-u[4] / (gt.h / 2), gt.h / 2);
        return e;
    };
    auto step_e = [&](const std::vector<double>& u, const std::vector<double>& prev) {
        double e = face_e(u);
        for (int c = 0; c < 5; ++c)
            e += gt.h * (0.5 * u[c] * u[c] / gt.tau - u[c] * prev[c] / gt.tau);
        return e;
    };
    std::vector<double> prev(5, 0.0);
    double tiny_err = 0;
    for (int m = 1; m <= 3; ++m) {
        std::vector<double> pslice(psi.level(m).begin(), psi.level(m).end());
        std::vector<double> u(prev);
        for (int c = 0; c < 5; ++c) u[c] = std::max(u[c], pslice[c]);
        for (int sweep = 0; sweep < 6000; ++sweep)
            for (int c = 0; c < 5; ++c) {
                double a1 = pslice[c], b1 = pslice[c] + 3.0;
                auto eval = [&](double v) {
                    auto t = u;
                    t[c] = v;
                    return step_e(t, prev);
                };
                const double gr = 0.618033988749895;
                double x1 = b1 - gr * (b1 - a1), x2 = a1 + gr * (b1 - a1);
                double f1 = eval(x1), f2 = eval(x2);
                for (int it = 0; it < 64; ++it) {
                    if (f1 < f2) {
                        b1 = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b1 - gr * (b1 - a1);
                        f1 = eval(x1);
                    } else {
                        a1 = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a1 + gr * (b1 - a1);
                        f2 = eval(x2);
                    }
                }
                u[c] = std::max(pslice[c], 0.5 * (a1 + b1));
            }
        for (int c = 0; c < 5; ++c) tiny_err = std::max(tiny_err, std::abs(u[c] - sol.R.at(c, m)));
        prev = u;
    }

    const bool pass = order >= 0.8 && bb_rel <= 0.10 && tiny_err <= 1e-6;
    line(9, "solver verification: MMS order, Barenblatt, tiny obstacle", pass,
         "order " + fmt(order) + " >= 0.8, Barenblatt rel sup " + fmt(bb_rel) +
             " <= 0.1, tiny-instance err " + fmt(tiny_err) + " <= 1e-6");
}

// --- criterion 10: dichotomy table ------------------------------------------
void criterion_10(const ExperimentEnv& env) {
    auto rep = exp_hausdorff_dichotomy({}, env);
    bool pass = true;
    std::string detail;
    for (const auto& c : rep.criteria) {
        pass = pass && c.pass;
        if (!c.pass) detail += c.name + "; ";
    }
    if (detail.empty()) detail = "all dichotomy rows satisfy both implications";
    line(10, "capacity-vs-Hausdorff dichotomy table", pass, detail);
}

}  // namespace

int main() {
    setvbuf(stdout, nullptr, _IONBF, 0);
    ExperimentEnv env;
    env.seed = 1;

    const auto t0 = Clock::now();
    criterion_1(env);
    criterion_2(env);
    criterion_3(env);
    criterion_4(env);
    criterion_5(env);
    criterion_6(env);
    criterion_7(env);
    criterion_8(env);
    criterion_9(env);
    criterion_10(env);
    std::printf("acceptance total: %d/10 passed in %.1fs\n", 10 - g_failures, elapsed(t0));
    return g_failures;
}
