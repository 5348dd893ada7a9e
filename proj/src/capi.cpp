#include "parcap.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "parcap/runner.hpp"

using namespace parcap;

namespace {

thread_local std::string g_last_error;

parcap_status fail(parcap_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
parcap_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const SolverDiverged& e) {
        return fail(PARCAP_SOLVER_DIVERGED, e.what());
    } catch (const InvalidArgument& e) {
        return fail(PARCAP_INVALID_ARGUMENT, e.what());
    } catch (const IoError& e) {
        return fail(PARCAP_IO_ERROR, e.what());
    } catch (const std::exception& e) {
        return fail(PARCAP_INTERNAL_ERROR, e.what());
    }
}

SolverParams to_params(const parcap_solver_params* p) {
    SolverParams sp;
    if (!p) return sp;
    sp.eps = p->eps;
    sp.newton_tol = p->newton_tol;
    sp.max_iter = p->max_iter;
    sp.damping = p->damping;
    sp.m_cap = p->m_cap;
    sp.max_active_set_iter = p->max_active_set_iter;
    sp.contact_tol_factor = p->contact_tol_factor;
    return sp;
}

}  // namespace

struct parcap_grid {
    GridSpec g;
};
struct parcap_set {
    PointSet s;
};
struct parcap_field {
    Field f;
};
struct parcap_obstacle_result {
    ObstacleSolution sol;
};
struct parcap_config {
    RunConfig cfg;
};

extern "C" {

const char* parcap_version(void) { return "0.1.0"; }

const char* parcap_last_error(void) { return g_last_error.c_str(); }

void parcap_solver_params_init(parcap_solver_params* params) {
    if (!params) return;
    const SolverParams d;
    params->eps = d.eps;
    params->newton_tol = d.newton_tol;
    params->max_iter = d.max_iter;
    params->damping = d.damping;
    params->m_cap = d.m_cap;
    params->max_active_set_iter = d.max_active_set_iter;
    params->contact_tol_factor = d.contact_tol_factor;
}

parcap_status parcap_grid_create(int n, double extent_x, double extent_y, double h, double tau,
                                 double T, int p_num, int p_den, parcap_grid** out) {
    if (!out) return fail(PARCAP_INVALID_ARGUMENT, "out must not be NULL");
    return guarded([&] {
        auto g = GridSpec::make(n, {extent_x, n == 2 ? extent_y : 1.0}, h, tau, T,
                                Rational(p_num, p_den));
        *out = new parcap_grid{g};
        return PARCAP_OK;
    });
}

void parcap_grid_free(parcap_grid* grid) { delete grid; }

parcap_status parcap_grid_counts(const parcap_grid* grid, long* space_cells, int* time_levels) {
    if (!grid) return fail(PARCAP_INVALID_ARGUMENT, "grid must not be NULL");
    if (space_cells) *space_cells = grid->g.n_space_cells();
    if (time_levels) *time_levels = grid->g.nt();
    return PARCAP_OK;
}

parcap_status parcap_dp(double ax, double ay, double at, double bx, double by, double bt,
                        double p, int n, double* out) {
    if (!out) return fail(PARCAP_INVALID_ARGUMENT, "out must not be NULL");
    return guarded([&] {
        *out = d_p({{ax, ay}, at}, {{bx, by}, bt}, p, n);
        return PARCAP_OK;
    });
}

parcap_status parcap_barenblatt(double x, double y, double t, double p, int n, double mass,
                                double* out) {
    if (!out) return fail(PARCAP_INVALID_ARGUMENT, "out must not be NULL");
    return guarded([&] {
        *out = barenblatt({{x, y}, t}, p, n, mass);
        return PARCAP_OK;
    });
}

parcap_status parcap_set_cylinder(const parcap_grid* grid, double x, double y, double t, double r,
                                  int lower_half, parcap_set** out) {
    if (!grid || !out) return fail(PARCAP_INVALID_ARGUMENT, "grid/out must not be NULL");
    return guarded([&] {
        ParabolicCylinder cyl{{{x, y}, t}, r,
                              lower_half ? CylinderVariant::LowerHalf : CylinderVariant::Full};
        *out = new parcap_set{rasterize(cyl, grid->g)};
        return PARCAP_OK;
    });
}

parcap_status parcap_set_box(const parcap_grid* grid, double x, double y, double t, double ext_x,
                             double ext_y, double ext_t, parcap_set** out) {
    if (!grid || !out) return fail(PARCAP_INVALID_ARGUMENT, "grid/out must not be NULL");
    return guarded([&] {
        BoxShape b;
        b.center = {{x, y}, t};
        b.xext = {ext_x, ext_y};
        b.text = ext_t;
        Shape s;
        s.v = b;
        *out = new parcap_set{rasterize(s, grid->g)};
        return PARCAP_OK;
    });
}

parcap_status parcap_set_disc(const parcap_grid* grid, double x, double y, double t, double r,
                              parcap_set** out) {
    if (!grid || !out) return fail(PARCAP_INVALID_ARGUMENT, "grid/out must not be NULL");
    return guarded([&] {
        DiscShape d;
        d.center = {{x, y}, t};
        d.r = r;
        Shape s;
        s.v = d;
        *out = new parcap_set{rasterize(s, grid->g)};
        return PARCAP_OK;
    });
}

parcap_status parcap_set_dust(const parcap_grid* grid, double x, double y, double t, double r0,
                              double dimension, int generations, uint64_t seed,
                              parcap_set** out) {
    if (!grid || !out) return fail(PARCAP_INVALID_ARGUMENT, "grid/out must not be NULL");
    return guarded([&] {
        DustShape d;
        d.center = {{x, y}, t};
        d.r0 = r0;
        d.dimension = dimension;
        d.generations = generations;
        d.seed = seed;
        Shape s;
        s.v = d;
        *out = new parcap_set{rasterize(s, grid->g)};
        return PARCAP_OK;
    });
}

parcap_status parcap_set_union(const parcap_set* a, const parcap_set* b, parcap_set** out) {
    if (!a || !b || !out) return fail(PARCAP_INVALID_ARGUMENT, "arguments must not be NULL");
    return guarded([&] {
        *out = new parcap_set{a->s.unite(b->s)};
        return PARCAP_OK;
    });
}

parcap_status parcap_set_size(const parcap_set* set, long* cells) {
    if (!set || !cells) return fail(PARCAP_INVALID_ARGUMENT, "arguments must not be NULL");
    *cells = static_cast<long>(set->s.size());
    return PARCAP_OK;
}

void parcap_set_free(parcap_set* set) { delete set; }

parcap_status parcap_solve_dirac(const parcap_grid* grid, double x, double y, double t,
                                 double mass, const parcap_solver_params* params,
                                 parcap_field** out) {
    if (!grid || !out) return fail(PARCAP_INVALID_ARGUMENT, "grid/out must not be NULL");
    return guarded([&] {
        auto mu = DiscreteMeasure::dirac(grid->g, {{x, y}, t}, mass);
        *out = new parcap_field{solve_forward(mu, grid->g, to_params(params))};
        return PARCAP_OK;
    });
}

parcap_status parcap_field_value(const parcap_field* field, long space_cell, int level,
                                 double* out) {
    if (!field || !out) return fail(PARCAP_INVALID_ARGUMENT, "arguments must not be NULL");
    const GridSpec& g = field->f.grid();
    if (space_cell < 0 || space_cell >= g.n_space_cells() || level < 0 || level > g.nt())
        return fail(PARCAP_INVALID_ARGUMENT, "field index out of range");
    *out = field->f.at(space_cell, level);
    return PARCAP_OK;
}

parcap_status parcap_field_max(const parcap_field* field, double* out) {
    if (!field || !out) return fail(PARCAP_INVALID_ARGUMENT, "arguments must not be NULL");
    *out = field->f.max_value();
    return PARCAP_OK;
}

void parcap_field_free(parcap_field* field) { delete field; }

parcap_status parcap_reduite(const parcap_set* set, double lambda,
                             const parcap_solver_params* params, parcap_obstacle_result** out) {
    if (!set || !out) return fail(PARCAP_INVALID_ARGUMENT, "set/out must not be NULL");
    return guarded([&] {
        *out = new parcap_obstacle_result{reduite(lambda, set->s, to_params(params))};
        return PARCAP_OK;
    });
}

parcap_status parcap_obstacle_mass(const parcap_obstacle_result* result, double* total_mass) {
    if (!result || !total_mass) return fail(PARCAP_INVALID_ARGUMENT, "arguments must not be NULL");
    *total_mass = result->sol.mu.total_mass();
    return PARCAP_OK;
}

parcap_status parcap_obstacle_sup(const parcap_obstacle_result* result, double* sup) {
    if (!result || !sup) return fail(PARCAP_INVALID_ARGUMENT, "arguments must not be NULL");
    *sup = result->sol.R.max_value();
    return PARCAP_OK;
}

parcap_status parcap_obstacle_contact_cells(const parcap_obstacle_result* result, long* cells) {
    if (!result || !cells) return fail(PARCAP_INVALID_ARGUMENT, "arguments must not be NULL");
    *cells = static_cast<long>(result->sol.contact.size());
    return PARCAP_OK;
}

void parcap_obstacle_free(parcap_obstacle_result* result) { delete result; }

parcap_status parcap_capacity(const parcap_set* set, parcap_capacity_method method, int refine,
                              const parcap_solver_params* params, double* value, double* trace) {
    if (!set || !value) return fail(PARCAP_INVALID_ARGUMENT, "set/value must not be NULL");
    return guarded([&] {
        CapacityOptions copt;
        copt.refine_levels = refine;
        CapacityMethod m = method == PARCAP_CAP_BALAYAGE    ? CapacityMethod::BalayageMass
                           : method == PARCAP_CAP_ENERGY    ? CapacityMethod::Energy
                                                            : CapacityMethod::Variational;
        const CapacityEstimate est = capacity(set->s, m, to_params(params), copt);
        *value = est.value;
        if (trace)
            for (size_t i = 0; i < est.trace.size(); ++i) trace[i] = est.trace[i];
        return PARCAP_OK;
    });
}

parcap_status parcap_hausdorff(const parcap_set* set, double s, int generations, double* upper,
                               double* frostman_mass, int* certificate_ok) {
    if (!set || !upper) return fail(PARCAP_INVALID_ARGUMENT, "set/upper must not be NULL");
    return guarded([&] {
        const GridSpec& g = set->s.grid();
        const DyadicHierarchy hier = DyadicHierarchy::covering(g);
        const int gen = std::min(generations + 2, leaf_generation(hier, g));
        if (set->s.empty()) {
            *upper = 0;
            if (frostman_mass) *frostman_mass = 0;
            if (certificate_ok) *certificate_ok = 1;
            return PARCAP_OK;
        }
        *upper = content_upper(set->s, s, 2 * hier.rect_diam(0), hier, gen).cost;
        if (frostman_mass || certificate_ok) {
            const FrostmanMeasure fm = frostman_measure(set->s, s, hier, gen);
            if (frostman_mass) *frostman_mass = fm.total_mass;
            if (certificate_ok) *certificate_ok = fm.certificate_ok ? 1 : 0;
        }
        return PARCAP_OK;
    });
}

parcap_status parcap_config_parse(const char* text, parcap_config** out) {
    if (!text || !out) return fail(PARCAP_INVALID_ARGUMENT, "text/out must not be NULL");
    return guarded([&]() -> parcap_status {
        ParseResult res = parse_config(text);
        if (!res.config) {
            std::ostringstream os;
            for (const auto& e : res.errors) os << e << "\n";
            return fail(PARCAP_PARSE_ERROR, os.str());
        }
        *out = new parcap_config{*res.config};
        return PARCAP_OK;
    });
}

parcap_status parcap_config_parse_file(const char* path, parcap_config** out) {
    if (!path || !out) return fail(PARCAP_INVALID_ARGUMENT, "path/out must not be NULL");
    std::ifstream is(path);
    if (!is) return fail(PARCAP_IO_ERROR, std::string("cannot open ") + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parcap_config_parse(buf.str().c_str(), out);
}

parcap_status parcap_config_emit(const parcap_config* config, char* buffer, size_t buffer_size,
                                 size_t* needed) {
    if (!config) return fail(PARCAP_INVALID_ARGUMENT, "config must not be NULL");
    const std::string text = emit_config(config->cfg);
    if (needed) *needed = text.size() + 1;
    if (!buffer) return PARCAP_OK;
    if (buffer_size < text.size() + 1)
        return fail(PARCAP_INVALID_ARGUMENT, "buffer too small");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    return PARCAP_OK;
}

void parcap_config_free(parcap_config* config) { delete config; }

void parcap_run_options_init(parcap_run_options* opts) {
    if (!opts) return;
    std::memset(opts, 0, sizeof(*opts));
    opts->method = "balayage";
    opts->s_value = -1;
    opts->generations = 3;
    opts->lambda = 1.0;
}

parcap_status parcap_run(const parcap_config* config, const char* subcommand,
                         const parcap_run_options* opts, int* exit_code) {
    if (!config || !subcommand)
        return fail(PARCAP_INVALID_ARGUMENT, "config/subcommand must not be NULL");
    return guarded([&] {
        RunOptions ro;
        if (opts) {
            if (opts->out_dir) ro.out_dir = opts->out_dir;
            if (opts->set_name) ro.set_name = opts->set_name;
            if (opts->method) ro.method = opts->method;
            if (opts->experiment) ro.experiment = opts->experiment;
            ro.refine = opts->refine;
            ro.s_value = opts->s_value;
            ro.generations = opts->generations;
            ro.lambda = opts->lambda;
            ro.threads = opts->threads;
            ro.seed = opts->seed;
            ro.force = opts->force != 0;
        }
        const RunOutcome outcome = run(config->cfg, subcommand, ro);
        if (exit_code) *exit_code = outcome.exit_code;
        if (outcome.exit_code == 2 && !outcome.messages.empty())
            g_last_error = outcome.messages.front();
        return PARCAP_OK;
    });
}

}  // extern "C"
