/* parcap — C API for the nonlinear parabolic potential theory toolkit.
 *
 * Opaque handles + status codes. Every function returns PARCAP_OK on success;
 * on failure, parcap_last_error() gives a thread-local message. Handles are
 * freed with their matching *_free function; NULL is always safe to free.
 */
#ifndef PARCAP_H
#define PARCAP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum parcap_status {
    PARCAP_OK = 0,
    PARCAP_INVALID_ARGUMENT = 1,
    PARCAP_SOLVER_DIVERGED = 2,
    PARCAP_IO_ERROR = 3,
    PARCAP_PARSE_ERROR = 4,
    PARCAP_INTERNAL_ERROR = 5
} parcap_status;

/* library version, e.g. "0.1.0" */
const char* parcap_version(void);

/* thread-local message for the most recent failure */
const char* parcap_last_error(void);

typedef struct parcap_grid parcap_grid;
typedef struct parcap_set parcap_set;
typedef struct parcap_field parcap_field;
typedef struct parcap_obstacle_result parcap_obstacle_result;
typedef struct parcap_config parcap_config;

typedef struct parcap_solver_params {
    double eps;                /* gradient regularization; < 0 means "use h" */
    double newton_tol;
    int max_iter;
    double damping;
    double m_cap;
    int max_active_set_iter;
    double contact_tol_factor;
} parcap_solver_params;

void parcap_solver_params_init(parcap_solver_params* params);

/* ---- grid ---------------------------------------------------------- */

/* n in {1,2}; extent_y ignored for n = 1; p = p_num/p_den with p > 2 */
parcap_status parcap_grid_create(int n, double extent_x, double extent_y, double h, double tau,
                                 double T, int p_num, int p_den, parcap_grid** out);
void parcap_grid_free(parcap_grid* grid);
parcap_status parcap_grid_counts(const parcap_grid* grid, long* space_cells, int* time_levels);

/* parabolic metric and the source-solution oracle (pure functions) */
parcap_status parcap_dp(double ax, double ay, double at, double bx, double by, double bt,
                        double p, int n, double* out);
parcap_status parcap_barenblatt(double x, double y, double t, double p, int n, double mass,
                                double* out);

/* ---- sets ---------------------------------------------------------- */

parcap_status parcap_set_cylinder(const parcap_grid* grid, double x, double y, double t, double r,
                                  int lower_half, parcap_set** out);
parcap_status parcap_set_box(const parcap_grid* grid, double x, double y, double t,
                             double ext_x, double ext_y, double ext_t, parcap_set** out);
parcap_status parcap_set_disc(const parcap_grid* grid, double x, double y, double t, double r,
                              parcap_set** out);
parcap_status parcap_set_dust(const parcap_grid* grid, double x, double y, double t, double r0,
                              double dimension, int generations, uint64_t seed, parcap_set** out);
parcap_status parcap_set_union(const parcap_set* a, const parcap_set* b, parcap_set** out);
parcap_status parcap_set_size(const parcap_set* set, long* cells);
void parcap_set_free(parcap_set* set);

/* ---- solvers ------------------------------------------------------- */

/* forward solve with a Dirac source of the given mass at (x, y, t) */
parcap_status parcap_solve_dirac(const parcap_grid* grid, double x, double y, double t,
                                 double mass, const parcap_solver_params* params,
                                 parcap_field** out);
parcap_status parcap_field_value(const parcap_field* field, long space_cell, int level,
                                 double* out);
parcap_status parcap_field_max(const parcap_field* field, double* out);
void parcap_field_free(parcap_field* field);

/* obstacle problem with obstacle lambda * 1_set (the reduite) */
parcap_status parcap_reduite(const parcap_set* set, double lambda,
                             const parcap_solver_params* params, parcap_obstacle_result** out);
parcap_status parcap_obstacle_mass(const parcap_obstacle_result* result, double* total_mass);
parcap_status parcap_obstacle_sup(const parcap_obstacle_result* result, double* sup);
parcap_status parcap_obstacle_contact_cells(const parcap_obstacle_result* result, long* cells);
void parcap_obstacle_free(parcap_obstacle_result* result);

/* ---- capacities and Hausdorff content ------------------------------ */

typedef enum parcap_capacity_method {
    PARCAP_CAP_BALAYAGE = 0,
    PARCAP_CAP_ENERGY = 1,
    PARCAP_CAP_VARIATIONAL = 2
} parcap_capacity_method;

/* trace may be NULL; otherwise it receives refine+1 per-level values */
parcap_status parcap_capacity(const parcap_set* set, parcap_capacity_method method, int refine,
                              const parcap_solver_params* params, double* value, double* trace);

parcap_status parcap_hausdorff(const parcap_set* set, double s, int generations, double* upper,
                               double* frostman_mass, int* certificate_ok);

/* ---- config + orchestration ---------------------------------------- */

/* On parse errors returns PARCAP_PARSE_ERROR and parcap_last_error() holds
 * every collected message, newline separated. */
parcap_status parcap_config_parse(const char* text, parcap_config** out);
parcap_status parcap_config_parse_file(const char* path, parcap_config** out);
parcap_status parcap_config_emit(const parcap_config* config, char* buffer, size_t buffer_size,
                                 size_t* needed);
void parcap_config_free(parcap_config* config);

typedef struct parcap_run_options {
    const char* out_dir;     /* NULL = config value */
    const char* set_name;    /* capacity / hausdorff / obstacle */
    const char* method;      /* balayage | energy | variational */
    const char* experiment;  /* experiment id or "all" */
    int refine;
    double s_value;          /* <= 0: default n */
    int generations;
    double lambda;
    int threads;             /* 0 = config value */
    uint64_t seed;           /* 0 = config value */
    int force;
} parcap_run_options;

void parcap_run_options_init(parcap_run_options* opts);

/* subcommand: solve | obstacle | capacity | hausdorff | experiment.
 * exit_code receives the CLI-style status (0 ok, 1 criteria failed,
 * 2 solver failure with partial artifacts + .failed marker). */
parcap_status parcap_run(const parcap_config* config, const char* subcommand,
                         const parcap_run_options* opts, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif /* PARCAP_H */
