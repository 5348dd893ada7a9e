#include "parcap/runner.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "parcap/threadpool.hpp"

namespace parcap {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Ctx {
    const RunConfig& cfg;
    const RunOptions& opts;
    fs::path out;
    SolveCache cache;
    RunOutcome outcome;

    Ctx(const RunConfig& c, const RunOptions& o)
        : cfg(c), opts(o), out(o.out_dir.empty() ? c.out_dir : o.out_dir), cache(c.cache_dir) {}

    bool force() const { return opts.force || cfg.force; }
    int threads() const { return opts.threads > 0 ? opts.threads : cfg.threads; }
    std::uint64_t seed() const { return opts.seed > 0 ? opts.seed : cfg.seed; }

    void emit(const fs::path& p, const std::string& content) {
        atomic_write(p, content, force());
        outcome.artifacts.push_back(p.string());
    }
};

DiscreteMeasure build_measure(const RunConfig& cfg) {
    const GridSpec g = cfg.grid();
    if (cfg.measure.kind == "uniform") {
        if (cfg.measure.set.empty())
            throw InvalidArgument("[measure] uniform measure needs a set");
        return DiscreteMeasure::uniform(cfg.rasterized(cfg.measure.set), cfg.measure.mass);
    }
    SpaceTimePoint z{{0.5 * g.extent[0], g.n == 2 ? 0.5 * g.extent[1] : 0.0}, g.tau};
    if (!cfg.measure.point.empty()) {
        if (static_cast<int>(cfg.measure.point.size()) != g.n + 1)
            throw InvalidArgument("[measure] point needs n+1 coordinates");
        z.x[0] = cfg.measure.point[0];
        if (g.n == 2) z.x[1] = cfg.measure.point[1];
        z.t = cfg.measure.point.back();
    }
    return DiscreteMeasure::dirac(g, z, cfg.measure.mass);
}

void run_solve(Ctx& ctx) {
    const GridSpec g = ctx.cfg.grid();
    const DiscreteMeasure mu = build_measure(ctx.cfg);
    Field u = solve_forward(mu, g, ctx.cfg.solver);
    write_field(ctx.out / "solution", u, ctx.force());
    ctx.outcome.artifacts.push_back((ctx.out / "solution.bin").string());
    ctx.outcome.artifacts.push_back((ctx.out / "solution.json").string());
    write_measure_csv(ctx.out / "measure.csv", mu, ctx.force());
    ctx.outcome.artifacts.push_back((ctx.out / "measure.csv").string());
}

void run_obstacle(Ctx& ctx) {
    if (ctx.opts.set_name.empty()) throw InvalidArgument("obstacle: --set is required");
    PointSet U = ctx.cfg.rasterized(ctx.opts.set_name);
    auto sol = reduite(ctx.opts.lambda, U, ctx.cfg.solver);
    write_field(ctx.out / "reduite", sol.R, ctx.force());
    write_measure_csv(ctx.out / "riesz_measure.csv", sol.mu, ctx.force());
    write_pointset_csv(ctx.out / "contact.csv", sol.contact, ctx.force());
    ordered_json j;
    j["set"] = ctx.opts.set_name;
    j["lambda"] = ctx.opts.lambda;
    j["total_mass"] = sol.mu.total_mass();
    j["sup"] = sol.R.max_value();
    j["contact_cells"] = sol.contact.size();
    j["negative_residual_mass"] = sol.negative_residual_mass;
    ctx.emit(ctx.out / "obstacle.json", j.dump(2) + "\n");
    for (const char* f : {"reduite.bin", "reduite.json", "riesz_measure.csv", "contact.csv"})
        ctx.outcome.artifacts.push_back((ctx.out / f).string());
}

CapacityMethod method_of(const std::string& name) {
    if (name == "balayage") return CapacityMethod::BalayageMass;
    if (name == "energy") return CapacityMethod::Energy;
    if (name == "variational") return CapacityMethod::Variational;
    throw InvalidArgument("unknown capacity method '" + name + "' (balayage|energy|variational)");
}

std::uint64_t capacity_key(const Ctx& ctx, const PointSet& K, const std::string& method,
                           int refine) {
    std::ostringstream os;
    os << "cap{" << K.grid().cache_token() << ";" << ctx.cfg.solver.cache_token(K.grid()) << ";m="
       << method << ";r=" << refine << ";cells=";
    for (long c : K.cells()) os << c << ",";
    os << "}";
    return fnv1a64(os.str());
}

void run_capacity(Ctx& ctx) {
    if (ctx.opts.set_name.empty()) throw InvalidArgument("capacity: --set is required");
    PointSet K = ctx.cfg.rasterized(ctx.opts.set_name);
    const std::uint64_t key = capacity_key(ctx, K, ctx.opts.method, ctx.opts.refine);

    std::string payload;
    if (auto cached = ctx.cache.get(key)) {
        payload = *cached;
        ctx.outcome.messages.push_back("capacity: cache hit " + hash_hex(key));
    } else {
        CapacityOptions copt;
        copt.refine_levels = ctx.opts.refine;
        copt.t_check = true;
        copt.seed = ctx.seed();
        const CapacityEstimate est = capacity(K, method_of(ctx.opts.method), ctx.cfg.solver, copt);
        payload = capacity_to_json(est);
        ctx.cache.put(key, payload);
    }
    ctx.emit(ctx.out / "estimate.json", payload);

    // trace CSV regenerated from the payload (single source of truth)
    const auto j = ordered_json::parse(payload);
    ExperimentTable t{"trace", {"level", "value"}, {}};
    int lvl = 0;
    for (const auto& v : j.at("trace")) t.rows.push_back({static_cast<double>(lvl++), v.get<double>()});
    write_table_csv(ctx.out / "trace.csv", t, ctx.force());
    ctx.outcome.artifacts.push_back((ctx.out / "trace.csv").string());
    ctx.outcome.cache_hits = ctx.cache.hits();
}

void run_hausdorff(Ctx& ctx) {
    if (ctx.opts.set_name.empty()) throw InvalidArgument("hausdorff: --set is required");
    const GridSpec g = ctx.cfg.grid();
    PointSet E = ctx.cfg.rasterized(ctx.opts.set_name);
    const DyadicHierarchy hier = DyadicHierarchy::covering(g);
    const double s = ctx.opts.s_value > 0 ? ctx.opts.s_value : static_cast<double>(g.n);
    const int gen = std::min(ctx.opts.generations + 2, leaf_generation(hier, g));

    ordered_json j;
    j["set"] = ctx.opts.set_name;
    j["s"] = s;
    j["generations"] = ctx.opts.generations;
    if (E.empty()) {
        j["upper"] = 0.0;
        j["frostman_mass"] = 0.0;
        j["certificate_ok"] = true;
    } else {
        const double delta = 2 * hier.rect_diam(0);
        const Cover cov = content_upper(E, s, delta, hier, gen);
        j["upper"] = cov.cost;
        j["cover_size"] = cov.rects.size();
        try {
            const ExactContent ex = content_exact_small(E, s, delta, hier,
                                                        std::min(gen, ctx.opts.generations));
            j["exact"] = ex.cover.cost;
            j["lp_bound"] = ex.lp_bound;
        } catch (const Error& e) {
            j["exact_skipped"] = e.what();
        }
        const FrostmanMeasure fm = frostman_measure(E, s, hier, gen);
        j["frostman_mass"] = fm.total_mass;
        j["certificate_ok"] = fm.certificate_ok;
    }
    ctx.emit(ctx.out / "hausdorff.json", j.dump(2) + "\n");
}

void emit_experiment(Ctx& ctx, const ExperimentReport& rep) {
    const fs::path dir = ctx.out / rep.id;
    atomic_write(dir / "report.json", report_to_json(rep), ctx.force());
    atomic_write(dir / "run_meta.json", run_meta_json(rep, ctx.threads()), ctx.force());
    ctx.outcome.artifacts.push_back((dir / "report.json").string());
    for (const auto& t : rep.tables) {
        const std::string csv = table_to_csv(t);
        atomic_write(dir / "tables" / (t.name + ".csv"), csv, ctx.force());
        ctx.outcome.artifacts.push_back((dir / "tables" / (t.name + ".csv")).string());
        // scaling-style plots: abscissa/ordinate from the leading data columns
        if (t.columns.size() >= 2) {
            const size_t xi = t.columns.size() >= 3 ? 1 : 0;
            const std::string svg = svg_loglog_plot(csv, t.columns[xi], t.columns[xi + 1],
                                                    rep.id + ": " + t.name);
            atomic_write(dir / "plots" / (t.name + ".svg"), svg, ctx.force());
            ctx.outcome.artifacts.push_back((dir / "plots" / (t.name + ".svg")).string());
        }
    }
}

void run_experiments(Ctx& ctx) {
    std::vector<std::string> ids;
    if (ctx.opts.experiment.empty() || ctx.opts.experiment == "all") {
        ids = ctx.cfg.experiments.empty() ? experiment_ids() : ctx.cfg.experiments;
    } else {
        ids.push_back(ctx.opts.experiment);
    }
    ExperimentEnv env;
    env.solver = ctx.cfg.solver;
    env.seed = ctx.seed();
    env.threads = ctx.threads();

    std::vector<ExperimentReport> reports(ids.size());
    std::vector<std::string> failures(ids.size());
    {
        ThreadPool pool(ctx.threads());
        for (size_t i = 0; i < ids.size(); ++i) {
            pool.submit([&, i] {
                try {
                    reports[i] = run_experiment(ids[i], env);
                } catch (const std::exception& e) {
                    failures[i] = e.what();
                }
            });
        }
        pool.wait();
    }
    ordered_json summary;
    summary["experiments"] = ordered_json::array();
    bool any_fail = false;
    for (size_t i = 0; i < ids.size(); ++i) {
        ordered_json row;
        row["id"] = ids[i];
        if (!failures[i].empty()) {
            row["error"] = failures[i];
            any_fail = true;
            atomic_write(ctx.out / ids[i] / "report.json.failed", failures[i] + "\n", true);
        } else {
            emit_experiment(ctx, reports[i]);
            row["passed"] = reports[i].passed();
            if (!reports[i].passed()) any_fail = true;
        }
        summary["experiments"].push_back(row);
    }
    ctx.emit(ctx.out / "summary.json", summary.dump(2) + "\n");
    if (any_fail) ctx.outcome.exit_code = 1;
}

}  // namespace

RunOutcome run(const RunConfig& config, const std::string& subcommand, const RunOptions& opts) {
    Ctx ctx(config, opts);
    try {
        if (subcommand == "solve")
            run_solve(ctx);
        else if (subcommand == "obstacle")
            run_obstacle(ctx);
        else if (subcommand == "capacity")
            run_capacity(ctx);
        else if (subcommand == "hausdorff")
            run_hausdorff(ctx);
        else if (subcommand == "experiment")
            run_experiments(ctx);
        else
            throw InvalidArgument("unknown subcommand '" + subcommand +
                                  "' (solve|obstacle|capacity|hausdorff|experiment)");
    } catch (const SolverDiverged& e) {
        atomic_write(ctx.out / (subcommand + ".failed"),
                     std::string("solver failure: ") + e.what() + "\n", true);
        ctx.outcome.exit_code = 2;
        ctx.outcome.messages.push_back(e.what());
    }
    return ctx.outcome;
}

}  // namespace parcap
