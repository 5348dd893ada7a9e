#pragma once

#include "parcap/cache.hpp"
#include "parcap/config.hpp"
#include "parcap/io.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Subcommand orchestration: validates inputs, runs the requested computation
// (through the solve cache where applicable) and emits artifacts atomically.
// ---------------------------------------------------------------------------

struct RunOptions {
    std::string out_dir;      // overrides config [run] out
    std::string set_name;     // capacity / hausdorff / obstacle
    std::string method = "balayage";  // balayage | energy | variational
    int refine = 0;
    double s_value = -1;      // hausdorff s (default n)
    int generations = 3;      // hausdorff leaf generation cap
    double lambda = 1.0;      // obstacle height
    std::string experiment;   // experiment id or "all"
    int threads = 0;          // overrides config when > 0
    std::uint64_t seed = 0;   // overrides config when > 0
    bool force = false;
};

struct RunOutcome {
    int exit_code = 0;
    std::vector<std::string> artifacts;  // paths written
    std::vector<std::string> messages;
    long cache_hits = 0;
};

/// Subcommands: solve | obstacle | capacity | hausdorff | experiment.
/// Solver failures return nonzero and keep partial artifacts next to a
/// .failed marker.
RunOutcome run(const RunConfig& config, const std::string& subcommand, const RunOptions& opts);

}  // namespace parcap
