#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parcap/field.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Run configuration: a TOML-like key-value document with [grid], [solver],
// [run], [measure], [set.NAME] and [experiments] blocks. Parsing collects
// every error instead of stopping at the first.
// ---------------------------------------------------------------------------

struct SetDef {
    std::string kind;  // cylinder | box | disc | union | dyadic-fractal
    std::vector<double> center;  // spatial coords then time
    double radius = 0;
    std::string variant = "full";       // cylinders
    std::vector<double> extent;         // box: spatial extents then temporal
    std::vector<std::string> members;   // union
    double dimension = 0.5;             // dust
    int generations = 2;                // dust
    double r0 = 0.25;                   // dust root side
    std::uint64_t seed = 0;             // dust selection
};

struct MeasureDef {
    std::string kind = "dirac";  // dirac | uniform
    std::vector<double> point;   // dirac location (spatial..., time)
    double mass = 1.0;
    std::string set;             // uniform support
};

struct RunConfig {
    // grid block
    int n = 1;
    Rational p = Rational(3, 1);
    double h = 1.0 / 64;
    double tau = 1.0 / 256;
    double T = 1.0;
    std::vector<double> extent = {1.0};

    SolverParams solver;

    // run block
    std::string out_dir = "parcap-out";
    int threads = 1;
    std::uint64_t seed = 1;
    std::string cache_dir;  // empty = no cache; PARCAP_CACHE env overrides
    bool force = false;

    std::map<std::string, SetDef> sets;
    MeasureDef measure;
    std::vector<std::string> experiments;  // empty = all

    GridSpec grid() const;
    /// Builds the shape for a named set (resolving unions). Throws on cycles
    /// or unknown names.
    Shape shape(const std::string& name) const;
    PointSet rasterized(const std::string& name) const;
};

struct ParseResult {
    std::optional<RunConfig> config;  // set only when errors is empty
    std::vector<std::string> errors;
};

/// Parses a config document, validating every field; all errors are reported.
ParseResult parse_config(const std::string& text);

/// Canonical emission; parse(emit_config(c)) reproduces c exactly.
std::string emit_config(const RunConfig& c);

}  // namespace parcap
