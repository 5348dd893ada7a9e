#pragma once

#include <filesystem>
#include <string>

#include "parcap/experiments.hpp"

namespace parcap {

// ---------------------------------------------------------------------------
// Artifact emission: flat-binary fields with JSON headers, sparse-CSV
// measures, experiment tables as CSV, reports as stable-key JSON and SVG
// plots rendered from the emitted CSV. All writes are temp-then-rename and
// refuse to overwrite without `force`.
// ---------------------------------------------------------------------------

/// Atomic write; throws IoError if the target exists and force is false.
void atomic_write(const std::filesystem::path& path, const std::string& content, bool force);

/// Field as <base>.bin (doubles, row-major space then time, level-major) plus
/// <base>.json describing the grid and layout.
void write_field(const std::filesystem::path& base, const Field& u, bool force);
Field read_field(const std::filesystem::path& base);

/// Sparse measure as CSV "cell,weight".
void write_measure_csv(const std::filesystem::path& path, const DiscreteMeasure& mu, bool force);
DiscreteMeasure read_measure_csv(const std::filesystem::path& path, const GridSpec& grid);

/// Cell list as CSV "cell".
void write_pointset_csv(const std::filesystem::path& path, const PointSet& s, bool force);

std::string table_to_csv(const ExperimentTable& t);
void write_table_csv(const std::filesystem::path& path, const ExperimentTable& t, bool force);

/// Report as JSON with stable key order. Volatile fields (runtime) are
/// excluded so identical configs emit byte-identical reports; they go into a
/// separate run_meta file.
std::string report_to_json(const ExperimentReport& rep);
std::string run_meta_json(const ExperimentReport& rep, int threads);

/// Log-log scatter+line plot of two CSV columns; input is the emitted CSV
/// text (single source of truth for plots).
std::string svg_loglog_plot(const std::string& csv, const std::string& xcol,
                            const std::string& ycol, const std::string& title);

/// Capacity estimate as JSON.
std::string capacity_to_json(const CapacityEstimate& est);

}  // namespace parcap
