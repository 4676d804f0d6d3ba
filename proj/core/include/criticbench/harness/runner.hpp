#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "criticbench/harness/experiment.hpp"

namespace criticbench::harness {

// One evaluated cell of the (generator x metric) grid.
struct CellResult {
    std::string generator;
    std::string metric;
    std::string grid_label;  // sweep point / robustness size; "" otherwise
    bool higher_is_better = false;
    std::vector<std::uint64_t> seeds;
    std::vector<double> scores;  // aligned with seeds; NaN for failed seeds
    double mean = 0.0;           // over finite scores; NaN when none
    double stddev = 0.0;
    bool partial = false;  // >= 1 seed failed
    bool failed = false;   // the whole cell is unusable
    std::vector<std::string> failures;
    nlohmann::json cell_config;  // replaying this config reproduces `scores`
};

// Everything a run produced. The JSONL rendering is deterministic for a
// given config: the timestamp and wall clock live only in the metadata line.
struct RunRecord {
    ExperimentConfig config;
    std::string artifact_version;
    std::string rng_algorithm;
    double wall_clock_seconds = 0.0;
    std::vector<CellResult> cells;
    // rank tables, agreement reports, stat rows, calibration rows, ...
    std::vector<nlohmann::json> extra_lines;
    bool any_failure = false;
};

// Executes the experiment. Cell failures are recorded, not thrown; config
// and file errors (missing checkpoints, malformed inputs) propagate as
// config_error / io_error. `workers` bounds the per-seed worker pool.
RunRecord run_experiment(const ExperimentConfig& cfg, std::size_t workers = 1);

// JSONL: one metadata line (type "meta", carrying the timestamp and wall
// clock), then one line per cell in deterministic (grid, generator, metric)
// order, then the extra lines. Everything after line 1 is byte-identical
// across reruns of the same config.
std::string render_jsonl(const RunRecord& record, const std::string& timestamp);

// Tidy long-format CSV of the result cells: one row per (cell, seed).
std::string render_csv(const RunRecord& record);

// render_jsonl with the current UTC time, written to `path` (parent
// directories are created).
void write_jsonl(const RunRecord& record, const std::filesystem::path& path);

// 0 on full success, 1 when any cell failed or was partial.
int exit_code_for(const RunRecord& record);

} // namespace criticbench::harness
