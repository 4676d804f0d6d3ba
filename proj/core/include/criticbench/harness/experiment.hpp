#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "criticbench/data/distributions.hpp"
#include "criticbench/metrics/c2st.hpp"
#include "criticbench/metrics/critic_training.hpp"
#include "criticbench/models/train_gan.hpp"

namespace criticbench::harness {

// Every CLI subcommand is driven by one of these kinds, so any run can be
// reproduced from its config file alone.
enum class ExperimentKind {
    kEval,
    kRank,
    kSweepCapacity,
    kSweepNoiseDim,
    kSweepUpdateRatio,
    kSweepTrainSize,
    kRobustnessValidationSize,
    kTrainGan,
    kStats,
    kCalibrate,
    kGenData,
};

const char* experiment_kind_name(ExperimentKind k);
ExperimentKind experiment_kind_from_name(const std::string& s);
bool is_sweep(ExperimentKind k);

// One sample source under evaluation: either an analytic corruption of the
// experiment distribution or a trained generator loaded from a checkpoint.
struct GeneratorRef {
    std::string name;
    bool is_checkpoint = false;
    std::filesystem::path checkpoint;  // when is_checkpoint
    data::CorruptionSpec corruption;   // otherwise
};

// Metrics the harness can place in a results grid: the four divergence
// estimators plus the reference metrics evaluated per (generator, seed) cell.
enum class HarnessMetric { kGC, kLS, kIW, kMMD, kFID, kIS, kC2ST };

const char* harness_metric_name(HarnessMetric m);
HarnessMetric harness_metric_from_name(const std::string& s);
// Reading direction: IS is higher-is-better, everything else lower.
bool metric_higher_is_better(HarnessMetric m);

struct MetricEntry {
    HarnessMetric metric = HarnessMetric::kGC;
    // gc / ls / iw / mmd: the full training recipe (kind mirrors `metric`;
    // seeds come from the experiment). An empty MMD bandwidth list means
    // "median heuristic at evaluation time".
    metrics::MetricSpec spec;
    // c2st classifier settings.
    metrics::C2stOptions c2st;
};

// Dataset sizes and the base seed of the data streams.
struct DataSpec {
    std::size_t train = 10000;
    std::size_t validation = 2000;
    std::size_t test = 2000;
    std::uint64_t seed = 17;
};

// One sweep grid point; which fields apply depends on the sweep kind.
struct GridPoint {
    std::string label;
    double disc_factor = 1.0;   // sweep-capacity
    double gen_factor = 1.0;    // sweep-capacity
    std::size_t noise_dim = 2;  // sweep-noise-dim
    std::size_t d_steps = 1;    // sweep-update-ratio
    std::size_t g_steps = 1;    // sweep-update-ratio
    std::size_t train_size = 0; // sweep-train-size
};

// Toy-GAN recipe shared by train-gan and the sweeps.
struct GanConfig {
    models::TrainConfig train;
    models::CriticArch critic_arch;
    models::GeneratorArch gen_arch;
};

struct RobustnessSpec {
    std::size_t n_small = 50;
    std::size_t n_large = 2000;
};

struct CalibrateSpec {
    std::vector<double> targets = {0.55, 0.7, 0.9};
    data::CorruptionKind corruption = data::CorruptionKind::kIntensityShift;
    double max_level = 4.0;
    std::size_t n = 1000;              // generated samples per accuracy probe
    std::size_t bisection_steps = 20;
    double tolerance = 0.01;           // early stop on |accuracy - target|
};

struct StatsSpec {
    std::string test;                  // "wilcoxon" | "fisher"
    std::filesystem::path input;       // results JSONL (wilcoxon)
    // fisher: (agreements, total) per condition; all pairs are tested
    std::vector<std::array<long long, 2>> counts;
};

// Schema-validated experiment description. Unknown keys anywhere in the JSON
// are rejected with the offending path.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::kEval;
    data::DistributionSpec distribution =
        data::DistributionSpec::gaussian_ring(8, 2.0, 0.2);
    DataSpec data;
    std::vector<GeneratorRef> generators;
    std::vector<MetricEntry> metrics;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::size_t n_fake = 1000;
    std::filesystem::path out;             // results JSONL ("" = stdout only)
    std::filesystem::path checkpoint_out;  // train-gan: where the .cbm goes
    std::filesystem::path out_prefix;      // gen-data: .cbs path prefix
    GanConfig gan;
    std::vector<GridPoint> grid;
    RobustnessSpec robustness;
    CalibrateSpec calibrate;
    StatsSpec stats;

    // Structural validation beyond parsing (counts, kind-specific blocks).
    void validate() const;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

// Shared JSON codecs (checkpoint headers carry the model halves; the
// experiment parser adds the rest).
nlohmann::json metric_entry_to_json(const MetricEntry& e);
MetricEntry metric_entry_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json generator_ref_to_json(const GeneratorRef& g);
GeneratorRef generator_ref_from_json(const nlohmann::json& j, const std::string& path);

} // namespace criticbench::harness
