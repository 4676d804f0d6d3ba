#include "criticbench/harness/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "criticbench/errors.hpp"
#include "criticbench/models/checkpoint.hpp"

namespace criticbench::harness {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw config_error("config: " + path + ": " + message);
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

// The schema is closed: any key outside `allowed` is an error.
void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
    require_object(j, path);
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (allowed.find(key) == allowed.end()) {
            fail(path, "unknown key '" + key + "'");
        }
    }
}

double get_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

std::size_t get_size(const json& j, const std::string& path) {
    if (!j.is_number_integer() || (j.is_number_integer() && j.get<long long>() < 0)) {
        fail(path, "expected a nonnegative integer");
    }
    return j.get<std::size_t>();
}

std::uint64_t get_u64(const json& j, const std::string& path) {
    if (!(j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0))) {
        fail(path, "expected a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::vector<std::size_t> get_size_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(get_size(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::vector<double> get_double_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(get_double(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

json critic_arch_to_json(const models::CriticArch& a) {
    return json{{"widths", a.widths},
                {"activation", ad::activation_name(a.activation)},
                {"head", ad::output_head_name(a.head)}};
}

models::CriticArch critic_arch_from_json(const json& j, const std::string& path) {
    require_keys(j, path, {"widths", "activation", "head"});
    models::CriticArch a;
    if (j.contains("widths")) a.widths = get_size_list(j["widths"], path + ".widths");
    if (j.contains("activation")) {
        a.activation = ad::activation_from_name(get_string(j["activation"], path + ".activation"));
    }
    if (j.contains("head")) {
        a.head = ad::output_head_from_name(get_string(j["head"], path + ".head"));
    }
    return a;
}

json generator_arch_to_json(const models::GeneratorArch& a) {
    return json{{"noise_dim", a.noise_dim},
                {"widths", a.widths},
                {"activation", ad::activation_name(a.activation)}};
}

models::GeneratorArch generator_arch_from_json(const json& j, const std::string& path) {
    require_keys(j, path, {"noise_dim", "widths", "activation"});
    models::GeneratorArch a;
    if (j.contains("noise_dim")) a.noise_dim = get_size(j["noise_dim"], path + ".noise_dim");
    if (j.contains("widths")) a.widths = get_size_list(j["widths"], path + ".widths");
    if (j.contains("activation")) {
        a.activation = ad::activation_from_name(get_string(j["activation"], path + ".activation"));
    }
    return a;
}

json data_spec_to_json(const DataSpec& d) {
    return json{{"train", d.train},
                {"validation", d.validation},
                {"test", d.test},
                {"seed", d.seed}};
}

DataSpec data_spec_from_json(const json& j, const std::string& path) {
    require_keys(j, path, {"train", "validation", "test", "seed"});
    DataSpec d;
    if (j.contains("train")) d.train = get_size(j["train"], path + ".train");
    if (j.contains("validation")) {
        d.validation = get_size(j["validation"], path + ".validation");
    }
    if (j.contains("test")) d.test = get_size(j["test"], path + ".test");
    if (j.contains("seed")) d.seed = get_u64(j["seed"], path + ".seed");
    return d;
}

json gan_to_json(const GanConfig& g) {
    return json{{"criterion", models::criterion_name(g.train.criterion)},
                {"lr_d", g.train.lr_d},
                {"lr_g", g.train.lr_g},
                {"d_steps", g.train.d_steps},
                {"g_steps", g.train.g_steps},
                {"batch", g.train.batch},
                {"cycles", g.train.cycles},
                {"seed", g.train.seed},
                {"penalty_weight", g.train.penalty_weight},
                {"ls_a", g.train.ls_a},
                {"ls_b", g.train.ls_b},
                {"momentum", g.train.momentum},
                {"critic", critic_arch_to_json(g.critic_arch)},
                {"generator", generator_arch_to_json(g.gen_arch)}};
}

GanConfig gan_from_json(const json& j, const std::string& path) {
    require_keys(j, path,
                 {"criterion", "lr_d", "lr_g", "d_steps", "g_steps", "batch", "cycles",
                  "seed", "penalty_weight", "ls_a", "ls_b", "momentum", "critic",
                  "generator"});
    GanConfig g;
    if (j.contains("criterion")) {
        g.train.criterion = models::criterion_from_name(get_string(j["criterion"], path + ".criterion"));
    }
    if (j.contains("lr_d")) g.train.lr_d = get_double(j["lr_d"], path + ".lr_d");
    if (j.contains("lr_g")) g.train.lr_g = get_double(j["lr_g"], path + ".lr_g");
    if (j.contains("d_steps")) g.train.d_steps = get_size(j["d_steps"], path + ".d_steps");
    if (j.contains("g_steps")) g.train.g_steps = get_size(j["g_steps"], path + ".g_steps");
    if (j.contains("batch")) g.train.batch = get_size(j["batch"], path + ".batch");
    if (j.contains("cycles")) g.train.cycles = get_size(j["cycles"], path + ".cycles");
    if (j.contains("seed")) g.train.seed = get_u64(j["seed"], path + ".seed");
    if (j.contains("penalty_weight")) {
        g.train.penalty_weight = get_double(j["penalty_weight"], path + ".penalty_weight");
    }
    if (j.contains("ls_a")) g.train.ls_a = get_double(j["ls_a"], path + ".ls_a");
    if (j.contains("ls_b")) g.train.ls_b = get_double(j["ls_b"], path + ".ls_b");
    if (j.contains("momentum")) g.train.momentum = get_double(j["momentum"], path + ".momentum");
    if (j.contains("critic")) {
        g.critic_arch = critic_arch_from_json(j["critic"], path + ".critic");
        if (!j["critic"].contains("head")) {
            // default to the head the training criterion needs
            g.critic_arch.head = g.train.criterion == models::Criterion::kGC
                                     ? ad::OutputHead::kSigmoid
                                     : ad::OutputHead::kLinear;
        }
    }
    if (j.contains("generator")) {
        g.gen_arch = generator_arch_from_json(j["generator"], path + ".generator");
    }
    return g;
}

json grid_point_to_json(const GridPoint& p, ExperimentKind kind) {
    json j{{"label", p.label}};
    switch (kind) {
    case ExperimentKind::kSweepCapacity:
        j["disc_factor"] = p.disc_factor;
        j["gen_factor"] = p.gen_factor;
        break;
    case ExperimentKind::kSweepNoiseDim:
        j["noise_dim"] = p.noise_dim;
        break;
    case ExperimentKind::kSweepUpdateRatio:
        j["d_steps"] = p.d_steps;
        j["g_steps"] = p.g_steps;
        break;
    case ExperimentKind::kSweepTrainSize:
        j["train_size"] = p.train_size;
        break;
    default:
        break;
    }
    return j;
}

GridPoint grid_point_from_json(const json& j, const std::string& path,
                               ExperimentKind kind) {
    GridPoint p;
    switch (kind) {
    case ExperimentKind::kSweepCapacity:
        require_keys(j, path, {"label", "disc_factor", "gen_factor"});
        if (j.contains("disc_factor")) {
            p.disc_factor = get_double(j["disc_factor"], path + ".disc_factor");
        }
        if (j.contains("gen_factor")) {
            p.gen_factor = get_double(j["gen_factor"], path + ".gen_factor");
        }
        break;
    case ExperimentKind::kSweepNoiseDim:
        require_keys(j, path, {"label", "noise_dim"});
        if (!j.contains("noise_dim")) fail(path, "missing 'noise_dim'");
        p.noise_dim = get_size(j["noise_dim"], path + ".noise_dim");
        break;
    case ExperimentKind::kSweepUpdateRatio:
        require_keys(j, path, {"label", "d_steps", "g_steps"});
        if (j.contains("d_steps")) p.d_steps = get_size(j["d_steps"], path + ".d_steps");
        if (j.contains("g_steps")) p.g_steps = get_size(j["g_steps"], path + ".g_steps");
        break;
    case ExperimentKind::kSweepTrainSize:
        require_keys(j, path, {"label", "train_size"});
        if (!j.contains("train_size")) fail(path, "missing 'train_size'");
        p.train_size = get_size(j["train_size"], path + ".train_size");
        break;
    default:
        fail(path, "grid points are only valid for sweep experiments");
    }
    if (j.contains("label")) p.label = get_string(j["label"], path + ".label");
    return p;
}

std::string short_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string default_grid_label(const GridPoint& p, ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::kSweepCapacity:
        return "capacity-d" + short_double(p.disc_factor) + "-g" +
               short_double(p.gen_factor);
    case ExperimentKind::kSweepNoiseDim:
        return "noise-dim-" + std::to_string(p.noise_dim);
    case ExperimentKind::kSweepUpdateRatio:
        return "ratio-" + std::to_string(p.d_steps) + ":" + std::to_string(p.g_steps);
    case ExperimentKind::kSweepTrainSize:
        return "train-size-" + std::to_string(p.train_size);
    default:
        return "point";
    }
}

} // namespace

const char* experiment_kind_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::kEval: return "eval";
    case ExperimentKind::kRank: return "rank";
    case ExperimentKind::kSweepCapacity: return "sweep-capacity";
    case ExperimentKind::kSweepNoiseDim: return "sweep-noise-dim";
    case ExperimentKind::kSweepUpdateRatio: return "sweep-update-ratio";
    case ExperimentKind::kSweepTrainSize: return "sweep-train-size";
    case ExperimentKind::kRobustnessValidationSize: return "robustness-validation-size";
    case ExperimentKind::kTrainGan: return "train-gan";
    case ExperimentKind::kStats: return "stats";
    case ExperimentKind::kCalibrate: return "calibrate";
    case ExperimentKind::kGenData: return "gen-data";
    }
    return "eval";
}

ExperimentKind experiment_kind_from_name(const std::string& s) {
    for (ExperimentKind k :
         {ExperimentKind::kEval, ExperimentKind::kRank, ExperimentKind::kSweepCapacity,
          ExperimentKind::kSweepNoiseDim, ExperimentKind::kSweepUpdateRatio,
          ExperimentKind::kSweepTrainSize, ExperimentKind::kRobustnessValidationSize,
          ExperimentKind::kTrainGan, ExperimentKind::kStats, ExperimentKind::kCalibrate,
          ExperimentKind::kGenData}) {
        if (s == experiment_kind_name(k)) return k;
    }
    throw config_error("unknown experiment kind '" + s + "'");
}

bool is_sweep(ExperimentKind k) {
    return k == ExperimentKind::kSweepCapacity || k == ExperimentKind::kSweepNoiseDim ||
           k == ExperimentKind::kSweepUpdateRatio || k == ExperimentKind::kSweepTrainSize;
}

const char* harness_metric_name(HarnessMetric m) {
    switch (m) {
    case HarnessMetric::kGC: return "gc";
    case HarnessMetric::kLS: return "ls";
    case HarnessMetric::kIW: return "iw";
    case HarnessMetric::kMMD: return "mmd";
    case HarnessMetric::kFID: return "fid";
    case HarnessMetric::kIS: return "is";
    case HarnessMetric::kC2ST: return "c2st";
    }
    return "gc";
}

HarnessMetric harness_metric_from_name(const std::string& s) {
    for (HarnessMetric m :
         {HarnessMetric::kGC, HarnessMetric::kLS, HarnessMetric::kIW, HarnessMetric::kMMD,
          HarnessMetric::kFID, HarnessMetric::kIS, HarnessMetric::kC2ST}) {
        if (s == harness_metric_name(m)) return m;
    }
    throw config_error("unknown metric kind '" + s +
                       "' (expected gc | ls | iw | mmd | fid | is | c2st)");
}

bool metric_higher_is_better(HarnessMetric m) {
    return m == HarnessMetric::kIS;
}

nlohmann::json generator_ref_to_json(const GeneratorRef& g) {
    json j{{"name", g.name}};
    if (g.is_checkpoint) {
        j["checkpoint"] = g.checkpoint.string();
    } else {
        j["corruption"] = models::corruption_to_json(g.corruption);
    }
    return j;
}

GeneratorRef generator_ref_from_json(const nlohmann::json& j, const std::string& path) {
    require_keys(j, path, {"name", "checkpoint", "corruption"});
    GeneratorRef g;
    if (!j.contains("name")) fail(path, "missing 'name'");
    g.name = get_string(j["name"], path + ".name");
    if (g.name.empty()) fail(path + ".name", "must be nonempty");
    const bool has_ckpt = j.contains("checkpoint");
    const bool has_corr = j.contains("corruption");
    if (has_ckpt == has_corr) {
        fail(path, "exactly one of 'checkpoint' or 'corruption' is required");
    }
    if (has_ckpt) {
        g.is_checkpoint = true;
        g.checkpoint = get_string(j["checkpoint"], path + ".checkpoint");
    } else {
        g.corruption = models::corruption_from_json(j["corruption"], path + ".corruption");
    }
    return g;
}

nlohmann::json metric_entry_to_json(const MetricEntry& e) {
    json j{{"kind", harness_metric_name(e.metric)}};
    switch (e.metric) {
    case HarnessMetric::kGC:
    case HarnessMetric::kLS:
    case HarnessMetric::kIW:
        j["iterations"] = e.spec.iterations;
        j["learning_rate"] = e.spec.learning_rate;
        j["batch"] = e.spec.batch;
        if (!e.spec.critic.widths.empty()) {
            j["critic"] = critic_arch_to_json(e.spec.critic);
        }
        if (e.metric == HarnessMetric::kIW) j["penalty_weight"] = e.spec.penalty_weight;
        if (e.metric == HarnessMetric::kLS) {
            j["ls_a"] = e.spec.ls_a;
            j["ls_b"] = e.spec.ls_b;
        }
        break;
    case HarnessMetric::kMMD:
        if (!e.spec.sigmas.empty()) j["sigmas"] = e.spec.sigmas;
        j["unbiased"] = e.spec.mmd_unbiased;
        break;
    case HarnessMetric::kFID:
    case HarnessMetric::kIS:
        break;
    case HarnessMetric::kC2ST:
        j["classifier"] = metrics::classifier_kind_name(e.c2st.kind);
        if (e.c2st.kind == metrics::ClassifierKind::kKnn) {
            j["knn_k"] = e.c2st.knn_k;
            j["knn_exclude_exact"] = e.c2st.knn_exclude_exact;
        } else {
            j["mlp_hidden"] = e.c2st.mlp_hidden;
            j["mlp_iterations"] = e.c2st.mlp_iterations;
            j["mlp_learning_rate"] = e.c2st.mlp_learning_rate;
            j["mlp_batch"] = e.c2st.mlp_batch;
        }
        break;
    }
    return j;
}

MetricEntry metric_entry_from_json(const nlohmann::json& j, const std::string& path) {
    require_object(j, path);
    if (!j.contains("kind")) fail(path, "missing 'kind'");
    MetricEntry e;
    e.metric = harness_metric_from_name(get_string(j["kind"], path + ".kind"));
    switch (e.metric) {
    case HarnessMetric::kGC:
    case HarnessMetric::kLS:
    case HarnessMetric::kIW: {
        std::set<std::string> allowed = {"kind", "critic", "iterations", "learning_rate",
                                         "batch"};
        if (e.metric == HarnessMetric::kIW) allowed.insert("penalty_weight");
        if (e.metric == HarnessMetric::kLS) {
            allowed.insert("ls_a");
            allowed.insert("ls_b");
        }
        require_keys(j, path, allowed);
        e.spec.kind = e.metric == HarnessMetric::kGC   ? metrics::MetricKind::kGC
                      : e.metric == HarnessMetric::kLS ? metrics::MetricKind::kLS
                                                       : metrics::MetricKind::kIW;
        if (j.contains("critic")) {
            e.spec.critic = critic_arch_from_json(j["critic"], path + ".critic");
            if (!j["critic"].contains("head")) {
                // default to the head each objective needs
                e.spec.critic.head = e.metric == HarnessMetric::kGC
                                         ? ad::OutputHead::kSigmoid
                                         : ad::OutputHead::kLinear;
            }
        } else {
            e.spec.critic.widths.clear();  // filled per distribution at run time
        }
        if (j.contains("iterations")) {
            e.spec.iterations = get_size(j["iterations"], path + ".iterations");
        }
        if (j.contains("learning_rate")) {
            e.spec.learning_rate = get_double(j["learning_rate"], path + ".learning_rate");
        }
        if (j.contains("batch")) e.spec.batch = get_size(j["batch"], path + ".batch");
        if (j.contains("penalty_weight")) {
            e.spec.penalty_weight = get_double(j["penalty_weight"], path + ".penalty_weight");
        }
        if (j.contains("ls_a")) e.spec.ls_a = get_double(j["ls_a"], path + ".ls_a");
        if (j.contains("ls_b")) e.spec.ls_b = get_double(j["ls_b"], path + ".ls_b");
        break;
    }
    case HarnessMetric::kMMD:
        require_keys(j, path, {"kind", "sigmas", "unbiased"});
        e.spec.kind = metrics::MetricKind::kMMD;
        if (j.contains("sigmas")) {
            e.spec.sigmas = get_double_list(j["sigmas"], path + ".sigmas");
        }
        if (j.contains("unbiased")) {
            e.spec.mmd_unbiased = get_bool(j["unbiased"], path + ".unbiased");
        }
        break;
    case HarnessMetric::kFID:
    case HarnessMetric::kIS:
        require_keys(j, path, {"kind"});
        break;
    case HarnessMetric::kC2ST: {
        require_keys(j, path,
                     {"kind", "classifier", "knn_k", "knn_exclude_exact", "mlp_hidden",
                      "mlp_iterations", "mlp_learning_rate", "mlp_batch"});
        if (j.contains("classifier")) {
            e.c2st.kind = metrics::classifier_kind_from_name(
                get_string(j["classifier"], path + ".classifier"));
        }
        if (j.contains("knn_k")) e.c2st.knn_k = get_size(j["knn_k"], path + ".knn_k");
        if (j.contains("knn_exclude_exact")) {
            e.c2st.knn_exclude_exact =
                get_bool(j["knn_exclude_exact"], path + ".knn_exclude_exact");
        }
        if (j.contains("mlp_hidden")) {
            e.c2st.mlp_hidden = get_size_list(j["mlp_hidden"], path + ".mlp_hidden");
        }
        if (j.contains("mlp_iterations")) {
            e.c2st.mlp_iterations = get_size(j["mlp_iterations"], path + ".mlp_iterations");
        }
        if (j.contains("mlp_learning_rate")) {
            e.c2st.mlp_learning_rate =
                get_double(j["mlp_learning_rate"], path + ".mlp_learning_rate");
        }
        if (j.contains("mlp_batch")) {
            e.c2st.mlp_batch = get_size(j["mlp_batch"], path + ".mlp_batch");
        }
        break;
    }
    }
    return e;
}

void ExperimentConfig::validate() const {
    distribution.validate();
    const std::string k = experiment_kind_name(kind);
    switch (kind) {
    case ExperimentKind::kEval:
        if (generators.empty()) fail(k, "needs at least one generator");
        if (metrics.empty()) fail(k, "needs at least one metric");
        break;
    case ExperimentKind::kRank:
        if (generators.size() < 2) fail(k, "needs >= 2 generators");
        if (metrics.empty()) fail(k, "needs at least one metric");
        break;
    case ExperimentKind::kSweepCapacity:
    case ExperimentKind::kSweepNoiseDim:
    case ExperimentKind::kSweepUpdateRatio:
    case ExperimentKind::kSweepTrainSize:
        if (grid.empty()) fail(k, "needs a nonempty grid");
        if (metrics.empty()) fail(k, "needs at least one metric");
        break;
    case ExperimentKind::kRobustnessValidationSize:
        if (generators.size() < 2) {
            fail(k, "need >= 2 generators for pairwise agreement");
        }
        if (metrics.empty()) fail(k, "needs at least one metric");
        if (robustness.n_small > robustness.n_large) {
            fail(k, "robustness.n_small must be <= robustness.n_large");
        }
        if (robustness.n_small == 0) fail(k, "robustness sizes must be >= 1");
        break;
    case ExperimentKind::kTrainGan:
        if (checkpoint_out.empty()) fail(k, "needs 'checkpoint_out'");
        break;
    case ExperimentKind::kStats:
        if (stats.test != "wilcoxon" && stats.test != "fisher") {
            fail(k, "stats.test must be 'wilcoxon' or 'fisher'");
        }
        if (stats.test == "wilcoxon" && stats.input.empty()) {
            fail(k, "stats.input is required for the wilcoxon test");
        }
        if (stats.test == "fisher" && stats.counts.size() < 2) {
            fail(k, "stats.counts needs >= 2 (agreements, total) pairs");
        }
        for (const auto& c : stats.counts) {
            if (c[0] < 0 || c[1] < c[0]) {
                fail(k, "stats.counts entries must satisfy 0 <= agreements <= total");
            }
        }
        break;
    case ExperimentKind::kCalibrate:
        if (calibrate.targets.empty()) fail(k, "calibrate.targets must be nonempty");
        for (double t : calibrate.targets) {
            if (!(t > 0.5) || !(t < 1.0)) {
                fail(k, "calibrate targets must lie in (0.5, 1)");
            }
        }
        if (!(calibrate.max_level > 0.0)) fail(k, "calibrate.max_level must be positive");
        if (calibrate.n < 8) fail(k, "calibrate.n must be >= 8");
        if (calibrate.bisection_steps == 0) {
            fail(k, "calibrate.bisection_steps must be >= 1");
        }
        break;
    case ExperimentKind::kGenData:
        if (out_prefix.empty()) fail(k, "needs 'out_prefix'");
        break;
    }
    if (kind != ExperimentKind::kStats && kind != ExperimentKind::kGenData &&
        kind != ExperimentKind::kTrainGan && kind != ExperimentKind::kCalibrate) {
        if (seeds.empty()) fail(k, "needs a nonempty seed list");
        if (n_fake == 0) fail(k, "n_fake must be >= 1");
    }
    if (kind != ExperimentKind::kStats) {
        if (data.test == 0) fail(k, "data.test must be >= 1");
        if (data.train == 0) fail(k, "data.train must be >= 1");
    }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    require_keys(j, "config",
                 {"experiment", "distribution", "data", "generators", "metrics", "seeds",
                  "n_fake", "out", "checkpoint_out", "out_prefix", "gan", "grid",
                  "robustness", "calibrate", "stats"});
    ExperimentConfig cfg;
    if (!j.contains("experiment")) fail("config", "missing 'experiment'");
    cfg.kind = experiment_kind_from_name(get_string(j["experiment"], "config.experiment"));
    if (j.contains("distribution")) {
        cfg.distribution =
            models::distribution_from_json(j["distribution"], "config.distribution");
    }
    if (j.contains("data")) cfg.data = data_spec_from_json(j["data"], "config.data");
    if (j.contains("generators")) {
        const json& gens = j["generators"];
        if (!gens.is_array()) fail("config.generators", "expected an array");
        for (std::size_t i = 0; i < gens.size(); ++i) {
            cfg.generators.push_back(generator_ref_from_json(
                gens[i], "config.generators[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("metrics")) {
        const json& ms = j["metrics"];
        if (!ms.is_array()) fail("config.metrics", "expected an array");
        for (std::size_t i = 0; i < ms.size(); ++i) {
            cfg.metrics.push_back(
                metric_entry_from_json(ms[i], "config.metrics[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("seeds")) {
        const json& seeds = j["seeds"];
        if (!seeds.is_array()) fail("config.seeds", "expected an array");
        cfg.seeds.clear();
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            cfg.seeds.push_back(get_u64(seeds[i], "config.seeds[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("n_fake")) cfg.n_fake = get_size(j["n_fake"], "config.n_fake");
    if (j.contains("out")) cfg.out = get_string(j["out"], "config.out");
    if (j.contains("checkpoint_out")) {
        cfg.checkpoint_out = get_string(j["checkpoint_out"], "config.checkpoint_out");
    }
    if (j.contains("out_prefix")) {
        cfg.out_prefix = get_string(j["out_prefix"], "config.out_prefix");
    }
    if (j.contains("gan")) cfg.gan = gan_from_json(j["gan"], "config.gan");
    if (j.contains("grid")) {
        const json& grid = j["grid"];
        if (!grid.is_array()) fail("config.grid", "expected an array");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            GridPoint p = grid_point_from_json(
                grid[i], "config.grid[" + std::to_string(i) + "]", cfg.kind);
            if (p.label.empty()) p.label = default_grid_label(p, cfg.kind);
            cfg.grid.push_back(std::move(p));
        }
    }
    if (j.contains("robustness")) {
        require_keys(j["robustness"], "config.robustness", {"n_small", "n_large"});
        if (j["robustness"].contains("n_small")) {
            cfg.robustness.n_small =
                get_size(j["robustness"]["n_small"], "config.robustness.n_small");
        }
        if (j["robustness"].contains("n_large")) {
            cfg.robustness.n_large =
                get_size(j["robustness"]["n_large"], "config.robustness.n_large");
        }
    }
    if (j.contains("calibrate")) {
        const json& c = j["calibrate"];
        require_keys(c, "config.calibrate",
                     {"targets", "corruption", "max_level", "n", "bisection_steps",
                      "tolerance"});
        if (c.contains("targets")) {
            cfg.calibrate.targets = get_double_list(c["targets"], "config.calibrate.targets");
        }
        if (c.contains("corruption")) {
            cfg.calibrate.corruption = data::corruption_kind_from_name(
                get_string(c["corruption"], "config.calibrate.corruption"));
        }
        if (c.contains("max_level")) {
            cfg.calibrate.max_level = get_double(c["max_level"], "config.calibrate.max_level");
        }
        if (c.contains("n")) cfg.calibrate.n = get_size(c["n"], "config.calibrate.n");
        if (c.contains("bisection_steps")) {
            cfg.calibrate.bisection_steps =
                get_size(c["bisection_steps"], "config.calibrate.bisection_steps");
        }
        if (c.contains("tolerance")) {
            cfg.calibrate.tolerance = get_double(c["tolerance"], "config.calibrate.tolerance");
        }
    }
    if (j.contains("stats")) {
        const json& s = j["stats"];
        require_keys(s, "config.stats", {"test", "input", "counts"});
        if (s.contains("test")) cfg.stats.test = get_string(s["test"], "config.stats.test");
        if (s.contains("input")) {
            cfg.stats.input = get_string(s["input"], "config.stats.input");
        }
        if (s.contains("counts")) {
            const json& counts = s["counts"];
            if (!counts.is_array()) fail("config.stats.counts", "expected an array");
            for (std::size_t i = 0; i < counts.size(); ++i) {
                const std::string path = "config.stats.counts[" + std::to_string(i) + "]";
                if (!counts[i].is_array() || counts[i].size() != 2) {
                    fail(path, "expected [agreements, total]");
                }
                cfg.stats.counts.push_back(
                    {static_cast<long long>(get_size(counts[i][0], path + "[0]")),
                     static_cast<long long>(get_size(counts[i][1], path + "[1]"))});
            }
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error(io_error::kind::not_found,
                       "config file not found: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(io_error::kind::bad_header,
                       "config " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    json j{{"experiment", experiment_kind_name(kind)},
           {"distribution", models::distribution_to_json(distribution)},
           {"data", data_spec_to_json(data)}};
    if (!generators.empty()) {
        json gens = json::array();
        for (const auto& g : generators) gens.push_back(generator_ref_to_json(g));
        j["generators"] = std::move(gens);
    }
    if (!metrics.empty()) {
        json ms = json::array();
        for (const auto& m : metrics) ms.push_back(metric_entry_to_json(m));
        j["metrics"] = std::move(ms);
    }
    j["seeds"] = seeds;
    j["n_fake"] = n_fake;
    if (!out.empty()) j["out"] = out.string();
    if (!checkpoint_out.empty()) j["checkpoint_out"] = checkpoint_out.string();
    if (!out_prefix.empty()) j["out_prefix"] = out_prefix.string();
    if (kind == ExperimentKind::kTrainGan || is_sweep(kind)) {
        j["gan"] = gan_to_json(gan);
    }
    if (is_sweep(kind)) {
        json grid_json = json::array();
        for (const auto& p : grid) grid_json.push_back(grid_point_to_json(p, kind));
        j["grid"] = std::move(grid_json);
    }
    if (kind == ExperimentKind::kRobustnessValidationSize) {
        j["robustness"] = json{{"n_small", robustness.n_small},
                               {"n_large", robustness.n_large}};
    }
    if (kind == ExperimentKind::kCalibrate) {
        j["calibrate"] = json{{"targets", calibrate.targets},
                              {"corruption", data::corruption_kind_name(calibrate.corruption)},
                              {"max_level", calibrate.max_level},
                              {"n", calibrate.n},
                              {"bisection_steps", calibrate.bisection_steps},
                              {"tolerance", calibrate.tolerance}};
    }
    if (kind == ExperimentKind::kStats) {
        json s{{"test", stats.test}};
        if (!stats.input.empty()) s["input"] = stats.input.string();
        if (!stats.counts.empty()) {
            json counts = json::array();
            for (const auto& c : stats.counts) counts.push_back({c[0], c[1]});
            s["counts"] = std::move(counts);
        }
        j["stats"] = std::move(s);
    }
    return j;
}

} // namespace criticbench::harness
