#include "criticbench/harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "criticbench/data/sample_io.hpp"
#include "criticbench/errors.hpp"
#include "criticbench/metrics/c2st.hpp"
#include "criticbench/metrics/divergence.hpp"
#include "criticbench/metrics/gaussian_fid.hpp"
#include "criticbench/metrics/inception_score.hpp"
#include "criticbench/metrics/mmd.hpp"
#include "criticbench/models/checkpoint.hpp"
#include "criticbench/models/train_gan.hpp"
#include "criticbench/rng.hpp"
#include "criticbench/stats/rank_table.hpp"
#include "criticbench/stats/stats_tests.hpp"
#include "criticbench/version.hpp"

namespace criticbench::harness {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent per-split data streams derived from the experiment data seed.
std::uint64_t split_stream(std::uint64_t base, unsigned role_code) {
    return derive_seed(derive_seed(base, seed_salt::kDataSample), role_code);
}

data::SampleSet draw_split(const ExperimentConfig& cfg, data::Role role, std::size_t n) {
    const unsigned code = role == data::Role::kTrain        ? 0u
                          : role == data::Role::kValidation ? 1u
                                                            : 2u;
    return data::sample(cfg.distribution, n, split_stream(cfg.data.seed, code), role,
                        "dataset");
}

models::GeneratorModel realize_generator(const ExperimentConfig& cfg,
                                         const GeneratorRef& ref) {
    if (ref.is_checkpoint) return models::load_generator(ref.checkpoint);
    return models::GeneratorModel::analytic(cfg.distribution, ref.corruption);
}

models::CriticArch default_critic_arch(metrics::MetricKind kind, std::size_t d) {
    models::CriticArch arch;
    arch.widths = {d, 16, 1};
    switch (kind) {
    case metrics::MetricKind::kGC:
        arch.activation = ad::Activation::kLeakyRelu;
        arch.head = ad::OutputHead::kSigmoid;
        break;
    case metrics::MetricKind::kLS:
        arch.activation = ad::Activation::kLeakyRelu;
        arch.head = ad::OutputHead::kLinear;
        break;
    case metrics::MetricKind::kIW:
        arch.activation = ad::Activation::kTanh;
        arch.head = ad::OutputHead::kLinear;
        break;
    case metrics::MetricKind::kMMD:
        break;
    }
    return arch;
}

// Display names for the metric column; repeated kinds get #2, #3, ...
std::vector<std::string> metric_display_names(const std::vector<MetricEntry>& metrics) {
    std::map<std::string, std::size_t> seen;
    std::vector<std::string> names;
    names.reserve(metrics.size());
    for (const auto& e : metrics) {
        const std::string base = harness_metric_name(e.metric);
        const std::size_t idx = ++seen[base];
        // repeats after the first get a #2, #3, ... suffix
        names.push_back(idx > 1 ? base + "#" + std::to_string(idx) : base);
    }
    return names;
}

std::string failure_message(const metrics::SeedFailure& f) {
    return "seed " + std::to_string(f.seed) + " at iteration " +
           std::to_string(f.iteration) + ": " + f.message;
}

// Single-cell eval config embedded in each result line so the row can be
// replayed on its own.
json cell_config_json(const ExperimentConfig& cfg, const GeneratorRef& gen,
                      const MetricEntry& entry, std::size_t train_override = 0) {
    ExperimentConfig one = cfg;
    one.kind = ExperimentKind::kEval;
    one.generators = {gen};
    one.metrics = {entry};
    one.out.clear();
    one.checkpoint_out.clear();
    one.out_prefix.clear();
    one.grid.clear();
    if (train_override != 0) one.data.train = train_override;
    return one.to_json();
}

CellResult evaluate_cell(const ExperimentConfig& cfg, const data::SampleSet& x_train,
                         const data::SampleSet& x_test, const std::string& gen_name,
                         const models::GeneratorModel& gen, const MetricEntry& entry,
                         const std::string& metric_name, std::size_t workers) {
    CellResult cell;
    cell.generator = gen_name;
    cell.metric = metric_name;
    cell.higher_is_better = metric_higher_is_better(entry.metric);
    cell.seeds = cfg.seeds;
    cell.mean = kNaN;
    cell.stddev = kNaN;

    try {
        switch (entry.metric) {
        case HarnessMetric::kGC:
        case HarnessMetric::kLS:
        case HarnessMetric::kIW:
        case HarnessMetric::kMMD: {
            metrics::MetricSpec spec = entry.spec;
            spec.seeds = cfg.seeds;
            if (metrics::metric_uses_critic(spec.kind) && spec.critic.widths.empty()) {
                spec.critic = default_critic_arch(spec.kind, x_train.dim());
            }
            if (spec.kind == metrics::MetricKind::kMMD && spec.sigmas.empty()) {
                const std::uint64_t probe_seed =
                    derive_seed(cfg.data.seed, seed_salt::kBandwidth);
                const data::SampleSet probe =
                    gen.generate(std::min<std::size_t>(500, cfg.n_fake), probe_seed);
                spec.sigmas = metrics::median_heuristic_sigmas(x_train, probe, probe_seed);
            }
            const metrics::MetricResult r =
                metrics::divergence_computation(x_train, x_test, gen, spec, cfg.n_fake,
                                                workers);
            cell.scores = r.scores;
            cell.mean = r.mean;
            cell.stddev = r.stddev;
            cell.partial = r.partial;
            cell.higher_is_better = r.direction == metrics::BetterDirection::kHigher;
            for (const auto& f : r.failures) cell.failures.push_back(failure_message(f));
            break;
        }
        case HarnessMetric::kFID:
        case HarnessMetric::kIS:
        case HarnessMetric::kC2ST: {
            metrics::GaussianStats real_stats;
            if (entry.metric == HarnessMetric::kFID) {
                real_stats = metrics::gaussian_stats(x_test);
            }
            cell.scores.assign(cfg.seeds.size(), kNaN);
            for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
                const std::uint64_t seed = cfg.seeds[i];
                try {
                    const data::SampleSet fake = gen.generate(
                        cfg.n_fake, derive_seed(seed, seed_salt::kFakeDraw));
                    double score = kNaN;
                    if (entry.metric == HarnessMetric::kFID) {
                        score = metrics::fid(real_stats, metrics::gaussian_stats(fake));
                    } else if (entry.metric == HarnessMetric::kIS) {
                        score = metrics::inception_style_score(
                            metrics::mixture_class_probabilities(cfg.distribution,
                                                                 fake.data()));
                    } else {
                        score = metrics::c2st(x_test, fake, entry.c2st, seed);
                    }
                    cell.scores[i] = score;
                } catch (const std::exception& e) {
                    cell.partial = true;
                    cell.failures.push_back("seed " + std::to_string(seed) + ": " +
                                            e.what());
                }
            }
            const auto [mean, stddev] = metrics::score_moments(cfg.seeds, cell.scores);
            cell.mean = mean;
            cell.stddev = stddev;
            break;
        }
        }
    } catch (const std::exception& e) {
        cell.failed = true;
        cell.failures.push_back(e.what());
        cell.scores.assign(cfg.seeds.size(), kNaN);
        cell.mean = kNaN;
        cell.stddev = kNaN;
    }
    if (!cell.failed && !std::isfinite(cell.mean)) cell.failed = true;
    return cell;
}

json test_result_json(const stats::TestResult& r) {
    return json{{"statistic", r.statistic},
                {"p_value", r.p_value},
                {"method", stats::test_method_name(r.method)},
                {"n1", r.n1},
                {"n2", r.n2},
                {"degenerate", r.degenerate}};
}

// Finite entries of a cell's per-seed scores.
std::vector<double> finite_scores(const CellResult& cell) {
    std::vector<double> out;
    for (double s : cell.scores) {
        if (std::isfinite(s)) out.push_back(s);
    }
    return out;
}

// Rank lines: per-metric rankings with adjacent Wilcoxon tests, plus the
// cross-metric summary. Emitted only when every cell mean is usable.
void append_rank_lines(RunRecord& record,
                       const std::vector<std::string>& generator_order,
                       const std::vector<std::string>& metric_names) {
    std::map<std::pair<std::string, std::string>, const CellResult*> by_key;
    bool usable = true;
    for (const auto& cell : record.cells) {
        by_key[{cell.generator, cell.metric}] = &cell;
        if (cell.failed || !std::isfinite(cell.mean)) usable = false;
    }
    if (!usable) return;

    stats::ResultsGrid grid;
    for (const auto& gen : generator_order) {
        for (const auto& metric : metric_names) {
            const CellResult* cell = by_key.at({gen, metric});
            grid[gen][metric] = {cell->mean, cell->higher_is_better};
        }
    }
    const stats::RankTableSummary summary = stats::rank_table(grid);

    for (const auto& metric : summary.metrics) {
        const std::vector<std::string>& ranking = summary.ranking.at(metric);
        json adjacent = json::array();
        for (std::size_t i = 0; i + 1 < ranking.size(); ++i) {
            const std::vector<double> a = finite_scores(*by_key.at({ranking[i], metric}));
            const std::vector<double> b =
                finite_scores(*by_key.at({ranking[i + 1], metric}));
            if (a.empty() || b.empty()) continue;
            const stats::TestResult t = stats::wilcoxon_rank_sum(a, b);
            json row = test_result_json(t);
            row["better"] = ranking[i];
            row["worse"] = ranking[i + 1];
            adjacent.push_back(std::move(row));
        }
        record.extra_lines.push_back(json{{"type", "rank"},
                                          {"metric", metric},
                                          {"ranking", ranking},
                                          {"adjacent_wilcoxon", std::move(adjacent)}});
    }
    json kendall = json::object();
    for (const auto& [m1, row] : summary.kendall) {
        for (const auto& [m2, tau] : row) kendall[m1][m2] = tau;
    }
    record.extra_lines.push_back(json{{"type", "rank_summary"},
                                      {"kendall", std::move(kendall)},
                                      {"unanimous_winners", summary.unanimous_winners}});
}

void run_eval_like(RunRecord& record, const ExperimentConfig& cfg, std::size_t workers) {
    const data::SampleSet x_train = draw_split(cfg, data::Role::kTrain, cfg.data.train);
    const data::SampleSet x_test = draw_split(cfg, data::Role::kTest, cfg.data.test);

    std::vector<models::GeneratorModel> gens;
    gens.reserve(cfg.generators.size());
    for (const auto& ref : cfg.generators) gens.push_back(realize_generator(cfg, ref));
    const std::vector<std::string> metric_names = metric_display_names(cfg.metrics);

    for (std::size_t g = 0; g < cfg.generators.size(); ++g) {
        for (std::size_t m = 0; m < cfg.metrics.size(); ++m) {
            CellResult cell =
                evaluate_cell(cfg, x_train, x_test, cfg.generators[g].name, gens[g],
                              cfg.metrics[m], metric_names[m], workers);
            cell.cell_config = cell_config_json(cfg, cfg.generators[g], cfg.metrics[m]);
            record.cells.push_back(std::move(cell));
        }
    }

    if (cfg.kind == ExperimentKind::kRank) {
        std::vector<std::string> generator_order;
        for (const auto& ref : cfg.generators) generator_order.push_back(ref.name);
        append_rank_lines(record, generator_order, metric_names);
    }
}

GanConfig realize_gan(const ExperimentConfig& cfg) {
    GanConfig gan = cfg.gan;
    const std::size_t d = cfg.distribution.dimension;
    if (gan.critic_arch.widths.empty()) {
        const metrics::MetricKind kind =
            gan.train.criterion == models::Criterion::kGC   ? metrics::MetricKind::kGC
            : gan.train.criterion == models::Criterion::kLS ? metrics::MetricKind::kLS
                                                            : metrics::MetricKind::kIW;
        gan.critic_arch = default_critic_arch(kind, d);
    }
    if (gan.gen_arch.widths.empty()) {
        if (gan.gen_arch.noise_dim == 0) gan.gen_arch.noise_dim = d;
        gan.gen_arch.widths = {gan.gen_arch.noise_dim, 16, d};
    }
    return gan;
}

std::size_t scaled_width(std::size_t w, double factor) {
    const long long scaled = std::llround(static_cast<double>(w) * factor);
    return scaled < 1 ? 1 : static_cast<std::size_t>(scaled);
}

GanConfig realize_grid_point(const GanConfig& base, const GridPoint& p,
                             ExperimentKind kind) {
    GanConfig gan = base;
    switch (kind) {
    case ExperimentKind::kSweepCapacity:
        for (std::size_t i = 1; i + 1 < gan.critic_arch.widths.size(); ++i) {
            gan.critic_arch.widths[i] = scaled_width(gan.critic_arch.widths[i], p.disc_factor);
        }
        for (std::size_t i = 1; i + 1 < gan.gen_arch.widths.size(); ++i) {
            gan.gen_arch.widths[i] = scaled_width(gan.gen_arch.widths[i], p.gen_factor);
        }
        break;
    case ExperimentKind::kSweepNoiseDim:
        gan.gen_arch.noise_dim = p.noise_dim;
        gan.gen_arch.widths.front() = p.noise_dim;
        break;
    case ExperimentKind::kSweepUpdateRatio:
        gan.train.d_steps = p.d_steps;
        gan.train.g_steps = p.g_steps;
        break;
    case ExperimentKind::kSweepTrainSize:
        break;
    default:
        break;
    }
    return gan;
}

void run_sweep(RunRecord& record, const ExperimentConfig& cfg, std::size_t workers) {
    const data::SampleSet x_train = draw_split(cfg, data::Role::kTrain, cfg.data.train);
    const data::SampleSet x_test = draw_split(cfg, data::Role::kTest, cfg.data.test);
    const GanConfig base = realize_gan(cfg);
    const std::vector<std::string> metric_names = metric_display_names(cfg.metrics);

    for (const auto& point : cfg.grid) {
        const GanConfig gan = realize_grid_point(base, point, cfg.kind);
        const std::size_t gan_train_n = cfg.kind == ExperimentKind::kSweepTrainSize
                                            ? point.train_size
                                            : cfg.data.train;
        ExperimentConfig point_cfg = cfg;
        point_cfg.grid = {point};
        point_cfg.out.clear();
        const json point_config = point_cfg.to_json();

        std::string train_error;
        models::GeneratorModel trained =
            models::GeneratorModel::analytic(cfg.distribution, {});
        try {
            const data::SampleSet gan_train =
                draw_split(cfg, data::Role::kTrain, gan_train_n);
            models::TrainedGan result =
                models::train_toy_gan(gan_train, gan.train, gan.critic_arch, gan.gen_arch);
            trained = std::move(result.generator);
        } catch (const std::exception& e) {
            train_error = e.what();
        }

        for (std::size_t m = 0; m < cfg.metrics.size(); ++m) {
            CellResult cell;
            if (train_error.empty()) {
                cell = evaluate_cell(cfg, x_train, x_test, point.label, trained,
                                     cfg.metrics[m], metric_names[m], workers);
            } else {
                cell.generator = point.label;
                cell.metric = metric_names[m];
                cell.higher_is_better = metric_higher_is_better(cfg.metrics[m].metric);
                cell.seeds = cfg.seeds;
                cell.scores.assign(cfg.seeds.size(), kNaN);
                cell.mean = kNaN;
                cell.stddev = kNaN;
                cell.failed = true;
                cell.failures.push_back("gan training aborted: " + train_error);
            }
            cell.grid_label = point.label;
            cell.cell_config = point_config;
            record.cells.push_back(std::move(cell));
        }
    }

    // Pairwise grid-point comparisons per metric, Wilcoxon on per-seed scores.
    std::map<std::pair<std::string, std::string>, const CellResult*> by_key;
    for (const auto& cell : record.cells) by_key[{cell.generator, cell.metric}] = &cell;
    for (const auto& metric : metric_names) {
        for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
            for (std::size_t j = i + 1; j < cfg.grid.size(); ++j) {
                const CellResult* a = by_key.at({cfg.grid[i].label, metric});
                const CellResult* b = by_key.at({cfg.grid[j].label, metric});
                const std::vector<double> sa = finite_scores(*a);
                const std::vector<double> sb = finite_scores(*b);
                if (sa.empty() || sb.empty()) continue;
                const stats::TestResult t = stats::wilcoxon_rank_sum(sa, sb);
                const metrics::BetterDirection dir = a->higher_is_better
                                                         ? metrics::BetterDirection::kHigher
                                                         : metrics::BetterDirection::kLower;
                const int cmp = metrics::compare_scores(a->mean, b->mean, dir);
                json row = test_result_json(t);
                row["type"] = "sweep_compare";
                row["metric"] = metric;
                row["a"] = cfg.grid[i].label;
                row["b"] = cfg.grid[j].label;
                row["better"] = cmp < 0   ? cfg.grid[i].label
                                : cmp > 0 ? cfg.grid[j].label
                                          : "tie";
                record.extra_lines.push_back(std::move(row));
            }
        }
    }
}

void run_robustness(RunRecord& record, const ExperimentConfig& cfg, std::size_t workers) {
    const data::SampleSet x_test = draw_split(cfg, data::Role::kTest, cfg.data.test);
    std::vector<models::GeneratorModel> gens;
    for (const auto& ref : cfg.generators) gens.push_back(realize_generator(cfg, ref));
    const std::vector<std::string> metric_names = metric_display_names(cfg.metrics);

    const std::vector<std::size_t> sizes = {cfg.robustness.n_small, cfg.robustness.n_large};
    // means[size_index][(gen, metric)]
    std::vector<std::map<std::pair<std::string, std::string>, double>> means(2);
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        // Prefix property: the small set is the first n_small rows of the
        // large one, making the two conditions a paired comparison.
        const data::SampleSet x_train = draw_split(cfg, data::Role::kTrain, sizes[s]);
        for (std::size_t g = 0; g < cfg.generators.size(); ++g) {
            for (std::size_t m = 0; m < cfg.metrics.size(); ++m) {
                CellResult cell =
                    evaluate_cell(cfg, x_train, x_test, cfg.generators[g].name, gens[g],
                                  cfg.metrics[m], metric_names[m], workers);
                cell.grid_label = "critic-train-n=" + std::to_string(sizes[s]);
                cell.cell_config =
                    cell_config_json(cfg, cfg.generators[g], cfg.metrics[m], sizes[s]);
                means[s][{cell.generator, cell.metric}] =
                    cell.failed ? kNaN : cell.mean;
                record.cells.push_back(std::move(cell));
            }
        }
    }

    // Pairwise better-judgments per metric at each size, then their agreement.
    struct AgreementRow {
        std::string metric;
        long long agree = 0;
        long long total = 0;
    };
    std::vector<AgreementRow> rows;
    for (std::size_t mi = 0; mi < metric_names.size(); ++mi) {
        const std::string& metric = metric_names[mi];
        const bool higher_is_better = metric_higher_is_better(cfg.metrics[mi].metric);
        bool usable = true;
        std::vector<stats::Preference> small_labels, large_labels;
        for (std::size_t i = 0; i < cfg.generators.size() && usable; ++i) {
            for (std::size_t j = i + 1; j < cfg.generators.size() && usable; ++j) {
                const auto key_i = std::make_pair(cfg.generators[i].name, metric);
                const auto key_j = std::make_pair(cfg.generators[j].name, metric);
                const double si = means[0].at(key_i), sj = means[0].at(key_j);
                const double li = means[1].at(key_i), lj = means[1].at(key_j);
                if (!std::isfinite(si) || !std::isfinite(sj) || !std::isfinite(li) ||
                    !std::isfinite(lj)) {
                    usable = false;
                    break;
                }
                small_labels.push_back(
                    stats::preference_from_scores(si, sj, higher_is_better));
                large_labels.push_back(
                    stats::preference_from_scores(li, lj, higher_is_better));
            }
        }
        if (!usable) {
            record.extra_lines.push_back(
                json{{"type", "agreement"},
                     {"metric", metric},
                     {"error", "cells failed; agreement not computable"}});
            record.any_failure = true;
            continue;
        }
        long long agree = 0;
        for (std::size_t i = 0; i < small_labels.size(); ++i) {
            if (small_labels[i] == large_labels[i]) ++agree;
        }
        const double fraction = stats::agreement_fraction(small_labels, large_labels);
        rows.push_back({metric, agree, static_cast<long long>(small_labels.size())});
        record.extra_lines.push_back(json{{"type", "agreement"},
                                          {"metric", metric},
                                          {"n_small", cfg.robustness.n_small},
                                          {"n_large", cfg.robustness.n_large},
                                          {"pairs", small_labels.size()},
                                          {"agree_count", agree},
                                          {"agreement", fraction}});
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            const stats::TestResult t = stats::fisher_exact_two_sided(
                rows[i].agree, rows[i].total - rows[i].agree, rows[j].agree,
                rows[j].total - rows[j].agree);
            json row = test_result_json(t);
            row["type"] = "agreement_fisher";
            row["metric_a"] = rows[i].metric;
            row["metric_b"] = rows[j].metric;
            record.extra_lines.push_back(std::move(row));
        }
    }
}

void run_train_gan(RunRecord& record, const ExperimentConfig& cfg) {
    const data::SampleSet train = draw_split(cfg, data::Role::kTrain, cfg.data.train);
    const GanConfig gan = realize_gan(cfg);
    try {
        models::TrainedGan result =
            models::train_toy_gan(train, gan.train, gan.critic_arch, gan.gen_arch);
        if (!cfg.checkpoint_out.parent_path().empty()) {
            std::filesystem::create_directories(cfg.checkpoint_out.parent_path());
        }
        models::save_generator(result.generator, cfg.checkpoint_out);
        record.extra_lines.push_back(
            json{{"type", "gan"},
                 {"checkpoint", cfg.checkpoint_out.string()},
                 {"criterion", models::criterion_name(gan.train.criterion)},
                 {"cycles", gan.train.cycles},
                 {"final_d_objective", result.telemetry.d_objective.empty()
                                           ? kNaN
                                           : result.telemetry.d_objective.back()},
                 {"final_g_loss", result.telemetry.g_loss.empty()
                                      ? kNaN
                                      : result.telemetry.g_loss.back()}});
    } catch (const train_abort& e) {
        record.any_failure = true;
        record.extra_lines.push_back(
            json{{"type", "gan"}, {"error", std::string("training aborted: ") + e.what()}});
    }
}

void run_calibrate(RunRecord& record, const ExperimentConfig& cfg) {
    const data::SampleSet x_test = draw_split(cfg, data::Role::kTest, cfg.data.test);
    metrics::C2stOptions classifier;  // knn defaults

    auto accuracy_at = [&](double level) {
        data::CorruptionSpec corruption{cfg.calibrate.corruption, level};
        const models::GeneratorModel gen =
            models::GeneratorModel::analytic(cfg.distribution, corruption);
        double total = 0.0;
        for (std::uint64_t seed : cfg.seeds) {
            const data::SampleSet fake = gen.generate(
                cfg.calibrate.n, derive_seed(seed, seed_salt::kFakeDraw));
            total += metrics::c2st(x_test, fake, classifier, seed);
        }
        return total / static_cast<double>(cfg.seeds.size());
    };

    for (double target : cfg.calibrate.targets) {
        double lo = 0.0;
        double hi = cfg.calibrate.max_level;
        double level = hi;
        double accuracy = accuracy_at(hi);
        std::size_t probes = 1;
        bool converged = std::abs(accuracy - target) <= cfg.calibrate.tolerance;
        if (accuracy < target - cfg.calibrate.tolerance) {
            // even the largest level is not separable enough
            record.extra_lines.push_back(json{{"type", "calibration"},
                                              {"target", target},
                                              {"level", hi},
                                              {"accuracy", accuracy},
                                              {"probes", probes},
                                              {"converged", false}});
            record.any_failure = true;
            continue;
        }
        for (std::size_t step = 0; step < cfg.calibrate.bisection_steps && !converged;
             ++step) {
            const double mid = 0.5 * (lo + hi);
            const double acc = accuracy_at(mid);
            ++probes;
            level = mid;
            accuracy = acc;
            if (std::abs(acc - target) <= cfg.calibrate.tolerance) {
                converged = true;
                break;
            }
            if (acc < target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        record.extra_lines.push_back(json{{"type", "calibration"},
                                          {"target", target},
                                          {"level", level},
                                          {"accuracy", accuracy},
                                          {"probes", probes},
                                          {"converged", converged}});
        if (!converged) record.any_failure = true;
    }
}

void run_stats_cmd(RunRecord& record, const ExperimentConfig& cfg) {
    if (cfg.stats.test == "fisher") {
        for (std::size_t i = 0; i < cfg.stats.counts.size(); ++i) {
            for (std::size_t j = i + 1; j < cfg.stats.counts.size(); ++j) {
                const auto& a = cfg.stats.counts[i];
                const auto& b = cfg.stats.counts[j];
                const stats::TestResult t =
                    stats::fisher_exact_two_sided(a[0], a[1] - a[0], b[0], b[1] - b[0]);
                json row = test_result_json(t);
                row["type"] = "stat";
                row["test"] = "fisher";
                row["counts_a"] = {a[0], a[1]};
                row["counts_b"] = {b[0], b[1]};
                record.extra_lines.push_back(std::move(row));
            }
        }
        return;
    }

    // wilcoxon over result rows of an existing JSONL file
    std::ifstream in(cfg.stats.input);
    if (!in) {
        throw io_error(io_error::kind::not_found,
                       "stats input not found: " + cfg.stats.input.string());
    }
    struct Row {
        std::string generator;
        std::string metric;
        std::vector<double> scores;
    };
    std::vector<Row> result_rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw io_error(io_error::kind::bad_header,
                           cfg.stats.input.string() + " line " + std::to_string(line_no) +
                               ": " + e.what());
        }
        if (!j.is_object() || j.value("type", "") != "result") continue;
        Row row;
        row.generator = j.value("generator", "");
        row.metric = j.value("metric", "");
        if (j.contains("scores") && j["scores"].is_array()) {
            for (const auto& s : j["scores"]) {
                if (s.is_number()) row.scores.push_back(s.get<double>());
            }
        }
        result_rows.push_back(std::move(row));
    }
    std::set<std::string> metric_order;
    for (const auto& r : result_rows) metric_order.insert(r.metric);
    for (const auto& metric : metric_order) {
        std::vector<const Row*> rows;
        for (const auto& r : result_rows) {
            if (r.metric == metric && !r.scores.empty()) rows.push_back(&r);
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = i + 1; j < rows.size(); ++j) {
                const stats::TestResult t =
                    stats::wilcoxon_rank_sum(rows[i]->scores, rows[j]->scores);
                json row = test_result_json(t);
                row["type"] = "stat";
                row["test"] = "wilcoxon";
                row["metric"] = metric;
                row["generator_a"] = rows[i]->generator;
                row["generator_b"] = rows[j]->generator;
                record.extra_lines.push_back(std::move(row));
            }
        }
    }
}

void run_gen_data(RunRecord& record, const ExperimentConfig& cfg) {
    if (!cfg.out_prefix.parent_path().empty()) {
        std::filesystem::create_directories(cfg.out_prefix.parent_path());
    }
    const std::vector<std::pair<data::Role, std::size_t>> splits = {
        {data::Role::kTrain, cfg.data.train},
        {data::Role::kValidation, cfg.data.validation},
        {data::Role::kTest, cfg.data.test},
    };
    for (const auto& [role, n] : splits) {
        const data::SampleSet set = draw_split(cfg, role, n);
        const std::string path =
            cfg.out_prefix.string() + "-" + data::role_name(role) + ".cbs";
        data::save_samples(set, path);
        record.extra_lines.push_back(json{{"type", "dataset"},
                                          {"role", data::role_name(role)},
                                          {"path", path},
                                          {"n", n},
                                          {"dimension", cfg.distribution.dimension}});
    }
}

} // namespace

RunRecord run_experiment(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    {
        std::set<std::string> names;
        for (const auto& g : cfg.generators) {
            if (!names.insert(g.name).second) {
                throw config_error("config: duplicate generator name '" + g.name + "'");
            }
        }
    }
    const auto started = std::chrono::steady_clock::now();
    RunRecord record;
    record.config = cfg;
    record.artifact_version = kVersion;
    record.rng_algorithm = kRngAlgorithm;

    switch (cfg.kind) {
    case ExperimentKind::kEval:
    case ExperimentKind::kRank:
        run_eval_like(record, cfg, workers);
        break;
    case ExperimentKind::kSweepCapacity:
    case ExperimentKind::kSweepNoiseDim:
    case ExperimentKind::kSweepUpdateRatio:
    case ExperimentKind::kSweepTrainSize:
        run_sweep(record, cfg, workers);
        break;
    case ExperimentKind::kRobustnessValidationSize:
        run_robustness(record, cfg, workers);
        break;
    case ExperimentKind::kTrainGan:
        run_train_gan(record, cfg);
        break;
    case ExperimentKind::kCalibrate:
        run_calibrate(record, cfg);
        break;
    case ExperimentKind::kStats:
        run_stats_cmd(record, cfg);
        break;
    case ExperimentKind::kGenData:
        run_gen_data(record, cfg);
        break;
    }

    for (const auto& cell : record.cells) {
        if (cell.failed || cell.partial) record.any_failure = true;
    }
    record.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

std::string render_jsonl(const RunRecord& record, const std::string& timestamp) {
    std::ostringstream out;
    const json meta{{"type", "meta"},
                    {"experiment", experiment_kind_name(record.config.kind)},
                    {"artifact_version", record.artifact_version},
                    {"rng", record.rng_algorithm},
                    {"timestamp", timestamp},
                    {"wall_clock_seconds", record.wall_clock_seconds}};
    out << meta.dump() << '\n';
    for (const auto& cell : record.cells) {
        json line{{"type", "result"},
                  {"generator", cell.generator},
                  {"metric", cell.metric},
                  {"direction", cell.higher_is_better ? "higher" : "lower"},
                  {"seeds", cell.seeds},
                  {"scores", cell.scores},
                  {"mean", cell.mean},
                  {"stddev", cell.stddev},
                  {"partial", cell.partial},
                  {"failed", cell.failed},
                  {"failures", cell.failures},
                  {"config", cell.cell_config}};
        if (!cell.grid_label.empty()) line["grid"] = cell.grid_label;
        out << line.dump() << '\n';
    }
    for (const auto& line : record.extra_lines) out << line.dump() << '\n';
    return out.str();
}

std::string render_csv(const RunRecord& record) {
    std::ostringstream out;
    out << "experiment,grid,generator,metric,direction,seed,score,mean,stddev,partial,"
           "failed\n";
    const std::string experiment = experiment_kind_name(record.config.kind);
    for (const auto& cell : record.cells) {
        for (std::size_t i = 0; i < cell.seeds.size(); ++i) {
            out << experiment << ',' << cell.grid_label << ',' << cell.generator << ','
                << cell.metric << ',' << (cell.higher_is_better ? "higher" : "lower")
                << ',' << cell.seeds[i] << ',';
            if (i < cell.scores.size() && std::isfinite(cell.scores[i])) {
                out << json(cell.scores[i]).dump();
            }
            out << ',';
            if (std::isfinite(cell.mean)) out << json(cell.mean).dump();
            out << ',';
            if (std::isfinite(cell.stddev)) out << json(cell.stddev).dump();
            out << ',' << (cell.partial ? "true" : "false") << ','
                << (cell.failed ? "true" : "false") << '\n';
        }
    }
    return out.str();
}

void write_jsonl(const RunRecord& record, const std::filesystem::path& path) {
    if (!path.parent_path().empty()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error(io_error::kind::not_found,
                       "cannot open results file " + path.string());
    }
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << render_jsonl(record, stamp);
}

int exit_code_for(const RunRecord& record) {
    return record.any_failure ? 1 : 0;
}

} // namespace criticbench::harness
