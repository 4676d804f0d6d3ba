#include "criticbench/stats/rank_table.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "criticbench/errors.hpp"
#include "criticbench/stats/stats_tests.hpp"

namespace criticbench::stats {

RankTableSummary rank_table(const ResultsGrid& results) {
    if (results.empty()) {
        throw config_error("rank_table: results grid is empty");
    }

    RankTableSummary summary;
    std::set<std::string> metric_set;
    for (const auto& [gen, row] : results) {
        summary.generators.push_back(gen);
        for (const auto& [metric, cell] : row) {
            (void)cell;
            metric_set.insert(metric);
        }
    }
    summary.metrics.assign(metric_set.begin(), metric_set.end());

    std::string missing;
    for (const auto& gen : summary.generators) {
        const auto& row = results.at(gen);
        for (const auto& metric : summary.metrics) {
            if (row.find(metric) == row.end()) {
                missing += (missing.empty() ? "" : ", ") + ("(" + gen + ", " + metric + ")");
            }
        }
    }
    if (!missing.empty()) {
        throw config_error("rank_table: missing cells: " + missing);
    }

    // Oriented columns: higher is better for every metric after negation.
    std::map<std::string, std::vector<double>> oriented;
    for (const auto& metric : summary.metrics) {
        bool direction = false;
        bool direction_set = false;
        std::vector<double> column;
        column.reserve(summary.generators.size());
        for (const auto& gen : summary.generators) {
            const RankCell& cell = results.at(gen).at(metric);
            if (!std::isfinite(cell.score)) {
                throw config_error("rank_table: non-finite score in cell (" + gen +
                                   ", " + metric + ")");
            }
            if (direction_set && cell.higher_is_better != direction) {
                throw config_error("rank_table: cells of metric '" + metric +
                                   "' disagree on direction");
            }
            direction = cell.higher_is_better;
            direction_set = true;
            column.push_back(direction ? cell.score : -cell.score);
        }
        // -0.0 vs 0.0 compare equal; normalize anyway for clean printing
        for (double& v : column) {
            if (v == 0.0) v = 0.0;
        }
        oriented.emplace(metric, std::move(column));
    }

    for (const auto& metric : summary.metrics) {
        const std::vector<double>& column = oriented.at(metric);
        std::vector<std::size_t> order(summary.generators.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (column[a] != column[b]) return column[a] > column[b];
            return summary.generators[a] < summary.generators[b];
        });
        std::vector<std::string> ranked;
        ranked.reserve(order.size());
        for (std::size_t i : order) ranked.push_back(summary.generators[i]);
        summary.ranking.emplace(metric, std::move(ranked));
    }

    if (summary.generators.size() >= 2) {
        for (std::size_t i = 0; i < summary.metrics.size(); ++i) {
            for (std::size_t j = i + 1; j < summary.metrics.size(); ++j) {
                const double tau = kendall_tau(oriented.at(summary.metrics[i]),
                                               oriented.at(summary.metrics[j]));
                if (std::isfinite(tau)) {
                    summary.kendall[summary.metrics[i]][summary.metrics[j]] = tau;
                }
            }
        }
    }

    // Intersection of per-metric argmax sets.
    std::set<std::string> winners(summary.generators.begin(), summary.generators.end());
    for (const auto& metric : summary.metrics) {
        const std::vector<double>& column = oriented.at(metric);
        const double best = *std::max_element(column.begin(), column.end());
        std::set<std::string> metric_best;
        for (std::size_t i = 0; i < column.size(); ++i) {
            if (column[i] == best) metric_best.insert(summary.generators[i]);
        }
        std::set<std::string> kept;
        std::set_intersection(winners.begin(), winners.end(), metric_best.begin(),
                              metric_best.end(), std::inserter(kept, kept.begin()));
        winners = std::move(kept);
    }
    summary.unanimous_winners.assign(winners.begin(), winners.end());
    return summary;
}

} // namespace criticbench::stats
