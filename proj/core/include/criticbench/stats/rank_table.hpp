#pragma once

#include <map>
#include <string>
#include <vector>

namespace criticbench::stats {

// One evaluated cell of a results grid: a metric's score for a generator,
// together with the metric's reading direction.
struct RankCell {
    double score = 0.0;
    bool higher_is_better = false;
};

// generator name -> metric name -> cell
using ResultsGrid = std::map<std::string, std::map<std::string, RankCell>>;

struct RankTableSummary {
    std::vector<std::string> generators;  // sorted union over the grid
    std::vector<std::string> metrics;     // sorted union over the grid

    // Per metric, generators ordered best to worst by that metric's
    // direction; score ties fall back to generator-name order.
    std::map<std::string, std::vector<std::string>> ranking;

    // Pairwise Kendall tau-b between metric score columns, oriented so higher
    // is better for both; keyed by the lexicographically smaller metric name
    // first. Empty with fewer than two generators or fewer than two metrics;
    // a pair whose tau is undefined (a fully tied column) is omitted.
    std::map<std::string, std::map<std::string, double>> kendall;

    // Generators scored strictly-or-jointly best by every metric (the
    // intersection of the per-metric argmax sets); empty when no generator
    // tops every column.
    std::vector<std::string> unanimous_winners;
};

// Builds per-metric rankings and the cross-metric agreement summary for a
// fully populated grid. Every generator must carry a cell for every metric:
// missing cells throw config_error naming each (generator, metric) pair, as
// does a non-finite score or a metric whose cells disagree on direction.
RankTableSummary rank_table(const ResultsGrid& results);

} // namespace criticbench::stats
