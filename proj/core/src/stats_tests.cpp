#include "criticbench/stats/stats_tests.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "criticbench/errors.hpp"

namespace criticbench::stats {

const char* test_method_name(TestMethod m) {
    return m == TestMethod::kExact ? "exact" : "normal-approximation";
}

const char* preference_name(Preference p) {
    switch (p) {
    case Preference::kLeft: return "left";
    case Preference::kRight: return "right";
    case Preference::kTied: return "tied";
    }
    return "tied";
}

namespace {

// Mid-ranks of the pooled sample (x then y), 1-based.
std::vector<double> mid_ranks(const std::vector<double>& pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pooled[a] < pooled[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
        i = j + 1;
    }
    return ranks;
}

// Counts, over every n1-subset of `ranks`, the subsets whose rank sum is
// <= w (into le) and >= w (into ge). C(20, 10) = 184756 at the largest.
void enumerate_rank_sums(const std::vector<double>& ranks, std::size_t n1, double w,
                         std::uint64_t& total, std::uint64_t& le, std::uint64_t& ge) {
    const std::size_t n = ranks.size();
    std::vector<std::size_t> idx(n1);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    total = le = ge = 0;
    const double eps = 1e-9;
    double sum = 0.0;
    for (std::size_t i = 0; i < n1; ++i) sum += ranks[idx[i]];
    for (;;) {
        ++total;
        if (sum <= w + eps) ++le;
        if (sum >= w - eps) ++ge;
        // advance to the next combination in lexicographic order
        std::size_t i = n1;
        while (i > 0 && idx[i - 1] == n - n1 + (i - 1)) --i;
        if (i == 0) break;
        --i;
        sum -= ranks[idx[i]];
        ++idx[i];
        sum += ranks[idx[i]];
        for (std::size_t j = i + 1; j < n1; ++j) {
            sum -= ranks[idx[j]];
            idx[j] = idx[j - 1] + 1;
            sum += ranks[idx[j]];
        }
    }
}

double two_sided_normal_p(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double lchoose(long long n, long long k) {
    return std::lgamma(static_cast<double>(n + 1)) -
           std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1));
}

} // namespace

TestResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.empty() || y.empty()) {
        throw config_error("wilcoxon_rank_sum: both samples must be nonempty");
    }
    const std::size_t n1 = x.size();
    const std::size_t n2 = y.size();
    const std::size_t n = n1 + n2;

    std::vector<double> pooled;
    pooled.reserve(n);
    pooled.insert(pooled.end(), x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::vector<double> ranks = mid_ranks(pooled);
    double w = 0.0;
    for (std::size_t i = 0; i < n1; ++i) w += ranks[i];

    TestResult result;
    result.statistic = w;
    result.n1 = n1;
    result.n2 = n2;

    if (n <= 20) {
        result.method = TestMethod::kExact;
        std::uint64_t total = 0, le = 0, ge = 0;
        enumerate_rank_sums(ranks, n1, w, total, le, ge);
        const double lo = static_cast<double>(std::min(le, ge));
        result.p_value = std::min(1.0, 2.0 * lo / static_cast<double>(total));
        return result;
    }

    result.method = TestMethod::kNormalApproximation;
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double dn = static_cast<double>(n);
    const double mu = dn1 * (dn + 1.0) / 2.0;
    // tie correction: subtract sum(t^3 - t) / (n (n - 1)) from (n + 1)
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double var =
        dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (var <= 0.0) {  // every observation tied: no evidence either way
        result.p_value = 1.0;
        return result;
    }
    const double centered = w - mu;
    const double correction = centered > 0.0 ? -0.5 : (centered < 0.0 ? 0.5 : 0.0);
    const double z = (centered + correction) / std::sqrt(var);
    result.statistic = w;
    result.p_value = std::min(1.0, two_sided_normal_p(z));
    return result;
}

TestResult fisher_exact_two_sided(long long a, long long b, long long c, long long d) {
    if (a < 0 || b < 0 || c < 0 || d < 0) {
        throw config_error("fisher_exact_two_sided: cells must be nonnegative");
    }
    const long long r1 = a + b;
    const long long r2 = c + d;
    const long long c1 = a + c;
    const long long c2 = b + d;
    const long long n = r1 + r2;

    TestResult result;
    result.method = TestMethod::kExact;
    result.n1 = static_cast<std::size_t>(r1);
    result.n2 = static_cast<std::size_t>(r2);

    // A zero row together with a zero column pins every cell: no information.
    if ((r1 == 0 || r2 == 0) && (c1 == 0 || c2 == 0)) {
        result.degenerate = true;
        result.p_value = 1.0;
        result.statistic = 1.0;
        return result;
    }

    const double log_denom = lchoose(n, c1);
    auto log_prob = [&](long long cell_a) {
        return lchoose(r1, cell_a) + lchoose(r2, c1 - cell_a) - log_denom;
    };

    const double log_obs = log_prob(a);
    const long long lo = std::max(0LL, c1 - r2);
    const long long hi = std::min(r1, c1);
    double p = 0.0;
    for (long long cell_a = lo; cell_a <= hi; ++cell_a) {
        const double lp = log_prob(cell_a);
        if (lp <= log_obs + 1e-12) p += std::exp(lp);
    }
    result.statistic = std::exp(log_obs);
    result.p_value = std::min(1.0, p);
    return result;
}

Preference preference_from_scores(double left, double right, bool higher_is_better,
                                  double tie_eps) {
    if (std::abs(left - right) <= tie_eps) return Preference::kTied;
    const bool left_wins = higher_is_better ? left > right : left < right;
    return left_wins ? Preference::kLeft : Preference::kRight;
}

double agreement_fraction(const std::vector<Preference>& a,
                          const std::vector<Preference>& b) {
    if (a.size() != b.size()) {
        throw shape_error("agreement_fraction: length mismatch: " +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    if (a.empty()) {
        throw config_error("agreement_fraction: lists must be nonempty");
    }
    std::size_t matches = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(a.size());
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw shape_error("kendall_tau: length mismatch: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
    }
    const std::size_t n = a.size();
    double concordant = 0.0, discordant = 0.0, tied_a = 0.0, tied_b = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs += 1.0;
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) {
                tied_a += 1.0;
                tied_b += 1.0;
            } else if (da == 0.0) {
                tied_a += 1.0;
            } else if (db == 0.0) {
                tied_b += 1.0;
            } else if ((da > 0.0) == (db > 0.0)) {
                concordant += 1.0;
            } else {
                discordant += 1.0;
            }
        }
    }
    const double denom = std::sqrt((pairs - tied_a) * (pairs - tied_b));
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (concordant - discordant) / denom;
}

} // namespace criticbench::stats
