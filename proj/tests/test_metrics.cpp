// Tests for the test-time divergence estimators: the GC/LS/IW objectives, the
// gradient penalty, the closed-form MMD, Algorithm-1 critic fitting, frozen-
// critic evaluation, and the seed-fanned divergence pipeline.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "criticbench/data/distributions.hpp"
#include "criticbench/errors.hpp"
#include "criticbench/metrics/critic_training.hpp"
#include "criticbench/metrics/divergence.hpp"
#include "criticbench/metrics/mmd.hpp"
#include "criticbench/metrics/objectives.hpp"
#include "criticbench/models/critic.hpp"
#include "criticbench/models/generator.hpp"
#include "criticbench/rng.hpp"

using namespace criticbench;
using namespace criticbench::metrics;

namespace {

data::SampleSet normal_split(std::size_t n, data::Role role, std::uint64_t seed) {
    return data::sample(data::DistributionSpec::standard_normal(1), n, seed, role,
                        "normal");
}

// The controllable generator: N(0,1) pushed through an intensity shift of the
// given level. Level 0 is the identity, i.e. a perfect generator.
models::GeneratorModel shifted_generator(double level) {
    return models::GeneratorModel::analytic(
        data::DistributionSpec::standard_normal(1),
        data::CorruptionSpec{data::CorruptionKind::kIntensityShift, level});
}

ad::Tensor random_matrix(std::size_t n, std::size_t d, SplitMix64& rng) {
    ad::Tensor t = ad::Tensor::zeros({n, d});
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.next_gaussian();
    return t;
}

// Independent MMD oracle: per-term accumulation with the normalization
// applied inside the loops, walking j before i.
double mmd2_brute_force(const ad::Tensor& x, const ad::Tensor& s, double sigma) {
    const auto kernel = [&](const ad::Tensor& a, std::size_t i, const ad::Tensor& b,
                            std::size_t j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double diff = a.at(i, k) - b.at(j, k);
            d2 += diff * diff;
        }
        return std::exp(-d2 / (2.0 * sigma * sigma));
    };
    const double n = static_cast<double>(x.rows());
    const double m = static_cast<double>(s.rows());
    double acc = 0.0;
    for (std::size_t j = 0; j < x.rows(); ++j)
        for (std::size_t i = 0; i < x.rows(); ++i) acc += kernel(x, i, x, j) / (n * n);
    for (std::size_t j = 0; j < s.rows(); ++j)
        for (std::size_t i = 0; i < s.rows(); ++i) acc += kernel(s, i, s, j) / (m * m);
    for (std::size_t j = 0; j < s.rows(); ++j)
        for (std::size_t i = 0; i < x.rows(); ++i)
            acc -= 2.0 * kernel(x, i, s, j) / (n * m);
    return acc;
}

} // namespace

// ---------------------------------------------------------------- objectives

TEST_CASE("gc_objective matches hand-evaluated oracles") {
    const std::vector<double> half{0.5, 0.5};
    CHECK(gc_objective(half, half) ==
          doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(gc_objective(half, half) == doctest::Approx(-1.386294).epsilon(1e-6));

    const std::vector<double> real{0.9}, fake{0.1};
    CHECK(gc_objective(real, fake) ==
          doctest::Approx(2.0 * std::log(0.9)).epsilon(1e-12));
    CHECK(gc_objective(real, fake) == doctest::Approx(-0.210721).epsilon(1e-5));

    // perfect separation drives the objective toward its supremum 0
    const std::vector<double> near_one{1.0 - 1e-9}, near_zero{1e-9};
    const double top = gc_objective(near_one, near_zero);
    CHECK(top < 0.0);
    CHECK(top > -1e-5);
}

TEST_CASE("gc_objective enforces the (0,1) domain and nonempty batches") {
    const std::vector<double> ok{0.5};
    CHECK_THROWS_WITH_AS(gc_objective(std::vector<double>{1.0}, ok),
                         doctest::Contains("outside (0, 1)"), domain_error);
    CHECK_THROWS_AS(gc_objective(ok, std::vector<double>{0.0}), domain_error);
    CHECK_THROWS_AS(gc_objective(std::vector<double>{-0.1}, ok), domain_error);
    CHECK_THROWS_AS(gc_objective(ok, std::vector<double>{1.5}), domain_error);
    CHECK_THROWS_AS(gc_objective(std::vector<double>{}, ok), shape_error);
    CHECK_THROWS_AS(gc_objective(ok, std::vector<double>{}), shape_error);
}

TEST_CASE("gc_objective clamps saturated outputs to [1e-7, 1-1e-7]") {
    // 1e-12 is inside the legal domain but below the clamp floor
    const std::vector<double> tiny{1e-12}, mid{0.5};
    CHECK(gc_objective(tiny, mid) ==
          doctest::Approx(std::log(1e-7) + std::log(0.5)).epsilon(1e-12));
    const std::vector<double> huge{1.0 - 1e-12};
    CHECK(gc_objective(mid, huge) ==
          doctest::Approx(std::log(0.5) + std::log(1e-7)).epsilon(1e-9));
}

TEST_CASE("gc_objective is symmetric under (real, fake) -> (1-fake, 1-real)") {
    SplitMix64 rng(20260813);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> real(7), fake(13);
        for (double& v : real) v = rng.next_uniform(0.1, 0.9);
        for (double& v : fake) v = rng.next_uniform(0.1, 0.9);
        std::vector<double> swapped_real(fake.size()), swapped_fake(real.size());
        for (std::size_t i = 0; i < fake.size(); ++i) swapped_real[i] = 1.0 - fake[i];
        for (std::size_t i = 0; i < real.size(); ++i) swapped_fake[i] = 1.0 - real[i];
        const double a = gc_objective(real, fake);
        const double b = gc_objective(swapped_real, swapped_fake);
        CHECK(std::abs(a - b) <= 1e-12);
    }
}

TEST_CASE("ls_objective matches hand-evaluated oracles") {
    CHECK(ls_objective(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 0.0}) ==
          0.0);
    CHECK(ls_objective(std::vector<double>{0.5}, std::vector<double>{0.5}) == -0.5);
    CHECK(ls_objective(std::vector<double>{2.0}, std::vector<double>{-1.0}) == -2.0);
    // custom targets move the optimum
    CHECK(ls_objective(std::vector<double>{2.0}, std::vector<double>{-1.0}, -1.0,
                       2.0) == 0.0);
    CHECK_THROWS_AS(
        ls_objective(std::vector<double>{}, std::vector<double>{0.0}), shape_error);
}

TEST_CASE("ls_objective attains its per-point maximum at the targets") {
    // grid search over critic outputs: the real side peaks at b=1, the fake
    // side at a=0
    int best_real = -1000, best_fake = -1000;
    double best_real_val = -1e300, best_fake_val = -1e300;
    for (int i = -200; i <= 200; ++i) {
        const double g = i / 100.0;
        const double vr = ls_objective(std::vector<double>{g}, std::vector<double>{0.0});
        const double vf = ls_objective(std::vector<double>{1.0}, std::vector<double>{g});
        if (vr > best_real_val) {
            best_real_val = vr;
            best_real = i;
        }
        if (vf > best_fake_val) {
            best_fake_val = vf;
            best_fake = i;
        }
    }
    CHECK(best_real == 100);  // D = 1 on real
    CHECK(best_fake == 0);    // D = 0 on fake
    CHECK(best_real_val == 0.0);
    CHECK(best_fake_val == 0.0);
}

TEST_CASE("iw_objective is the mean gap and ignores constant shifts") {
    CHECK(iw_objective(std::vector<double>{1.0, 2.0, 3.0},
                       std::vector<double>{0.0, 0.0, 0.0}) == 2.0);

    SplitMix64 rng(7);
    std::vector<double> real(9), fake(5);
    for (double& v : real) v = rng.next_gaussian();
    for (double& v : fake) v = rng.next_gaussian();
    const double base = iw_objective(real, fake);
    for (double& v : real) v += 7.25;
    for (double& v : fake) v += 7.25;
    CHECK(iw_objective(real, fake) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("iw supremum over unit-norm linear critics is the translation length") {
    // P = delta_0 as {0}, Q = delta_c as {c}: over critics f(x) = w*x with
    // |w| <= 1 the best objective is |c|, the 1-Wasserstein distance
    const double c = 3.5;
    double best = -1e300;
    for (int i = -10; i <= 10; ++i) {
        const double w = i / 10.0;
        best = std::max(best, iw_objective(std::vector<double>{w * 0.0},
                                           std::vector<double>{w * c}));
    }
    CHECK(best == c);
}

TEST_CASE("gradient_penalty is exact for linear critics") {
    models::CriticArch arch{{2, 1}, ad::Activation::kTanh, ad::OutputHead::kLinear};
    models::CriticNetwork critic(arch, models::Criterion::kIW);

    SplitMix64 rng(11);
    const ad::Tensor real = random_matrix(3, 2, rng);
    const ad::Tensor fake = random_matrix(3, 2, rng);

    // unit-norm weight vector: exactly 1-Lipschitz everywhere, penalty 0
    critic.mutable_parameters() = {1.0, 0.0, 0.3};
    CHECK(gradient_penalty(critic, real, fake, 42) == 0.0);

    // |w| = 5 gives (5 - 1)^2 = 16 at every interpolate
    critic.mutable_parameters() = {3.0, 4.0, 0.0};
    CHECK(gradient_penalty(critic, real, fake, 42) == 16.0);
}

TEST_CASE("gradient_penalty is seed-deterministic and validates inputs") {
    models::CriticArch arch{{2, 4, 1}, ad::Activation::kTanh, ad::OutputHead::kLinear};
    models::CriticNetwork critic =
        models::CriticNetwork::initialized(arch, models::Criterion::kIW, 99);

    SplitMix64 rng(13);
    const ad::Tensor real = random_matrix(8, 2, rng);
    const ad::Tensor fake = random_matrix(8, 2, rng);

    const double p1 = gradient_penalty(critic, real, fake, 5);
    CHECK(gradient_penalty(critic, real, fake, 5) == p1);
    CHECK(gradient_penalty(critic, real, fake, 6) != p1);

    CHECK_THROWS_AS(gradient_penalty(critic, real, random_matrix(7, 2, rng), 5),
                    shape_error);
    CHECK_THROWS_AS(gradient_penalty(critic, real, random_matrix(8, 3, rng), 5),
                    shape_error);

    // a non-smooth activation has no usable input gradient
    models::CriticArch kinked{{2, 4, 1}, ad::Activation::kLeakyRelu,
                              ad::OutputHead::kLinear};
    models::CriticNetwork ls_critic =
        models::CriticNetwork::initialized(kinked, models::Criterion::kLS, 99);
    CHECK_THROWS_AS(gradient_penalty(ls_critic, real, fake, 5), config_error);
}

// ----------------------------------------------------------------------- mmd

TEST_CASE("mmd2_biased matches hand-evaluated kernel sums") {
    const ad::Tensor x({1, 1}, {0.0});
    const ad::Tensor s({1, 1}, {1.0});
    CHECK(mmd2_biased(x, s, 1.0) ==
          doctest::Approx(2.0 - 2.0 * std::exp(-0.5)).epsilon(1e-15));
    CHECK(mmd2_biased(x, s, 1.0) == doctest::Approx(0.786939).epsilon(1e-6));
    CHECK(mmd2_biased(x, s, 2.0) ==
          doctest::Approx(2.0 - 2.0 * std::exp(-0.125)).epsilon(1e-15));

    // 2-D: ||(0,0) - (3,4)||^2 = 25, sigma = 5 -> same value as the 1-D case
    const ad::Tensor x2({1, 2}, {0.0, 0.0});
    const ad::Tensor s2({1, 2}, {3.0, 4.0});
    CHECK(mmd2_biased(x2, s2, 5.0) ==
          doctest::Approx(2.0 - 2.0 * std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("mmd2_biased is exactly zero on identical sets") {
    SplitMix64 rng(20260813);
    const ad::Tensor x = random_matrix(17, 3, rng);
    CHECK(mmd2_biased(x, x, 0.7) == 0.0);
    CHECK(mmd2_biased(x, x, 3.0) == 0.0);

    const data::SampleSet set(x, data::Role::kTest, "self");
    CHECK(mmd2_biased(set, set, 1.0) == 0.0);
}

TEST_CASE("mmd2_biased equals an independent brute-force loop for all n,m <= 50") {
    SplitMix64 rng(424242);
    double worst = 0.0;
    double most_negative = 0.0;
    std::size_t worst_n = 0, worst_m = 0;
    for (std::size_t n = 1; n <= 50; ++n) {
        for (std::size_t m = 1; m <= 50; ++m) {
            const ad::Tensor x = random_matrix(n, 2, rng);
            const ad::Tensor s = random_matrix(m, 2, rng);
            const double mine = mmd2_biased(x, s, 1.3);
            const double brute = mmd2_brute_force(x, s, 1.3);
            const double rel =
                std::abs(mine - brute) / std::max({1.0, std::abs(mine), std::abs(brute)});
            if (rel > worst) {
                worst = rel;
                worst_n = n;
                worst_m = m;
            }
            most_negative = std::min(most_negative, mine);
        }
    }
    CAPTURE(worst_n);
    CAPTURE(worst_m);
    CHECK(worst <= 1e-12);
    CHECK(most_negative >= -1e-12);  // biased V-statistic nonnegativity
}

TEST_CASE("mmd2_unbiased drops the diagonal and needs two samples per set") {
    // four far-apart points: off-diagonal kernels vanish, the unbiased
    // estimate of MMD^2(P, P) collapses to -2/n
    const ad::Tensor x({4, 1}, {0.0, 100.0, 200.0, 300.0});
    CHECK(mmd2_unbiased(x, x, 1.0) == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(mmd2_biased(x, x, 1.0) == 0.0);

    const ad::Tensor single({1, 1}, {0.0});
    CHECK_THROWS_AS(mmd2_unbiased(single, x, 1.0), shape_error);
}

TEST_CASE("mmd_score takes the maximum over the bandwidth list") {
    SplitMix64 rng(5);
    const ad::Tensor x = random_matrix(12, 2, rng);
    const ad::Tensor s = random_matrix(9, 2, rng);
    const std::vector<double> sigmas{0.5, 1.0, 2.0, 4.0};
    double expect = -1e300;
    for (double sg : sigmas) expect = std::max(expect, mmd2_biased(x, s, sg));
    CHECK(mmd_score(x, s, sigmas) == expect);

    CHECK_THROWS_WITH_AS(mmd_score(x, s, {}), doctest::Contains("nonempty"),
                         config_error);
    CHECK_THROWS_AS(mmd2_biased(x, s, 0.0), domain_error);
    CHECK_THROWS_AS(mmd2_biased(x, s, -1.0), domain_error);
    CHECK_THROWS_AS(mmd2_biased(x, random_matrix(9, 3, rng), 1.0), shape_error);
}

TEST_CASE("median_heuristic_sigmas scales the median pairwise distance") {
    // pooled points {0, 1, 0, 1}: six pairwise distances {0,0,1,1,1,1},
    // median 1 -> bandwidths {0.5, 1, 2, 4}
    const ad::Tensor x({2, 1}, {0.0, 1.0});
    const ad::Tensor s({2, 1}, {0.0, 1.0});
    CHECK(median_heuristic_sigmas(x, s, 3) ==
          std::vector<double>{0.5, 1.0, 2.0, 4.0});

    // degenerate pool (all identical): falls back to sigma_hat = 1
    const ad::Tensor same({2, 1}, {7.0, 7.0});
    CHECK(median_heuristic_sigmas(same, same, 3) ==
          std::vector<double>{0.5, 1.0, 2.0, 4.0});

    // scaling the data scales the bandwidths
    const ad::Tensor x10({2, 1}, {0.0, 10.0});
    const ad::Tensor s10({2, 1}, {0.0, 10.0});
    CHECK(median_heuristic_sigmas(x10, s10, 3) ==
          std::vector<double>{5.0, 10.0, 20.0, 40.0});
}

// ------------------------------------------------------------ MetricSpec

TEST_CASE("MetricSpec validation reports field paths") {
    MetricSpec spec;
    spec.kind = MetricKind::kGC;
    spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kSigmoid};

    MetricSpec bad = spec;
    bad.seeds.clear();
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("metric.seeds"),
                         config_error);

    bad = spec;
    bad.sigmas = {1.0};
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("metric.sigmas"),
                         config_error);

    bad = spec;
    bad.mmd_unbiased = true;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("metric.mmd_unbiased"),
                         config_error);

    bad = spec;
    bad.iterations = 0;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("metric.iterations"),
                         config_error);

    bad = spec;
    bad.learning_rate = 0.0;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("metric.learning_rate"),
                         config_error);

    bad = spec;
    bad.critic.head = ad::OutputHead::kLinear;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("critic.head"),
                         config_error);

    MetricSpec iw = spec;
    iw.kind = MetricKind::kIW;
    iw.critic = {{1, 8, 1}, ad::Activation::kTanh, ad::OutputHead::kLinear};
    iw.penalty_weight = -1.0;
    CHECK_THROWS_WITH_AS(iw.validate(), doctest::Contains("metric.penalty_weight"),
                         config_error);

    MetricSpec ls = spec;
    ls.kind = MetricKind::kLS;
    ls.critic.head = ad::OutputHead::kLinear;
    ls.ls_a = 1.0;
    ls.ls_b = 1.0;
    CHECK_THROWS_WITH_AS(ls.validate(), doctest::Contains("metric.ls_a"),
                         config_error);

    MetricSpec mmd;
    mmd.kind = MetricKind::kMMD;
    CHECK_THROWS_WITH_AS(mmd.validate(), doctest::Contains("metric.sigmas"),
                         config_error);
    mmd.sigmas = {1.0, -2.0};
    CHECK_THROWS_WITH_AS(mmd.validate(), doctest::Contains("positive"), config_error);
    mmd.sigmas = {1.0, 2.0};
    CHECK_NOTHROW(mmd.validate());

    CHECK(metric_kind_from_name("mmd") == MetricKind::kMMD);
    CHECK(metric_kind_name(MetricKind::kIW) == std::string("iw"));
    CHECK_THROWS_AS(metric_kind_from_name("js"), config_error);
    CHECK(metric_uses_critic(MetricKind::kLS));
    CHECK_FALSE(metric_uses_critic(MetricKind::kMMD));
    CHECK_THROWS_AS(criterion_for(MetricKind::kMMD), config_error);
}

// -------------------------------------------------------------- train_critic

TEST_CASE("train_critic reaches the GC optimum on a perfect generator") {
    const data::SampleSet x_train = normal_split(2048, data::Role::kTrain, 101);
    const models::GeneratorModel gen = shifted_generator(0.0);

    MetricSpec spec;
    spec.kind = MetricKind::kGC;
    spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kSigmoid};
    spec.iterations = 2000;
    spec.learning_rate = 0.05;
    spec.batch = 128;

    const TrainedCritic fitted = train_critic(MetricKind::kGC, x_train, gen, spec, 3);
    REQUIRE(fitted.curve.size() == spec.iterations);
    CHECK(fitted.curve.back() == doctest::Approx(-2.0 * std::log(2.0)).epsilon(0.05));
    // late-stage average sits on the optimum too
    double tail = 0.0;
    for (std::size_t i = spec.iterations - 100; i < spec.iterations; ++i) {
        tail += fitted.curve[i];
    }
    tail /= 100.0;
    CHECK(tail == doctest::Approx(-2.0 * std::log(2.0)).epsilon(0.05));
}

TEST_CASE("train_critic reaches the LS optimum on a perfect generator") {
    const data::SampleSet x_train = normal_split(2048, data::Role::kTrain, 102);
    const models::GeneratorModel gen = shifted_generator(0.0);

    MetricSpec spec;
    spec.kind = MetricKind::kLS;
    spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
    spec.iterations = 2000;
    spec.learning_rate = 0.05;
    spec.batch = 128;

    const TrainedCritic fitted = train_critic(MetricKind::kLS, x_train, gen, spec, 3);
    CHECK(fitted.curve.back() == doctest::Approx(-0.5).epsilon(0.05));
}

TEST_CASE("train_critic is bit-deterministic per seed") {
    const data::SampleSet x_train = normal_split(256, data::Role::kTrain, 103);
    const models::GeneratorModel gen = shifted_generator(0.5);

    MetricSpec spec;
    spec.kind = MetricKind::kLS;
    spec.critic = {{1, 6, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
    spec.iterations = 60;
    spec.batch = 32;

    const TrainedCritic a = train_critic(MetricKind::kLS, x_train, gen, spec, 7);
    const TrainedCritic b = train_critic(MetricKind::kLS, x_train, gen, spec, 7);
    CHECK(a.critic.parameters() == b.critic.parameters());
    CHECK(a.curve == b.curve);

    const TrainedCritic c = train_critic(MetricKind::kLS, x_train, gen, spec, 8);
    CHECK(a.critic.parameters() != c.critic.parameters());
}

TEST_CASE("train_critic rejects invalid setups") {
    const data::SampleSet x_train = normal_split(64, data::Role::kTrain, 104);
    const data::SampleSet x_test = normal_split(64, data::Role::kTest, 104);
    const models::GeneratorModel gen = shifted_generator(0.0);

    MetricSpec spec;
    spec.kind = MetricKind::kLS;
    spec.critic = {{1, 4, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
    spec.iterations = 5;
    spec.batch = 8;

    // MMD has no critic
    MetricSpec mmd_spec;
    mmd_spec.kind = MetricKind::kMMD;
    mmd_spec.sigmas = {1.0};
    CHECK_THROWS_WITH_AS(
        train_critic(MetricKind::kMMD, x_train, gen, mmd_spec, 1),
        doctest::Contains("no critic"), config_error);

    // kind / spec.kind mismatch
    CHECK_THROWS_WITH_AS(train_critic(MetricKind::kGC, x_train, gen, spec, 1),
                         doctest::Contains("metric.kind"), config_error);

    // training data must carry the train role
    CHECK_THROWS_WITH_AS(train_critic(MetricKind::kLS, x_test, gen, spec, 1),
                         doctest::Contains("role"), config_error);

    // critic input width must match the data dimension
    MetricSpec wide = spec;
    wide.critic.widths = {2, 4, 1};
    CHECK_THROWS_WITH_AS(train_critic(MetricKind::kLS, x_train, gen, wide, 1),
                         doctest::Contains("critic.widths"), config_error);
}

// ----------------------------------------------------------- evaluate_metric

TEST_CASE("evaluate_metric stays in each kind's P=Q band") {
    const data::SampleSet x_train = normal_split(2048, data::Role::kTrain, 201);
    const data::SampleSet x_test = normal_split(1000, data::Role::kTest, 202);
    const models::GeneratorModel gen = shifted_generator(0.0);
    const std::size_t n_fake = 1000;

    SUBCASE("gc") {
        MetricSpec spec;
        spec.kind = MetricKind::kGC;
        spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kSigmoid};
        spec.iterations = 1500;
        spec.batch = 64;
        const TrainedCritic fitted =
            train_critic(MetricKind::kGC, x_train, gen, spec, 11);
        const double score =
            evaluate_metric(MetricKind::kGC, x_test, gen, fitted.critic, n_fake, 11);
        CHECK(std::abs(score - (-2.0 * std::log(2.0))) < 0.1);
    }
    SUBCASE("ls") {
        MetricSpec spec;
        spec.kind = MetricKind::kLS;
        spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
        spec.iterations = 1500;
        spec.batch = 64;
        const TrainedCritic fitted =
            train_critic(MetricKind::kLS, x_train, gen, spec, 11);
        const double score =
            evaluate_metric(MetricKind::kLS, x_test, gen, fitted.critic, n_fake, 11);
        CHECK(std::abs(score - (-0.5)) < 0.05);
    }
    SUBCASE("iw") {
        MetricSpec spec;
        spec.kind = MetricKind::kIW;
        spec.critic = {{1, 8, 1}, ad::Activation::kTanh, ad::OutputHead::kLinear};
        spec.iterations = 800;
        spec.batch = 64;
        spec.penalty_weight = 10.0;
        const TrainedCritic fitted =
            train_critic(MetricKind::kIW, x_train, gen, spec, 11);
        const double score =
            evaluate_metric(MetricKind::kIW, x_test, gen, fitted.critic, n_fake, 11);
        CHECK(std::abs(score) < 0.1);
    }
    SUBCASE("mmd") {
        const auto sigmas = median_heuristic_sigmas(
            x_test.data(), gen.generate(500, 77).data(), 11);
        const double score = evaluate_mmd(x_test, gen, sigmas, n_fake, 11);
        CHECK(score >= 0.0);
        CHECK(score <= 0.01);
    }
}

TEST_CASE("evaluate_metric recovers a translation distance with IW") {
    // data N(0,1), generator N(2,1): the true 1-Wasserstein distance is 2.
    // A fully converged critic under the two-sided penalty reaches mean gap
    // 2·(1 + 2/(2λ)) = 2.2, so a narrow tanh critic (saturation trims the
    // effective slope) and a small seed average keep the estimate centered.
    const data::SampleSet x_train = normal_split(2048, data::Role::kTrain, 301);
    const data::SampleSet x_test = normal_split(1000, data::Role::kTest, 302);
    const models::GeneratorModel gen = shifted_generator(2.0);

    MetricSpec spec;
    spec.kind = MetricKind::kIW;
    spec.critic = {{1, 3, 1}, ad::Activation::kTanh, ad::OutputHead::kLinear};
    spec.iterations = 1200;
    spec.learning_rate = 0.02;
    spec.batch = 64;
    spec.penalty_weight = 10.0;
    spec.seeds = {1, 2, 3};

    const MetricResult result = divergence_computation(x_train, x_test, gen, spec, 1000);
    REQUIRE_FALSE(result.partial);
    CHECK(result.mean >= 1.6);
    CHECK(result.mean <= 2.2);
}

TEST_CASE("evaluate_metric validates roles, counts and criterion pairing") {
    const data::SampleSet x_train = normal_split(128, data::Role::kTrain, 401);
    const data::SampleSet x_val = normal_split(128, data::Role::kValidation, 402);
    const models::GeneratorModel gen = shifted_generator(0.0);

    MetricSpec spec;
    spec.kind = MetricKind::kLS;
    spec.critic = {{1, 4, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
    spec.iterations = 10;
    spec.batch = 16;
    const TrainedCritic fitted = train_critic(MetricKind::kLS, x_train, gen, spec, 1);

    // validation role is allowed
    CHECK(std::isfinite(
        evaluate_metric(MetricKind::kLS, x_val, gen, fitted.critic, 64, 1)));
    // train role is not
    CHECK_THROWS_WITH_AS(
        evaluate_metric(MetricKind::kLS, x_train, gen, fitted.critic, 64, 1),
        doctest::Contains("test or validation"), config_error);
    // n_fake must be positive
    CHECK_THROWS_WITH_AS(
        evaluate_metric(MetricKind::kLS, x_val, gen, fitted.critic, 0, 1),
        doctest::Contains("n_fake"), config_error);
    // critic criterion must match the kind
    CHECK_THROWS_WITH_AS(
        evaluate_metric(MetricKind::kIW, x_val, gen, fitted.critic, 64, 1),
        doctest::Contains("built for"), config_error);
    // MMD goes through evaluate_mmd
    CHECK_THROWS_AS(
        evaluate_metric(MetricKind::kMMD, x_val, gen, fitted.critic, 64, 1),
        config_error);
    CHECK_THROWS_AS(evaluate_mmd(x_train, gen, {1.0}, 64, 1), config_error);
}

TEST_CASE("metric scores order intensity-shift levels in >= 9/10 repetitions") {
    const data::SampleSet x_train = normal_split(1024, data::Role::kTrain, 501);
    const data::SampleSet x_test = normal_split(512, data::Role::kTest, 502);
    const models::GeneratorModel mild = shifted_generator(0.75);
    const models::GeneratorModel severe = shifted_generator(1.5);
    const std::size_t n_fake = 512;

    const auto critic_spec = [](MetricKind kind) {
        MetricSpec spec;
        spec.kind = kind;
        spec.iterations = 400;
        spec.batch = 64;
        switch (kind) {
            case MetricKind::kGC:
                spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu,
                               ad::OutputHead::kSigmoid};
                break;
            case MetricKind::kLS:
                spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu,
                               ad::OutputHead::kLinear};
                break;
            case MetricKind::kIW:
                spec.critic = {{1, 8, 1}, ad::Activation::kTanh,
                               ad::OutputHead::kLinear};
                // The lambda = 10 penalty makes eta = 0.05 marginally stable;
                // a smaller step keeps the critic in the correct slope basin.
                spec.learning_rate = 0.02;
                break;
            case MetricKind::kMMD: break;
        }
        return spec;
    };

    for (MetricKind kind : {MetricKind::kGC, MetricKind::kLS, MetricKind::kIW,
                            MetricKind::kMMD}) {
        CAPTURE(std::string(metric_kind_name(kind)));
        int correct = 0;
        for (std::uint64_t rep = 1; rep <= 10; ++rep) {
            double mild_score = 0.0, severe_score = 0.0;
            if (kind == MetricKind::kMMD) {
                const std::vector<double> sigmas{0.5, 1.0, 2.0};
                mild_score = evaluate_mmd(x_test, mild, sigmas, n_fake, rep);
                severe_score = evaluate_mmd(x_test, severe, sigmas, n_fake, rep);
            } else {
                const MetricSpec spec = critic_spec(kind);
                mild_score = evaluate_metric(
                    kind, x_test, mild,
                    train_critic(kind, x_train, mild, spec, rep).critic, n_fake, rep);
                severe_score = evaluate_metric(
                    kind, x_test, severe,
                    train_critic(kind, x_train, severe, spec, rep).critic, n_fake, rep);
            }
            if (compare_scores(mild_score, severe_score,
                               better_direction(kind)) == -1) {
                ++correct;
            }
        }
        CHECK(correct >= 9);
    }
}

// -------------------------------------------------- divergence_computation

TEST_CASE("divergence_computation aggregates seeds deterministically") {
    const data::SampleSet x_train = normal_split(1024, data::Role::kTrain, 601);
    const data::SampleSet x_test = normal_split(1000, data::Role::kTest, 602);
    const models::GeneratorModel gen = shifted_generator(0.0);

    MetricSpec spec;
    spec.kind = MetricKind::kLS;
    spec.critic = {{1, 8, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
    spec.iterations = 600;
    spec.batch = 64;
    spec.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    const MetricResult result = divergence_computation(x_train, x_test, gen, spec,
                                                       1000, 1);
    REQUIRE(result.scores.size() == spec.seeds.size());
    REQUIRE(result.curves.size() == spec.seeds.size());
    CHECK_FALSE(result.partial);
    CHECK(result.kind == MetricKind::kLS);
    CHECK(result.direction == BetterDirection::kLower);
    for (double s : result.scores) CHECK(std::isfinite(s));
    for (const auto& curve : result.curves) CHECK(curve.size() == spec.iterations);

    // the P=Q premise of the spec'd example: tight spread around -1/2
    CHECK(std::abs(result.mean - (-0.5)) < 0.05);
    CHECK(result.stddev < 0.05);

    // mean/std are exactly recomputable from the per-seed scores
    const auto [mean, stddev] = score_moments(result.seeds, result.scores);
    CHECK(result.mean == mean);
    CHECK(result.stddev == stddev);

    // reruns and different worker counts give bitwise-identical results
    const MetricResult again = divergence_computation(x_train, x_test, gen, spec,
                                                      1000, 3);
    CHECK(again.scores == result.scores);
    CHECK(again.curves == result.curves);
    CHECK(again.mean == result.mean);
    CHECK(again.stddev == result.stddev);
}

TEST_CASE("divergence_computation single-seed degenerate case") {
    const data::SampleSet x_train = normal_split(256, data::Role::kTrain, 603);
    const data::SampleSet x_test = normal_split(256, data::Role::kTest, 604);
    const models::GeneratorModel gen = shifted_generator(0.5);

    MetricSpec spec;
    spec.kind = MetricKind::kLS;
    spec.critic = {{1, 6, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
    spec.iterations = 50;
    spec.batch = 32;
    spec.seeds = {7};

    const MetricResult result =
        divergence_computation(x_train, x_test, gen, spec, 256, 1);
    REQUIRE(result.scores.size() == 1);
    CHECK(result.mean == result.scores[0]);
    CHECK(result.stddev == 0.0);
}

TEST_CASE("divergence_computation runs MMD without critics") {
    const data::SampleSet x_train = normal_split(128, data::Role::kTrain, 605);
    const data::SampleSet x_test = normal_split(512, data::Role::kTest, 606);
    const models::GeneratorModel gen = shifted_generator(0.0);

    MetricSpec spec;
    spec.kind = MetricKind::kMMD;
    spec.sigmas = {0.5, 1.0, 2.0};
    spec.seeds = {1, 2, 3};

    const MetricResult result =
        divergence_computation(x_train, x_test, gen, spec, 512, 2);
    CHECK_FALSE(result.partial);
    for (const auto& curve : result.curves) CHECK(curve.empty());
    for (double s : result.scores) {
        CHECK(s >= 0.0);
        CHECK(s < 0.02);
    }
    CHECK(result.mean < 0.02);
}

TEST_CASE("divergence_computation marks aborted seeds partial") {
    const data::SampleSet x_train = normal_split(128, data::Role::kTrain, 607);
    const data::SampleSet x_test = normal_split(128, data::Role::kTest, 608);
    const models::GeneratorModel gen = shifted_generator(0.5);

    MetricSpec spec;
    spec.kind = MetricKind::kLS;
    spec.critic = {{1, 4, 1}, ad::Activation::kLeakyRelu, ad::OutputHead::kLinear};
    spec.iterations = 60;
    spec.batch = 8;
    spec.learning_rate = 1e9;  // guaranteed blow-up
    spec.seeds = {1, 2};

    const MetricResult result =
        divergence_computation(x_train, x_test, gen, spec, 64, 1);
    CHECK(result.partial);
    CHECK(result.failures.size() == 2);
    for (double s : result.scores) CHECK(std::isnan(s));
    CHECK(std::isnan(result.mean));
    for (const auto& failure : result.failures) {
        CHECK(failure.message.find("non-finite") != std::string::npos);
    }

    // invalid divergence inputs are rejected before any work happens
    CHECK_THROWS_WITH_AS(divergence_computation(x_test, x_test, gen, spec, 64, 1),
                         doctest::Contains("role"), config_error);
    CHECK_THROWS_WITH_AS(divergence_computation(x_train, x_test, gen, spec, 0, 1),
                         doctest::Contains("n_fake"), config_error);
}

TEST_CASE("compare_scores honors direction and the 1e-12 tie band") {
    CHECK(compare_scores(0.5, 0.7, BetterDirection::kLower) == -1);
    CHECK(compare_scores(0.7, 0.5, BetterDirection::kLower) == 1);
    CHECK(compare_scores(0.7, 0.5, BetterDirection::kHigher) == -1);
    CHECK(compare_scores(1.0, 1.0 + 1e-13, BetterDirection::kLower) == 0);
    CHECK(compare_scores(1.0, 1.0 + 1e-11, BetterDirection::kLower) == -1);

    for (MetricKind kind : {MetricKind::kGC, MetricKind::kLS, MetricKind::kIW,
                            MetricKind::kMMD}) {
        CHECK(better_direction(kind) == BetterDirection::kLower);
    }
    CHECK(better_direction_name(BetterDirection::kLower) == std::string("lower"));
    CHECK(better_direction_from_name("higher") == BetterDirection::kHigher);
    CHECK_THROWS_AS(better_direction_from_name("sideways"), config_error);
}
