#include "criticbench/metrics/c2st.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "criticbench/ad/graph.hpp"
#include "criticbench/ad/mlp_graph.hpp"
#include "criticbench/errors.hpp"
#include "criticbench/models/critic.hpp"
#include "criticbench/rng.hpp"

namespace criticbench::metrics {

namespace {

// Row-index split of one class: shuffled, first (n+1)/2 rows train, rest test.
struct ClassSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

ClassSplit stratified_half(std::size_t n, SplitMix64& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.next_below(i)]);
    }
    const std::size_t n_train = (n + 1) / 2;
    ClassSplit split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return split;
}

ad::Tensor gather_rows(const ad::Tensor& src, const std::vector<std::size_t>& rows) {
    const std::size_t d = src.cols();
    ad::Tensor out = ad::Tensor::zeros({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) out.at(i, j) = src.at(rows[i], j);
    }
    return out;
}

double squared_distance(const ad::Tensor& a, std::size_t i, const ad::Tensor& b,
                        std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double delta = a.at(i, c) - b.at(j, c);
        s += delta * delta;
    }
    return s;
}

// Majority label of the k nearest training rows. Neighbor selection orders by
// (distance, index) so equal distances resolve to the lower index; a tied
// vote resolves to the nearest selected neighbor's label.
int knn_predict(const ad::Tensor& train, const std::vector<int>& labels,
                const ad::Tensor& test, std::size_t row, std::size_t k,
                bool exclude_exact) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(train.rows());
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const double d2 = squared_distance(test, row, train, i);
        if (exclude_exact && d2 == 0.0) continue;
        dist.emplace_back(d2, i);
    }
    if (dist.empty()) {
        throw config_error("c2st: knn has no usable neighbors (all training points "
                           "excluded as exact matches)");
    }
    const std::size_t kk = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk),
                      dist.end());
    int votes = 0;
    for (std::size_t i = 0; i < kk; ++i) votes += labels[dist[i].second];
    const std::size_t half = kk - static_cast<std::size_t>(votes);
    if (static_cast<std::size_t>(votes) > half) return 1;
    if (static_cast<std::size_t>(votes) < half) return 0;
    return labels[dist[0].second];
}

double knn_accuracy(const ad::Tensor& train, const std::vector<int>& train_labels,
                    const ad::Tensor& test, const std::vector<int>& test_labels,
                    const C2stOptions& opt) {
    if (opt.knn_k == 0) {
        throw config_error("c2st: knn_k must be >= 1");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const int predicted = knn_predict(train, train_labels, test, i, opt.knn_k,
                                          opt.knn_exclude_exact);
        correct += static_cast<std::size_t>(predicted == test_labels[i]);
    }
    return static_cast<double>(correct) / static_cast<double>(test.rows());
}

// Binary classifier: {d, hidden..., 1} MLP logit trained on the logistic
// cross-entropy, which is exactly the GC discriminator loss over a real-half
// and a fake-half minibatch.
double mlp_accuracy(const ad::Tensor& train_real, const ad::Tensor& train_fake,
                    const ad::Tensor& test, const std::vector<int>& test_labels,
                    const C2stOptions& opt, std::uint64_t split_seed) {
    if (opt.mlp_iterations == 0) {
        throw config_error("c2st: mlp_iterations must be >= 1");
    }
    if (opt.mlp_learning_rate <= 0.0) {
        throw config_error("c2st: mlp_learning_rate must be positive");
    }
    if (opt.mlp_batch == 0) {
        throw config_error("c2st: mlp_batch must be >= 1");
    }
    const std::size_t d = train_real.cols();
    std::vector<std::size_t> widths;
    widths.push_back(d);
    for (std::size_t h : opt.mlp_hidden) {
        if (h == 0) throw config_error("c2st: mlp_hidden widths must be >= 1");
        widths.push_back(h);
    }
    widths.push_back(1);

    const std::size_t half = std::max<std::size_t>(
        1, std::min({opt.mlp_batch / 2, train_real.rows(), train_fake.rows()}));

    ad::Graph g;
    const ad::MlpParams params = ad::add_mlp_params(g, widths, "c.");
    const ad::NodeId xr = g.input("xr", {half, d});
    const ad::NodeId xf = g.input("xf", {half, d});
    const ad::MlpApplication app_r =
        ad::append_mlp_forward(g, params, xr, ad::Activation::kLeakyRelu);
    const ad::MlpApplication app_f =
        ad::append_mlp_forward(g, params, xf, ad::Activation::kLeakyRelu);
    const ad::NodeId loss = models::append_critic_loss(
        g, models::Criterion::kGC, app_r.raw, app_f.raw, app_r.raw, 0.0, 0.0, 1.0);

    std::vector<double> flat =
        models::init_mlp_params(widths, derive_seed(split_seed, seed_salt::kWeightInit));
    SplitMix64 mb_rng(derive_seed(split_seed, seed_salt::kMinibatch));

    ad::Tensor batch_r = ad::Tensor::zeros({half, d});
    ad::Tensor batch_f = ad::Tensor::zeros({half, d});
    for (std::size_t step = 0; step < opt.mlp_iterations; ++step) {
        for (std::size_t i = 0; i < half; ++i) {
            const std::size_t rr = mb_rng.next_below(train_real.rows());
            const std::size_t ff = mb_rng.next_below(train_fake.rows());
            for (std::size_t j = 0; j < d; ++j) {
                batch_r.at(i, j) = train_real.at(rr, j);
                batch_f.at(i, j) = train_fake.at(ff, j);
            }
        }
        ad::Bindings b;
        models::bind_params(b, params, flat);
        b.insert_or_assign("xr", batch_r);
        b.insert_or_assign("xf", batch_f);
        const double value = g.forward(b, loss).item();
        if (!std::isfinite(value)) {
            throw train_abort(step, 0.0,
                              "c2st: classifier loss became non-finite at step " +
                                  std::to_string(step));
        }
        const auto grads = g.backward(loss);
        models::apply_gradients(flat, params, grads, -opt.mlp_learning_rate);
    }

    const ad::Tensor logits =
        models::mlp_forward(test, widths, flat, ad::Activation::kLeakyRelu);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.rows(); ++i) {
        const int predicted = logits.at(i, 0) > 0.0 ? 1 : 0;
        correct += static_cast<std::size_t>(predicted == test_labels[i]);
    }
    return static_cast<double>(correct) / static_cast<double>(test.rows());
}

} // namespace

const char* classifier_kind_name(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::kSoftmaxMlp: return "softmax-mlp";
        case ClassifierKind::kKnn: return "knn";
    }
    return "?";
}

ClassifierKind classifier_kind_from_name(const std::string& s) {
    if (s == "softmax-mlp") return ClassifierKind::kSoftmaxMlp;
    if (s == "knn") return ClassifierKind::kKnn;
    throw config_error("unknown classifier kind '" + s + "' (expected softmax-mlp | knn)");
}

double c2st(const data::SampleSet& real, const data::SampleSet& fake,
            ClassifierKind kind, std::uint64_t split_seed) {
    C2stOptions options;
    options.kind = kind;
    return c2st(real, fake, options, split_seed);
}

double c2st(const data::SampleSet& real, const data::SampleSet& fake,
            const C2stOptions& options, std::uint64_t split_seed) {
    if (real.dim() != fake.dim()) {
        throw shape_error("c2st: dimension mismatch: real d=" + std::to_string(real.dim()) +
                          ", fake d=" + std::to_string(fake.dim()));
    }
    if (real.size() < 4 || fake.size() < 4) {
        throw config_error("c2st: need at least 4 samples per class, got real n=" +
                           std::to_string(real.size()) + ", fake n=" +
                           std::to_string(fake.size()));
    }

    SplitMix64 split_rng(derive_seed(split_seed, seed_salt::kSplit));
    const ClassSplit real_split = stratified_half(real.size(), split_rng);
    const ClassSplit fake_split = stratified_half(fake.size(), split_rng);

    const ad::Tensor train_real = gather_rows(real.data(), real_split.train);
    const ad::Tensor train_fake = gather_rows(fake.data(), fake_split.train);
    const ad::Tensor test_real = gather_rows(real.data(), real_split.test);
    const ad::Tensor test_fake = gather_rows(fake.data(), fake_split.test);

    // Concatenate the test halves: reals (label 1) first, fakes (label 0) after.
    const std::size_t n_test = test_real.rows() + test_fake.rows();
    const std::size_t d = real.dim();
    ad::Tensor test = ad::Tensor::zeros({n_test, d});
    std::vector<int> test_labels(n_test, 0);
    for (std::size_t i = 0; i < test_real.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) test.at(i, j) = test_real.at(i, j);
        test_labels[i] = 1;
    }
    for (std::size_t i = 0; i < test_fake.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            test.at(test_real.rows() + i, j) = test_fake.at(i, j);
        }
    }

    if (options.kind == ClassifierKind::kKnn) {
        const std::size_t n_train = train_real.rows() + train_fake.rows();
        ad::Tensor train = ad::Tensor::zeros({n_train, d});
        std::vector<int> train_labels(n_train, 0);
        for (std::size_t i = 0; i < train_real.rows(); ++i) {
            for (std::size_t j = 0; j < d; ++j) train.at(i, j) = train_real.at(i, j);
            train_labels[i] = 1;
        }
        for (std::size_t i = 0; i < train_fake.rows(); ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                train.at(train_real.rows() + i, j) = train_fake.at(i, j);
            }
        }
        return knn_accuracy(train, train_labels, test, test_labels, options);
    }
    return mlp_accuracy(train_real, train_fake, test, test_labels, options, split_seed);
}

} // namespace criticbench::metrics
