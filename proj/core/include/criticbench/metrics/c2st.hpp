#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "criticbench/data/sample_set.hpp"

namespace criticbench::metrics {

// Classifier family for the two-sample test.
enum class ClassifierKind { kSoftmaxMlp, kKnn };

const char* classifier_kind_name(ClassifierKind k);
ClassifierKind classifier_kind_from_name(const std::string& s);

// Tunables for c2st. The defaults reproduce the plain c2st(kind) behavior.
struct C2stOptions {
    ClassifierKind kind = ClassifierKind::kKnn;

    // k-nearest-neighbor classifier: Euclidean distance, majority vote,
    // neighbor selection tie-broken by lower training index. When
    // knn_exclude_exact is set, training points at exactly zero distance are
    // skipped (the "excluded-self" variant for literal-copy diagnostics).
    std::size_t knn_k = 5;
    bool knn_exclude_exact = false;

    // Binary softmax MLP (one logit; the two class probabilities are
    // sigmoid(raw) and its complement), trained with minibatch SGD on the
    // logistic cross-entropy.
    std::vector<std::size_t> mlp_hidden = {16};
    std::size_t mlp_iterations = 400;
    double mlp_learning_rate = 0.05;
    std::size_t mlp_batch = 64;
};

// Classifier two-sample test: label real samples 1 and fake samples 0, split
// each class 50/50 into train/test halves (stratified, shuffled by
// split_seed), fit the classifier on the train halves and return its
// held-out accuracy. 0.5 means the sets are indistinguishable to this
// classifier. Requires at least 4 samples per class.
double c2st(const data::SampleSet& real, const data::SampleSet& fake,
            ClassifierKind kind, std::uint64_t split_seed);
double c2st(const data::SampleSet& real, const data::SampleSet& fake,
            const C2stOptions& options, std::uint64_t split_seed);

} // namespace criticbench::metrics
