#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "criticbench/ad/tensor.hpp"
#include "criticbench/errors.hpp"

namespace criticbench::data {

enum class Role { kTrain = 0, kValidation = 1, kTest = 2 };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::kTrain: return "train";
        case Role::kValidation: return "validation";
        case Role::kTest: return "test";
    }
    return "?";
}

inline Role role_from_name(const std::string& s) {
    if (s == "train") return Role::kTrain;
    if (s == "validation") return Role::kValidation;
    if (s == "test") return Role::kTest;
    throw config_error("unknown role '" + s + "' (expected train | validation | test)");
}

// An immutable n-by-d batch of samples with a provenance label. Mixture-
// sourced sets additionally carry per-row component indices, which the
// mode-drop corruption needs; the indices are in-memory only and do not
// survive a save/load round trip.
class SampleSet {
public:
    SampleSet(ad::Tensor data, Role role, std::string source_label)
        : data_(std::move(data)), role_(role), source_label_(std::move(source_label)) {
        validate();
    }

    SampleSet(ad::Tensor data, Role role, std::string source_label,
              std::vector<std::size_t> component_labels, std::size_t n_components)
        : data_(std::move(data)),
          role_(role),
          source_label_(std::move(source_label)),
          component_labels_(std::move(component_labels)),
          n_components_(n_components) {
        validate();
        if (component_labels_.size() != data_.rows()) {
            throw config_error("component label count " +
                               std::to_string(component_labels_.size()) +
                               " does not match sample count " + std::to_string(data_.rows()));
        }
    }

    const ad::Tensor& data() const noexcept { return data_; }
    Role role() const noexcept { return role_; }
    const std::string& source_label() const noexcept { return source_label_; }

    std::size_t size() const { return data_.rows(); }
    std::size_t dim() const { return data_.cols(); }

    bool has_component_labels() const noexcept { return !component_labels_.empty(); }
    const std::vector<std::size_t>& component_labels() const noexcept {
        return component_labels_;
    }
    std::size_t n_components() const noexcept { return n_components_; }

private:
    void validate() const {
        if (data_.rank() != 2) {
            throw config_error("sample set requires an n-by-d matrix, got rank " +
                               std::to_string(data_.rank()));
        }
        if (data_.rows() < 1 || data_.cols() < 1) {
            throw config_error("sample set invariant n >= 1, d >= 1 violated");
        }
        if (!data_.all_finite()) {
            throw config_error("sample set contains non-finite values");
        }
    }

    ad::Tensor data_;
    Role role_;
    std::string source_label_;
    std::vector<std::size_t> component_labels_;
    std::size_t n_components_ = 0;
};

} // namespace criticbench::data
