#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace criticbench {

// Shape or rank mismatch between graph nodes or matrices. Messages name the
// offending node or field.
class shape_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Math domain violation (log of non-positive value, negative sqrt, output of
// a sigmoid head outside (0,1), ...).
class domain_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid experiment/metric/model configuration. Messages carry the field
// path that failed validation.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API called out of order (backward before forward, gradient read before
// backward, ...).
class state_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File format errors for .cbs / .cbm / results files.
class io_error : public std::runtime_error {
public:
    enum class kind {
        not_found,
        bad_magic,
        bad_header,
        truncated,
        invariant,
    };

    io_error(kind k, const std::string& what) : std::runtime_error(what), kind_(k) {}

    kind error_kind() const noexcept { return kind_; }

private:
    kind kind_;
};

// A training loop hit a non-finite loss. Carries a diagnostic snapshot.
class train_abort : public std::runtime_error {
public:
    train_abort(std::size_t iteration, double last_finite_loss, const std::string& what)
        : std::runtime_error(what), iteration_(iteration), last_finite_loss_(last_finite_loss) {}

    std::size_t iteration() const noexcept { return iteration_; }
    double last_finite_loss() const noexcept { return last_finite_loss_; }

private:
    std::size_t iteration_;
    double last_finite_loss_;
};

} // namespace criticbench
