#include "criticbench/ad/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include "criticbench/errors.hpp"

namespace criticbench::ad {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.size() > 2) {
        throw shape_error("tensor rank " + std::to_string(shape_.size()) +
                          " unsupported (max rank 2)");
    }
    for (std::size_t s : shape_) {
        if (s == 0) throw shape_error("tensor dimensions must be positive");
    }
    if (data_.size() != shape_numel(shape_)) {
        throw shape_error("tensor data size " + std::to_string(data_.size()) +
                          " does not match shape " + shape_string());
    }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::vector(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::zeros(const std::vector<std::size_t>& shape) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), 0.0));
}

Tensor Tensor::ones(const std::vector<std::size_t>& shape) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), 1.0));
}

Tensor Tensor::full(const std::vector<std::size_t>& shape, double v) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), v));
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw shape_error("rows() requires rank 2, got " + shape_string());
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw shape_error("cols() requires rank 2, got " + shape_string());
    return shape_[1];
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw shape_error("item() requires exactly one element, got " + shape_string());
    }
    return data_[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    if (rank() != 2) throw shape_error("at(r,c) requires rank 2, got " + shape_string());
    return data_[r * shape_[1] + c];
}

double& Tensor::at(std::size_t r, std::size_t c) {
    if (rank() != 2) throw shape_error("at(r,c) requires rank 2, got " + shape_string());
    return data_[r * shape_[1] + c];
}

bool Tensor::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ", ";
        os << shape_[i];
    }
    os << ')';
    return os.str();
}

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw shape_error("matmul requires rank-2 operands, got " + a.shape_string() +
                          " and " + b.shape_string());
    }
    const std::size_t m = trans_a ? a.cols() : a.rows();
    const std::size_t k = trans_a ? a.rows() : a.cols();
    const std::size_t kb = trans_b ? b.cols() : b.rows();
    const std::size_t n = trans_b ? b.rows() : b.cols();
    if (k != kb) {
        throw shape_error("matmul inner dimensions disagree: " + a.shape_string() +
                          (trans_a ? "^T" : "") + " * " + b.shape_string() +
                          (trans_b ? "^T" : ""));
    }

    Tensor out = Tensor::zeros({m, n});
    // i-k-j loop order keeps the innermost walk contiguous in both the
    // output row and (for the untransposed case) the B row.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = trans_a ? a.at(kk, i) : a.at(i, kk);
            for (std::size_t j = 0; j < n; ++j) {
                const double bv = trans_b ? b.at(j, kk) : b.at(kk, j);
                out.at(i, j) += av * bv;
            }
        }
    }
    return out;
}

} // namespace criticbench::ad
