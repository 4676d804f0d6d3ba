#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace criticbench::ad {

// Dense row-major tensor of 64-bit reals. Rank 0 (scalar), 1 (vector) and
// 2 (matrix) are the only ranks the graph ops produce. Immutable by
// convention once handed to a Graph; the raw accessors exist for
// construction and for optimizer updates on parameter tensors.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
    static Tensor zeros(const std::vector<std::size_t>& shape);
    static Tensor ones(const std::vector<std::size_t>& shape);
    static Tensor full(const std::vector<std::size_t>& shape, double v);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t numel() const noexcept { return data_.size(); }
    bool is_scalar() const noexcept { return data_.size() == 1; }

    std::size_t rows() const;
    std::size_t cols() const;

    double item() const; // numel()==1 required

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double at(std::size_t r, std::size_t c) const; // rank-2 access
    double& at(std::size_t r, std::size_t c);

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> mutable_data() noexcept { return data_; }

    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
    bool all_finite() const noexcept;

    std::string shape_string() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Raw matrix product with optional transposes: result = op(a) * op(b) where
// op is transpose when the flag is set. Both operands must be rank 2.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false, bool trans_b = false);

} // namespace criticbench::ad
