#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace sorn::diff {

/// Dense row-major tensor of doubles, rank 1 to 3.
/// Rank-2 matrices carry all graph values; rank-3 is used for window stacks.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor scalar(double v);
    static Tensor vector(std::size_t n, double fill = 0.0);
    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static Tensor identity(std::size_t n);

    std::size_t rank() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const;

    // Rank-2 accessors.
    std::size_t rows() const { return dim(0); }
    std::size_t cols() const { return dim(1); }
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    double& at(std::size_t i, std::size_t j, std::size_t k);
    double at(std::size_t i, std::size_t j, std::size_t k) const;

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    std::string shape_str() const;  // e.g. "3x4"

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

}  // namespace sorn::diff
