#include "sorn/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace sorn::diff {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 3)
        throw std::invalid_argument("Tensor: rank must be 1..3, got " + std::to_string(shape_.size()));
    data_.assign(product(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_.empty() || shape_.size() > 3)
        throw std::invalid_argument("Tensor: rank must be 1..3, got " + std::to_string(shape_.size()));
    if (product(shape_) != data_.size())
        throw std::invalid_argument("Tensor: shape " + shape_str() + " does not match value count " +
                                    std::to_string(data_.size()));
}

Tensor Tensor::scalar(double v) { return Tensor({1, 1}, std::vector<double>{v}); }

Tensor Tensor::vector(std::size_t n, double fill) { return Tensor({n, 1}, fill); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) { return Tensor({rows, cols}, fill); }

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n}, 0.0);
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

std::size_t Tensor::dim(std::size_t i) const {
    if (i >= shape_.size())
        throw std::out_of_range("Tensor: dim " + std::to_string(i) + " of rank-" + std::to_string(rank()) +
                                " tensor");
    return shape_[i];
}

double& Tensor::at(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
}

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << 'x';
        os << shape_[i];
    }
    return os.str();
}

}  // namespace sorn::diff
