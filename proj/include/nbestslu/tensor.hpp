#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "nbestslu/error.hpp"

namespace nbest::nn {

// Dense row-major tensor of doubles. Rank 1 and 2 are all the model needs.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count(shape_)) {
            throw DimensionError(format_msg("tensor data length ", data_.size(),
                                            " does not match shape ", shape_str()));
        }
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    void add_scaled(const Tensor& other, double scale) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += "x";
            s += std::to_string(shape_[i]);
        }
        return s + "]";
    }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

private:
    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = shape.empty() ? 0 : 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline void require_finite(const Tensor& t, const char* what) {
    if (!t.all_finite()) throw Error(format_msg(what, " contains a non-finite value"));
}

} // namespace nbest::nn
