#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dcom/errors.hpp"

namespace dcom {

/// Row-major dense matrix of 32-bit reals. Reductions over elements are
/// accumulated in 64-bit; storage stays 32-bit.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw shape_error("matrix data length does not match rows*cols");
        }
        require_finite();
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0f;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    float operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const float> row(std::size_t i) const {
        return std::span<const float>(data_.data() + i * cols_, cols_);
    }
    std::span<float> row(std::size_t i) {
        return std::span<float>(data_.data() + i * cols_, cols_);
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    bool same_shape(const DenseMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

    /// Throws validation_error if any stored value is NaN or infinite.
    void require_finite() const {
        for (float v : data_) {
            if (!std::isfinite(v)) {
                throw validation_error("matrix contains non-finite values");
            }
        }
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

/// Dense vector of 32-bit reals.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t len) : data_(len, 0.0f) {}
    explicit Vector(std::vector<float> data) : data_(std::move(data)) {}

    std::size_t size() const { return data_.size(); }
    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    void require_finite() const {
        for (float v : data_) {
            if (!std::isfinite(v)) {
                throw validation_error("vector contains non-finite values");
            }
        }
    }

private:
    std::vector<float> data_;
};

} // namespace dcom
