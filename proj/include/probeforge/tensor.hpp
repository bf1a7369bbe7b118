#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace probeforge {

// Dense row-major f32 tensor. The only storage type in the workbench;
// matmul accumulates in f64 so repeated runs are bit-identical and drift
// stays bounded at desk scale.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<std::int64_t> shape_, std::vector<float> data_);

    static Tensor zeros(std::vector<std::int64_t> shape);
    static Tensor identity(std::int64_t n);

    std::int64_t numel() const;
    std::int64_t ndim() const { return static_cast<std::int64_t>(shape.size()); }

    // 2-D accessors; throw ShapeError if the tensor is not 2-D.
    std::int64_t rows() const;
    std::int64_t cols() const;
    float& at(std::int64_t r, std::int64_t c);
    float at(std::int64_t r, std::int64_t c) const;

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    std::string shape_str() const;
};

enum class Activation { Silu, Gelu, Relu };

Activation activation_from_name(std::string_view name);
std::string activation_name(Activation kind);

// a[m×k] × b[k×n] -> [m×n]. Throws ShapeError naming both shapes on a
// dimension mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

// Row-wise softmax over a square score matrix. With causal=true, entries
// (i, j) for j > i are exactly 0 after normalization and each row is a
// distribution over positions <= i. Max-subtracted for stability.
Tensor masked_softmax_rows(const Tensor& scores, bool causal);

// Elementwise activation, shape preserved.
Tensor activation(const Tensor& x, Activation kind);

float silu(float x);
float gelu(float x);
float relu(float x);

}  // namespace probeforge
