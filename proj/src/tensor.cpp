#include "probeforge/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "probeforge/errors.hpp"

namespace probeforge {

namespace {

std::int64_t product(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 0) throw ShapeError("negative dimension in shape");
        n *= d;
    }
    return n;
}

void check_finite(const Tensor& t, const char* op) {
    for (float v : t.data) {
        if (!std::isfinite(v))
            throw NumericError(std::string(op) + " produced a non-finite value");
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::int64_t> shape_, std::vector<float> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (product(shape) != static_cast<std::int64_t>(data.size()))
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str());
}

Tensor Tensor::zeros(std::vector<std::int64_t> shape) {
    std::int64_t n = product(shape);
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(static_cast<std::size_t>(n), 0.0f);
    return t;
}

Tensor Tensor::identity(std::int64_t n) {
    Tensor t = zeros({n, n});
    for (std::int64_t i = 0; i < n; ++i) t.data[static_cast<std::size_t>(i * n + i)] = 1.0f;
    return t;
}

std::int64_t Tensor::numel() const {
    return static_cast<std::int64_t>(data.size());
}

std::int64_t Tensor::rows() const {
    if (shape.size() != 2) throw ShapeError("expected 2-D tensor, got " + shape_str());
    return shape[0];
}

std::int64_t Tensor::cols() const {
    if (shape.size() != 2) throw ShapeError("expected 2-D tensor, got " + shape_str());
    return shape[1];
}

float& Tensor::at(std::int64_t r, std::int64_t c) {
    return data[static_cast<std::size_t>(r * cols() + c)];
}

float Tensor::at(std::int64_t r, std::int64_t c) const {
    return data[static_cast<std::size_t>(r * cols() + c)];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Activation activation_from_name(std::string_view name) {
    if (name == "silu") return Activation::Silu;
    if (name == "gelu") return Activation::Gelu;
    if (name == "relu") return Activation::Relu;
    throw ConfigError("unknown activation kind: " + std::string(name) +
                      " (expected silu, gelu or relu)");
}

std::string activation_name(Activation kind) {
    switch (kind) {
        case Activation::Silu: return "silu";
        case Activation::Gelu: return "gelu";
        case Activation::Relu: return "relu";
    }
    throw ConfigError("invalid activation enum value");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2)
        throw ShapeError("matmul expects 2-D tensors, got " + a.shape_str() + " and " +
                         b.shape_str());
    const std::int64_t m = a.shape[0], k = a.shape[1];
    const std::int64_t k2 = b.shape[0], n = b.shape[1];
    if (k != k2)
        throw ShapeError("matmul inner dimensions disagree: " + a.shape_str() + " x " +
                         b.shape_str());

    Tensor out = Tensor::zeros({m, n});
    std::vector<double> acc(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* arow = a.data.data() + i * k;
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const double av = static_cast<double>(arow[kk]);
            if (av == 0.0) continue;  // zero rows/entries contribute nothing, bitwise
            const float* brow = b.data.data() + kk * n;
            for (std::int64_t j = 0; j < n; ++j) acc[static_cast<std::size_t>(j)] += av * static_cast<double>(brow[j]);
        }
        float* orow = out.data.data() + i * n;
        for (std::int64_t j = 0; j < n; ++j) orow[j] = static_cast<float>(acc[static_cast<std::size_t>(j)]);
    }
    check_finite(out, "matmul");
    return out;
}

Tensor masked_softmax_rows(const Tensor& scores, bool causal) {
    if (scores.ndim() != 2 || scores.shape[0] != scores.shape[1])
        throw ShapeError("masked_softmax_rows expects a square matrix, got " +
                         scores.shape_str());
    const std::int64_t t = scores.shape[0];
    if (t < 1) throw ShapeError("masked_softmax_rows expects T >= 1");

    Tensor out = Tensor::zeros({t, t});
    for (std::int64_t i = 0; i < t; ++i) {
        const std::int64_t visible = causal ? i + 1 : t;
        const float* srow = scores.data.data() + i * t;
        float* orow = out.data.data() + i * t;

        float row_max = srow[0];
        for (std::int64_t j = 1; j < visible; ++j) row_max = std::max(row_max, srow[j]);

        double denom = 0.0;
        for (std::int64_t j = 0; j < visible; ++j) {
            const float e = std::exp(srow[j] - row_max);
            orow[j] = e;
            denom += static_cast<double>(e);
        }
        for (std::int64_t j = 0; j < visible; ++j)
            orow[j] = static_cast<float>(static_cast<double>(orow[j]) / denom);
        // masked positions stay exactly 0
    }
    check_finite(out, "masked_softmax_rows");
    return out;
}

float silu(float x) {
    const double xd = static_cast<double>(x);
    return static_cast<float>(xd / (1.0 + std::exp(-xd)));
}

float gelu(float x) {
    const double xd = static_cast<double>(x);
    return static_cast<float>(0.5 * xd * (1.0 + std::erf(xd / std::sqrt(2.0))));
}

float relu(float x) {
    return x > 0.0f ? x : 0.0f;
}

Tensor activation(const Tensor& x, Activation kind) {
    Tensor out = x;
    switch (kind) {
        case Activation::Silu:
            for (float& v : out.data) v = silu(v);
            break;
        case Activation::Gelu:
            for (float& v : out.data) v = gelu(v);
            break;
        case Activation::Relu:
            for (float& v : out.data) v = relu(v);
            break;
    }
    check_finite(out, "activation");
    return out;
}

}  // namespace probeforge
