#include <doctest.h>

#include <cmath>
#include <random>

#include "probeforge/errors.hpp"
#include "probeforge/tensor.hpp"

using namespace probeforge;

namespace {

Tensor random_tensor(std::int64_t rows, std::int64_t cols, std::mt19937& rng) {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    Tensor t = Tensor::zeros({rows, cols});
    for (float& v : t.data) v = dist(rng);
    return t;
}

// independent triple-loop oracle
std::vector<double> naive_matmul(const Tensor& a, const Tensor& b) {
    std::vector<double> out(static_cast<std::size_t>(a.rows() * b.cols()), 0.0);
    for (std::int64_t i = 0; i < a.rows(); ++i)
        for (std::int64_t j = 0; j < b.cols(); ++j)
            for (std::int64_t k = 0; k < a.cols(); ++k)
                out[static_cast<std::size_t>(i * b.cols() + j)] +=
                    static_cast<double>(a.at(i, k)) * static_cast<double>(b.at(k, j));
    return out;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
    Tensor t = Tensor::zeros({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.shape_str() == "[2x3]");
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0f, 2.0f}), ShapeError);
}

TEST_CASE("matmul identity and hand arithmetic") {
    const Tensor m({2, 2}, {1, 2, 3, 4});
    const Tensor out = matmul(Tensor::identity(2), m);
    CHECK(out.data == m.data);

    const Tensor a({1, 2}, {1, 2});
    const Tensor b({2, 1}, {3, 4});
    const Tensor c = matmul(a, b);
    CHECK(c.shape == std::vector<std::int64_t>{1, 1});
    CHECK(c.data[0] == doctest::Approx(11.0));
}

TEST_CASE("matmul dimension mismatch names both shapes") {
    const Tensor a = Tensor::zeros({2, 3});
    const Tensor b = Tensor::zeros({4, 2});
    CHECK_THROWS_WITH_AS(matmul(a, b),
                         "matmul inner dimensions disagree: [2x3] x [4x2]", ShapeError);
}

TEST_CASE("matmul matches the naive triple-loop oracle") {
    std::mt19937 rng(7);
    const Tensor a = random_tensor(7, 5, rng);
    const Tensor b = random_tensor(5, 3, rng);
    const Tensor out = matmul(a, b);
    const std::vector<double> expect = naive_matmul(a, b);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        CHECK(std::fabs(static_cast<double>(out.data[i]) - expect[i]) < 1e-6);
}

TEST_CASE("matmul associativity within 1e-4") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const Tensor a = random_tensor(4, 6, rng);
        const Tensor b = random_tensor(6, 5, rng);
        const Tensor c = random_tensor(5, 3, rng);
        const Tensor left = matmul(matmul(a, b), c);
        const Tensor right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.data.size(); ++i)
            CHECK(std::fabs(left.data[i] - right.data[i]) < 1e-4);
    }
}

TEST_CASE("kernels are bit-deterministic across repeated calls") {
    std::mt19937 rng(13);
    const Tensor a = random_tensor(6, 6, rng);
    const Tensor b = random_tensor(6, 6, rng);
    CHECK(matmul(a, b).data == matmul(a, b).data);
    CHECK(masked_softmax_rows(a, true).data == masked_softmax_rows(a, true).data);
    CHECK(activation(a, Activation::Silu).data == activation(a, Activation::Silu).data);
}

TEST_CASE("masked softmax: equal scores, single position, direct values") {
    Tensor scores = Tensor::zeros({5, 5});
    const Tensor out = masked_softmax_rows(scores, true);
    for (std::int64_t j = 0; j <= 3; ++j) CHECK(out.at(3, j) == doctest::Approx(0.25));
    CHECK(out.at(3, 4) == 0.0f);

    const Tensor single = masked_softmax_rows(Tensor({1, 1}, {42.0f}), true);
    CHECK(single.data[0] == 1.0f);

    const Tensor two = masked_softmax_rows(Tensor({2, 2}, {0, 0, 1.0f, 2.0f}), false);
    CHECK(two.at(1, 0) == doctest::Approx(0.2689).epsilon(1e-3));
    CHECK(two.at(1, 1) == doctest::Approx(0.7311).epsilon(1e-3));
}

TEST_CASE("masked softmax rows are distributions and causal zeros are exact") {
    std::mt19937 rng(17);
    const Tensor scores = random_tensor(9, 9, rng);
    const Tensor out = masked_softmax_rows(scores, true);
    for (std::int64_t i = 0; i < 9; ++i) {
        double sum = 0.0;
        for (std::int64_t j = 0; j < 9; ++j) {
            const float v = out.at(i, j);
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
            if (j > i) CHECK(v == 0.0f);
            sum += static_cast<double>(v);
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-6);
    }
    CHECK_THROWS_AS(masked_softmax_rows(Tensor::zeros({2, 3}), true), ShapeError);
}

TEST_CASE("activation examples") {
    const Tensor x({3}, {-1.0f, 0.0f, 2.0f});
    const Tensor r = activation(x, Activation::Relu);
    CHECK(r.data == std::vector<float>{0.0f, 0.0f, 2.0f});

    CHECK(silu(0.0f) == 0.0f);
    CHECK(silu(1.0f) == doctest::Approx(0.7311).epsilon(1e-3));
    CHECK(gelu(0.0f) == 0.0f);

    CHECK_THROWS_AS(activation_from_name("swiglu"), ConfigError);
    CHECK(activation_from_name("gelu") == Activation::Gelu);
    CHECK(activation_name(Activation::Silu) == "silu");
}
