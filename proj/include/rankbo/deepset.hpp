#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rankbo/matrix.hpp"
#include "rankbo/nn.hpp"

namespace rankbo {

/// Observed (configuration, target) pairs. Row j of `x` pairs with `y[j]`.
struct SupportSet {
    Matrix x;
    std::vector<double> y;

    std::size_t size() const { return y.size(); }
    std::size_t dim() const { return x.cols; }

    /// Rows `indices` of this set, in the given order.
    SupportSet subset(std::span<const std::size_t> indices) const;
};

struct DeepSetLayout {
    std::vector<std::size_t> inner_hidden{32, 32};
    std::size_t inner_output = 32;
    std::vector<std::size_t> outer_hidden{32, 32};
    std::size_t output_dim = 16;

    friend bool operator==(const DeepSetLayout&, const DeepSetLayout&) = default;
};

/// z = outer( mean_j inner(x_j ++ y_j) )
struct DeepSetParams {
    MlpParams inner;
    MlpParams outer;

    std::size_t input_dim() const { return inner.input_dim() - 1; }
    std::size_t output_dim() const { return outer.output_dim(); }

    friend bool operator==(const DeepSetParams&, const DeepSetParams&) = default;
};

struct MetaFeatures {
    std::vector<double> z;
};

struct DeepSetCache {
    MlpCache inner;
    MlpCache outer;
    std::size_t count = 0;
};

struct DeepSetEncoding {
    MetaFeatures features;
    DeepSetCache cache;
};

struct DeepSetGrads {
    GradBundle inner;
    GradBundle outer;
};

DeepSetParams deepset_init(std::size_t x_dim, const DeepSetLayout& layout, Activation activation, std::uint64_t seed);

/// Elements are pooled in a canonical (lexicographic) order, so any
/// permutation of the same support produces bit-identical features.
DeepSetEncoding deepset_encode(const DeepSetParams& params, const SupportSet& support);

DeepSetGrads deepset_backward(const DeepSetParams& params, const DeepSetCache& cache, std::span<const double> z_grad);

}  // namespace rankbo
