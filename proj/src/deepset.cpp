#include "rankbo/deepset.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "rankbo/error.hpp"
#include "rankbo/random.hpp"

namespace rankbo {

SupportSet SupportSet::subset(std::span<const std::size_t> indices) const {
    SupportSet out;
    out.x = Matrix(indices.size(), x.cols);
    out.y.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto src = x.row(indices[k]);
        std::copy(src.begin(), src.end(), out.x.row(k).begin());
        out.y.push_back(y[indices[k]]);
    }
    return out;
}

DeepSetParams deepset_init(std::size_t x_dim, const DeepSetLayout& layout, Activation activation, std::uint64_t seed) {
    std::vector<std::size_t> inner{x_dim + 1};
    inner.insert(inner.end(), layout.inner_hidden.begin(), layout.inner_hidden.end());
    inner.push_back(layout.inner_output);
    std::vector<std::size_t> outer{layout.inner_output};
    outer.insert(outer.end(), layout.outer_hidden.begin(), layout.outer_hidden.end());
    outer.push_back(layout.output_dim);
    return {mlp_init(inner, activation, split_seed(seed, 0)), mlp_init(outer, activation, split_seed(seed, 1))};
}

namespace {

// Strict total order on (x, y) rows: numeric first, bit pattern to separate
// values that compare equal but differ in representation (e.g. -0.0 and 0.0).
bool row_less(const Matrix& m, std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < m.cols; ++c) {
        const double u = m(a, c);
        const double v = m(b, c);
        if (u < v) return true;
        if (v < u) return false;
        const auto ub = std::bit_cast<std::uint64_t>(u);
        const auto vb = std::bit_cast<std::uint64_t>(v);
        if (ub != vb) return ub < vb;
    }
    return false;
}

}  // namespace

DeepSetEncoding deepset_encode(const DeepSetParams& params, const SupportSet& support) {
    if (support.size() == 0) throw EmptySupportError("deepset_encode: support set is empty");
    if (support.x.rows != support.y.size()) throw ShapeError("deepset_encode: x rows and y length differ");
    if (support.dim() != params.input_dim())
        throw ShapeError("deepset_encode: support dimension " + std::to_string(support.dim()) + ", encoder expects " +
                         std::to_string(params.input_dim()));

    const std::size_t m = support.size();
    const std::size_t d = support.dim();
    Matrix rows(m, d + 1);
    for (std::size_t j = 0; j < m; ++j) {
        const auto x = support.x.row(j);
        std::copy(x.begin(), x.end(), rows.row(j).begin());
        rows(j, d) = support.y[j];
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row_less(rows, a, b); });
    Matrix canonical(m, d + 1);
    for (std::size_t k = 0; k < m; ++k) {
        const auto src = rows.row(order[k]);
        std::copy(src.begin(), src.end(), canonical.row(k).begin());
    }

    DeepSetEncoding enc;
    auto inner = mlp_forward(params.inner, canonical);
    const std::size_t h = params.inner.output_dim();
    Matrix pooled(1, h);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t c = 0; c < h; ++c) pooled(0, c) += inner.output(k, c);
    const double inv = 1.0 / static_cast<double>(m);
    for (double& v : pooled.data) v *= inv;

    auto outer = mlp_forward(params.outer, pooled);
    enc.features.z = outer.output.data;
    enc.cache.inner = std::move(inner.cache);
    enc.cache.outer = std::move(outer.cache);
    enc.cache.count = m;
    return enc;
}

DeepSetGrads deepset_backward(const DeepSetParams& params, const DeepSetCache& cache, std::span<const double> z_grad) {
    if (z_grad.size() != params.output_dim()) throw ShapeError("deepset_backward: z gradient has wrong length");
    if (cache.count == 0) throw ShapeError("deepset_backward: cache is empty");
    DeepSetGrads grads;
    grads.outer = mlp_backward(params.outer, cache.outer, z_grad);
    // Mean pooling: every element receives the pooled gradient scaled by 1/M.
    const std::size_t h = params.inner.output_dim();
    Matrix inner_grad(cache.count, h);
    const double inv = 1.0 / static_cast<double>(cache.count);
    for (std::size_t k = 0; k < cache.count; ++k)
        for (std::size_t c = 0; c < h; ++c) inner_grad(k, c) = grads.outer.input_grad(0, c) * inv;
    grads.inner = mlp_backward(params.inner, cache.inner, inner_grad);
    return grads;
}

}  // namespace rankbo
