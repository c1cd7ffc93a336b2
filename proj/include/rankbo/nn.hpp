#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rankbo/matrix.hpp"

namespace rankbo {

enum class Activation : std::uint8_t { relu = 0, tanh = 1 };

/// Dense feed-forward network. Hidden layers use `hidden_activation`; the
/// last layer is affine.
///
/// Parameters live in one flat buffer so optimizers and finite-difference
/// checks can treat them uniformly. Layer l occupies
/// `[offset(l), offset(l) + out*in)` for its out x in row-major weight matrix,
/// followed directly by its `out` biases.
struct MlpParams {
    std::vector<std::size_t> layer_dims;
    Activation hidden_activation = Activation::relu;
    std::vector<double> values;

    std::size_t num_layers() const { return layer_dims.empty() ? 0 : layer_dims.size() - 1; }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }

    std::size_t offset(std::size_t layer) const;
    std::span<double> weights(std::size_t layer);
    std::span<const double> weights(std::size_t layer) const;
    std::span<double> biases(std::size_t layer);
    std::span<const double> biases(std::size_t layer) const;

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Number of scalar parameters for a given architecture.
std::size_t parameter_count(std::span<const std::size_t> layer_dims);

/// Forward activations: `activations[0]` is the input batch, `activations[l]`
/// the post-activation output of layer l.
struct MlpCache {
    std::vector<Matrix> activations;
};

/// Gradients in the same flat layout as MlpParams, summed over the batch,
/// plus the gradient with respect to every input row.
struct GradBundle {
    std::vector<std::size_t> layer_dims;
    std::vector<double> values;
    Matrix input_grad;

    static GradBundle zeros_like(const MlpParams& params);
    void accumulate(const GradBundle& other, double scale = 1.0);
};

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_params(const MlpParams& params);
};

/// Glorot-uniform weights, zero biases. Identical (dims, seed) pairs give
/// bit-identical parameters.
MlpParams mlp_init(std::span<const std::size_t> layer_dims, Activation hidden_activation, std::uint64_t seed);

struct MlpOutput {
    Matrix output;
    MlpCache cache;
};

MlpOutput mlp_forward(const MlpParams& params, const Matrix& inputs);
MlpOutput mlp_forward(const MlpParams& params, std::span<const double> input);

GradBundle mlp_backward(const MlpParams& params, const MlpCache& cache, const Matrix& output_grad);
GradBundle mlp_backward(const MlpParams& params, const MlpCache& cache, std::span<const double> output_grad);

/// One bias-corrected Adam update in place. A non-finite gradient throws
/// NumericError and leaves both `params` and `state` untouched.
void adam_step(MlpParams& params, const GradBundle& grads, AdamState& state, double lr);

/// "DRE1" header, layer dims, activation, then little-endian float64 values.
void write_mlp(std::ostream& out, const MlpParams& params);
MlpParams read_mlp(std::istream& in);

namespace detail {
void write_u32(std::ostream& out, std::uint32_t value);
void write_u64(std::ostream& out, std::uint64_t value);
void write_f64(std::ostream& out, double value);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
}  // namespace detail

}  // namespace rankbo
