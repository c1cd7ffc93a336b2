#include "rankbo/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "rankbo/error.hpp"
#include "rankbo/random.hpp"

namespace rankbo {

namespace {

void check_dims(std::span<const std::size_t> dims) {
    if (dims.size() < 2) throw InvalidArchitectureError("MLP needs at least an input and an output dimension");
    for (std::size_t d : dims)
        if (d == 0) throw InvalidArchitectureError("MLP layer dimensions must be positive");
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

std::size_t parameter_count(std::span<const std::size_t> layer_dims) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) n += layer_dims[l + 1] * (layer_dims[l] + 1);
    return n;
}

std::size_t MlpParams::offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += layer_dims[l + 1] * (layer_dims[l] + 1);
    return off;
}

std::span<double> MlpParams::weights(std::size_t layer) {
    return {values.data() + offset(layer), layer_dims[layer + 1] * layer_dims[layer]};
}
std::span<const double> MlpParams::weights(std::size_t layer) const {
    return {values.data() + offset(layer), layer_dims[layer + 1] * layer_dims[layer]};
}
std::span<double> MlpParams::biases(std::size_t layer) {
    return {values.data() + offset(layer) + layer_dims[layer + 1] * layer_dims[layer], layer_dims[layer + 1]};
}
std::span<const double> MlpParams::biases(std::size_t layer) const {
    return {values.data() + offset(layer) + layer_dims[layer + 1] * layer_dims[layer], layer_dims[layer + 1]};
}

GradBundle GradBundle::zeros_like(const MlpParams& params) {
    GradBundle g;
    g.layer_dims = params.layer_dims;
    g.values.assign(params.values.size(), 0.0);
    return g;
}

void GradBundle::accumulate(const GradBundle& other, double scale) {
    if (other.values.size() != values.size()) throw ShapeError("GradBundle::accumulate: shape mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += scale * other.values[i];
}

AdamState AdamState::for_params(const MlpParams& params) {
    AdamState s;
    s.first_moment.assign(params.values.size(), 0.0);
    s.second_moment.assign(params.values.size(), 0.0);
    return s;
}

MlpParams mlp_init(std::span<const std::size_t> layer_dims, Activation hidden_activation, std::uint64_t seed) {
    check_dims(layer_dims);
    MlpParams p;
    p.layer_dims.assign(layer_dims.begin(), layer_dims.end());
    p.hidden_activation = hidden_activation;
    p.values.assign(parameter_count(layer_dims), 0.0);
    Rng rng(seed);
    for (std::size_t l = 0; l < p.num_layers(); ++l) {
        const double fan_in = static_cast<double>(layer_dims[l]);
        const double fan_out = static_cast<double>(layer_dims[l + 1]);
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : p.weights(l)) w = (2.0 * uniform01(rng) - 1.0) * bound;
    }
    return p;
}

MlpOutput mlp_forward(const MlpParams& params, const Matrix& inputs) {
    if (inputs.cols != params.input_dim())
        throw ShapeError("mlp_forward: input has " + std::to_string(inputs.cols) + " columns, network expects " +
                         std::to_string(params.input_dim()));
    if (!all_finite(inputs.data)) throw NumericError("mlp_forward: non-finite input");

    MlpOutput result;
    auto& acts = result.cache.activations;
    acts.reserve(params.num_layers() + 1);
    acts.push_back(inputs);
    const std::size_t batch = inputs.rows;
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        const std::size_t in = params.layer_dims[l];
        const std::size_t out = params.layer_dims[l + 1];
        const auto w = params.weights(l);
        const auto b = params.biases(l);
        const bool hidden = l + 1 < params.num_layers();
        Matrix next(batch, out);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* x = acts[l].data.data() + r * in;
            double* y = next.data.data() + r * out;
            for (std::size_t o = 0; o < out; ++o) {
                const double* wrow = w.data() + o * in;
                double acc = b[o];
                for (std::size_t i = 0; i < in; ++i) acc += wrow[i] * x[i];
                if (hidden) acc = params.hidden_activation == Activation::relu ? std::max(acc, 0.0) : std::tanh(acc);
                y[o] = acc;
            }
        }
        acts.push_back(std::move(next));
    }
    result.output = acts.back();
    return result;
}

MlpOutput mlp_forward(const MlpParams& params, std::span<const double> input) {
    Matrix m(1, input.size());
    std::copy(input.begin(), input.end(), m.data.begin());
    return mlp_forward(params, m);
}

GradBundle mlp_backward(const MlpParams& params, const MlpCache& cache, const Matrix& output_grad) {
    if (cache.activations.size() != params.num_layers() + 1)
        throw ShapeError("mlp_backward: cache does not match network depth");
    const std::size_t batch = cache.activations.front().rows;
    if (output_grad.cols != params.output_dim() || output_grad.rows != batch)
        throw ShapeError("mlp_backward: output gradient shape does not match network output");

    GradBundle grads = GradBundle::zeros_like(params);
    Matrix delta = output_grad;
    for (std::size_t l = params.num_layers(); l-- > 0;) {
        const std::size_t in = params.layer_dims[l];
        const std::size_t out = params.layer_dims[l + 1];
        const Matrix& a_in = cache.activations[l];
        const auto w = params.weights(l);
        const std::size_t off = params.offset(l);
        double* dw = grads.values.data() + off;
        double* db = dw + out * in;
        Matrix d_in(batch, in);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* x = a_in.data.data() + r * in;
            const double* d = delta.data.data() + r * out;
            double* dx = d_in.data.data() + r * in;
            for (std::size_t o = 0; o < out; ++o) {
                const double g = d[o];
                if (g == 0.0) continue;
                db[o] += g;
                double* dwrow = dw + o * in;
                const double* wrow = w.data() + o * in;
                for (std::size_t i = 0; i < in; ++i) {
                    dwrow[i] += g * x[i];
                    dx[i] += g * wrow[i];
                }
            }
        }
        if (l > 0) {
            // a_in is the post-activation output of the previous hidden layer.
            for (std::size_t k = 0; k < d_in.data.size(); ++k) {
                const double a = a_in.data[k];
                if (params.hidden_activation == Activation::relu)
                    d_in.data[k] = a > 0.0 ? d_in.data[k] : 0.0;
                else
                    d_in.data[k] *= 1.0 - a * a;
            }
        }
        delta = std::move(d_in);
    }
    grads.input_grad = std::move(delta);
    return grads;
}

GradBundle mlp_backward(const MlpParams& params, const MlpCache& cache, std::span<const double> output_grad) {
    Matrix m(1, output_grad.size());
    std::copy(output_grad.begin(), output_grad.end(), m.data.begin());
    return mlp_backward(params, cache, m);
}

void adam_step(MlpParams& params, const GradBundle& grads, AdamState& state, double lr) {
    if (!(lr > 0.0)) throw DomainError("adam_step: learning rate must be positive");
    if (grads.values.size() != params.values.size() || state.first_moment.size() != params.values.size() ||
        state.second_moment.size() != params.values.size())
        throw ShapeError("adam_step: parameter, gradient and state shapes differ");
    for (std::size_t i = 0; i < grads.values.size(); ++i)
        if (!std::isfinite(grads.values[i]))
            throw NumericError("adam_step: non-finite gradient at parameter " + std::to_string(i));

    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        const double g = grads.values[i];
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        params.values[i] -= lr * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
    }
}

namespace detail {

void write_u32(std::ostream& out, std::uint32_t value) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    out.write(bytes, 4);
}

void write_u64(std::ostream& out, std::uint64_t value) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    out.write(bytes, 8);
}

void write_f64(std::ostream& out, double value) { write_u64(out, std::bit_cast<std::uint64_t>(value)); }

std::uint32_t read_u32(std::istream& in) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw IoError("unexpected end of parameter stream");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("unexpected end of parameter stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

}  // namespace detail

void write_mlp(std::ostream& out, const MlpParams& params) {
    out.write("DRE1", 4);
    detail::write_u32(out, static_cast<std::uint32_t>(params.layer_dims.size()));
    for (std::size_t d : params.layer_dims) detail::write_u32(out, static_cast<std::uint32_t>(d));
    const char act = static_cast<char>(params.hidden_activation);
    out.write(&act, 1);
    for (double v : params.values) detail::write_f64(out, v);
}

MlpParams read_mlp(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != "DRE1") throw IoError("read_mlp: missing DRE1 header");
    const std::uint32_t n = detail::read_u32(in);
    if (n < 2 || n > 1024) throw IoError("read_mlp: implausible layer count");
    MlpParams p;
    for (std::uint32_t i = 0; i < n; ++i) p.layer_dims.push_back(detail::read_u32(in));
    check_dims(p.layer_dims);
    char act = 0;
    if (!in.read(&act, 1)) throw IoError("read_mlp: truncated header");
    if (act != 0 && act != 1) throw IoError("read_mlp: unknown activation");
    p.hidden_activation = static_cast<Activation>(act);
    p.values.resize(parameter_count(p.layer_dims));
    for (double& v : p.values) v = detail::read_f64(in);
    if (!all_finite(p.values)) throw NumericError("read_mlp: non-finite parameter");
    return p;
}

}  // namespace rankbo
