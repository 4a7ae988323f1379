#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsgdm/core.hpp"

namespace rsgdm::mlp {

enum class Activation { tanh, relu };

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

/// Fully connected network; hidden layers use `activation`, the output layer
/// is softmax with mean cross-entropy.
struct MLPSpec {
  std::vector<std::size_t> layer_dims;
  Activation activation{Activation::tanh};

  void validate() const {
    if (layer_dims.size() < 2) throw std::invalid_argument("mlp: need at least input and output dims");
    for (auto d : layer_dims) {
      if (d == 0) throw std::invalid_argument("mlp: layer dims must be positive");
    }
  }

  std::size_t num_layers() const { return layer_dims.size() - 1; }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t num_classes() const { return layer_dims.back(); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) n += layer_dims[l] * layer_dims[l + 1] + layer_dims[l + 1];
    return n;
  }
};

/// Where a layer lives inside the flat parameter vector: an out x in
/// row-major weight block followed by the out-sized bias block.
struct LayerSlot {
  std::size_t in{};
  std::size_t out{};
  std::size_t weights{};
  std::size_t bias{};
};

inline std::vector<LayerSlot> layout(const MLPSpec& spec) {
  spec.validate();
  std::vector<LayerSlot> slots;
  std::size_t off = 0;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    LayerSlot s{spec.layer_dims[l], spec.layer_dims[l + 1], off, 0};
    off += s.in * s.out;
    s.bias = off;
    off += s.out;
    slots.push_back(s);
  }
  return slots;
}

struct MLPParams {
  ParamVector<double> values;
};

/// Per-layer (weights, bias) blocks, the unflattened view of MLPParams.
struct LayerBlocks {
  std::vector<double> weights;
  std::vector<double> bias;
};

inline std::vector<LayerBlocks> unpack(const MLPSpec& spec, const MLPParams& p) {
  const auto slots = layout(spec);
  rsgdm::detail::require_same_size(p.values.size(), spec.param_count(), "mlp unpack");
  std::vector<LayerBlocks> out;
  for (const auto& s : slots) {
    const auto* base = p.values.data();
    out.push_back({{base + s.weights, base + s.weights + s.in * s.out}, {base + s.bias, base + s.bias + s.out}});
  }
  return out;
}

inline MLPParams pack(const MLPSpec& spec, const std::vector<LayerBlocks>& blocks) {
  const auto slots = layout(spec);
  rsgdm::detail::require_same_size(blocks.size(), slots.size(), "mlp pack");
  MLPParams p{ParamVector<double>(spec.param_count())};
  for (std::size_t l = 0; l < slots.size(); ++l) {
    rsgdm::detail::require_same_size(blocks[l].weights.size(), slots[l].in * slots[l].out, "mlp pack weights");
    rsgdm::detail::require_same_size(blocks[l].bias.size(), slots[l].out, "mlp pack bias");
    std::copy(blocks[l].weights.begin(), blocks[l].weights.end(), p.values.begin() + static_cast<std::ptrdiff_t>(slots[l].weights));
    std::copy(blocks[l].bias.begin(), blocks[l].bias.end(), p.values.begin() + static_cast<std::ptrdiff_t>(slots[l].bias));
  }
  return p;
}

/// Weights ~ U(-sqrt(3/fan_in), sqrt(3/fan_in)) (variance 1/fan_in), biases zero.
inline MLPParams mlp_init(const MLPSpec& spec, std::uint64_t seed) {
  const auto slots = layout(spec);
  MLPParams p{ParamVector<double>(spec.param_count(), 0.0)};
  SplitMix64 rng(derive_seed(seed, 77));
  for (const auto& s : slots) {
    const double bound = std::sqrt(3.0 / static_cast<double>(s.in));
    for (std::size_t k = 0; k < s.in * s.out; ++k) p.values[s.weights + k] = rng.uniform(-bound, bound);
  }
  return p;
}

/// Activations kept from a forward pass. activations[0] is the input batch,
/// activations[l] the output of hidden layer l; logits are pre-softmax.
struct ForwardCache {
  std::size_t batch{};
  std::vector<std::vector<double>> activations;
  std::vector<double> logits;
};

struct ForwardResult {
  std::vector<double> probs;  // batch x classes, row-major
  ForwardCache cache;
};

inline ForwardResult mlp_forward(const MLPSpec& spec, const MLPParams& params,
                                 std::span<const double> batch_features) {
  const auto slots = layout(spec);
  rsgdm::detail::require_same_size(params.values.size(), spec.param_count(), "mlp_forward params");
  const std::size_t in0 = spec.input_dim();
  if (batch_features.empty() || batch_features.size() % in0 != 0) {
    throw ShapeError("mlp_forward: feature buffer is not a whole number of input rows");
  }
  ForwardResult res;
  auto& cache = res.cache;
  cache.batch = batch_features.size() / in0;
  cache.activations.emplace_back(batch_features.begin(), batch_features.end());

  const double* P = params.values.data();
  for (std::size_t l = 0; l < slots.size(); ++l) {
    const auto& s = slots[l];
    const auto& a = cache.activations.back();
    std::vector<double> z(cache.batch * s.out);
    for (std::size_t r = 0; r < cache.batch; ++r) {
      for (std::size_t o = 0; o < s.out; ++o) {
        double acc = P[s.bias + o];
        const double* w = P + s.weights + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) acc += w[i] * a[r * s.in + i];
        z[r * s.out + o] = acc;
      }
    }
    if (l + 1 == slots.size()) {
      cache.logits = std::move(z);
    } else {
      for (auto& v : z) v = spec.activation == Activation::tanh ? std::tanh(v) : std::max(v, 0.0);
      cache.activations.push_back(std::move(z));
    }
  }

  const std::size_t K = spec.num_classes();
  res.probs.resize(cache.batch * K);
  for (std::size_t r = 0; r < cache.batch; ++r) {
    const double* z = cache.logits.data() + r * K;
    const double zmax = *std::max_element(z, z + K);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += (res.probs[r * K + k] = std::exp(z[k] - zmax));
    for (std::size_t k = 0; k < K; ++k) res.probs[r * K + k] /= sum;
  }
  return res;
}

namespace detail {

inline void check_labels(const MLPSpec& spec, const ForwardCache& cache, std::span<const int> labels) {
  rsgdm::detail::require_same_size(labels.size(), cache.batch, "mlp labels");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes()) {
      throw std::out_of_range("mlp: label " + std::to_string(y) + " out of range");
    }
  }
}

}  // namespace detail

/// Mean cross-entropy from cached logits (log-sum-exp form).
inline double mlp_loss(const MLPSpec& spec, const ForwardCache& cache, std::span<const int> labels) {
  detail::check_labels(spec, cache, labels);
  const std::size_t K = spec.num_classes();
  double total = 0.0;
  for (std::size_t r = 0; r < cache.batch; ++r) {
    const double* z = cache.logits.data() + r * K;
    const double zmax = *std::max_element(z, z + K);
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(z[k] - zmax);
    total += zmax + std::log(sum) - z[labels[r]];
  }
  return total / static_cast<double>(cache.batch);
}

inline double mlp_accuracy(const MLPSpec& spec, const ForwardResult& fwd, std::span<const int> labels) {
  detail::check_labels(spec, fwd.cache, labels);
  const std::size_t K = spec.num_classes();
  std::size_t correct = 0;
  for (std::size_t r = 0; r < fwd.cache.batch; ++r) {
    const double* p = fwd.probs.data() + r * K;
    const auto pred = static_cast<std::size_t>(std::max_element(p, p + K) - p);
    correct += pred == static_cast<std::size_t>(labels[r]);
  }
  return static_cast<double>(correct) / static_cast<double>(fwd.cache.batch);
}

/// Gradient of the mean cross-entropy, in MLPParams layout. `probs` must come
/// from the same forward pass as `cache`.
inline ParamVector<double> mlp_backward(const MLPSpec& spec, const MLPParams& params, const ForwardResult& fwd,
                                        std::span<const int> labels) {
  const auto slots = layout(spec);
  const auto& cache = fwd.cache;
  detail::check_labels(spec, cache, labels);
  if (cache.activations.size() != slots.size() || fwd.probs.size() != cache.batch * spec.num_classes()) {
    throw ShapeError("mlp_backward: cache does not match spec");
  }
  const std::size_t B = cache.batch;
  const double inv_b = 1.0 / static_cast<double>(B);
  const double* P = params.values.data();
  ParamVector<double> grad(spec.param_count(), 0.0);

  // dL/dlogits = (p - onehot) / B
  std::vector<double> delta(fwd.probs);
  const std::size_t K = spec.num_classes();
  for (std::size_t r = 0; r < B; ++r) {
    delta[r * K + static_cast<std::size_t>(labels[r])] -= 1.0;
  }
  for (auto& v : delta) v *= inv_b;

  for (std::size_t l = slots.size(); l-- > 0;) {
    const auto& s = slots[l];
    const auto& a = cache.activations[l];
    for (std::size_t r = 0; r < B; ++r) {
      for (std::size_t o = 0; o < s.out; ++o) {
        const double d = delta[r * s.out + o];
        grad[s.bias + o] += d;
        double* gw = grad.data() + s.weights + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) gw[i] += d * a[r * s.in + i];
      }
    }
    if (l == 0) break;
    std::vector<double> prev(B * s.in, 0.0);
    for (std::size_t r = 0; r < B; ++r) {
      for (std::size_t o = 0; o < s.out; ++o) {
        const double d = delta[r * s.out + o];
        const double* w = P + s.weights + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) prev[r * s.in + i] += d * w[i];
      }
    }
    for (std::size_t k = 0; k < prev.size(); ++k) {
      const double act = a[k];
      prev[k] *= spec.activation == Activation::tanh ? 1.0 - act * act : (act > 0 ? 1.0 : 0.0);
    }
    delta = std::move(prev);
  }
  return grad;
}

// Binary parameter file: "RSGDM1", u64 layer-dim count, u64 dims, then the
// flat parameters as f64. All integers and floats little-endian.

inline constexpr std::array<char, 6> kParamMagic{'R', 'S', 'G', 'D', 'M', '1'};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw std::runtime_error("mlp params: truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace detail

inline void save_params(std::ostream& os, const MLPSpec& spec, const MLPParams& params) {
  rsgdm::detail::require_same_size(params.values.size(), spec.param_count(), "save_params");
  os.write(kParamMagic.data(), kParamMagic.size());
  detail::put_u64(os, spec.layer_dims.size());
  for (auto d : spec.layer_dims) detail::put_u64(os, d);
  for (double v : params.values) detail::put_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw std::runtime_error("mlp params: write failed");
}

/// Reads dims and values; the activation is not stored and stays as given.
inline std::pair<MLPSpec, MLPParams> load_params(std::istream& is, Activation activation = Activation::tanh) {
  std::array<char, 6> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kParamMagic) {
    throw std::runtime_error("mlp params: bad magic");
  }
  const auto count = detail::get_u64(is);
  if (count < 2 || count > 4096) throw std::runtime_error("mlp params: implausible layer count");
  MLPSpec spec;
  spec.activation = activation;
  for (std::uint64_t i = 0; i < count; ++i) spec.layer_dims.push_back(static_cast<std::size_t>(detail::get_u64(is)));
  spec.validate();
  MLPParams p{ParamVector<double>(spec.param_count())};
  for (auto& v : p.values) v = std::bit_cast<double>(detail::get_u64(is));
  return {spec, p};
}

}  // namespace rsgdm::mlp
