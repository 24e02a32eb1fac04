#pragma once

// Sequential layer stack with reverse-mode gradients.
//
// Tensors carry a leading batch dimension: dense layers see [N x D], spatial
// layers see [N x C x H x W]. A Network is built from a list of LayerSpec
// values plus the per-sample input shape; shape composition is checked at
// build time. All trainable scalars live in the network's ParamStore.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "asaukit/activation.hpp"
#include "asaukit/param_store.hpp"
#include "asaukit/tensor.hpp"

namespace asaukit {

struct DenseSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
};

/// 3x3 kernel, stride 1, zero padding 1.
struct Conv2dSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
};

/// Non-overlapping 2x2 max pooling; spatial dims must be even. The first
/// maximal element in row-major window order receives the gradient.
struct MaxPool2x2Spec {};

struct FlattenSpec {};

/// Nearest-neighbour 2x upsampling.
struct Upsample2xSpec {};

enum class Granularity { per_layer, per_channel };

struct AsauMask {
  bool a = false;
  bool b = false;
  bool alpha = true;
  bool beta = true;

  friend bool operator==(const AsauMask&, const AsauMask&) = default;
};

struct AsauActivation {
  AsauParams params;
  AsauMask trainable;
  Granularity granularity = Granularity::per_layer;
  /// Expected channel count for per-channel granularity; 0 takes it from the input.
  std::size_t channels = 0;
};

struct BaselineActivation {
  BaselineKind kind = Relu{};
  /// Registers the LeakyReLU/PReLU slope as a trainable parameter.
  bool slope_trainable = false;
};

using ActivationSpec = std::variant<BaselineActivation, AsauActivation>;

/// Short stable name used for roster labels ("relu", "asau", ...).
std::string activation_label(const ActivationSpec& spec);

struct ActivationLayerSpec {
  ActivationSpec activation;
};

using LayerSpec =
    std::variant<DenseSpec, Conv2dSpec, MaxPool2x2Spec, FlattenSpec, ActivationLayerSpec, Upsample2xSpec>;

/// Lower bound applied to ASAU alpha and beta by clamp_to_bounds during training.
inline constexpr double kAsauGainFloor = 1e-3;

/// Saved state of one layer's forward pass.
struct LayerCache {
  Tensor input;
  std::vector<std::uint32_t> argmax;  ///< pooling: winning input offset per output element
  std::vector<std::uint8_t> tied;     ///< pooling: 1 where the window maximum is not unique
};

struct ForwardCache {
  std::uint64_t network_id = 0;
  std::uint64_t param_version = 0;
  std::vector<LayerCache> layers;
};

struct ForwardResult {
  Tensor output;
  ForwardCache cache;
};

/// Scalar loss of a network output and its gradient w.r.t. that output.
struct LossResult {
  double loss = 0.0;
  Tensor grad;
};

namespace detail {
class Layer;
}

class Network {
 public:
  /// Throws ShapeError naming the first layer whose input shape does not fit.
  Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed = 0);

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  ~Network();

  /// Re-draws dense/conv weights (fan-in/fan-out scaled uniform) and zeroes biases.
  /// Activation parameters keep their spec values.
  void initialize(std::uint64_t seed);

  ForwardResult forward(const Tensor& input) const;
  Tensor predict(const Tensor& input) const;

  /// Zeroes all gradients, then accumulates d(loss)/d(param) for trainable
  /// parameters. Returns d(loss)/d(input).
  Tensor backward(const ForwardCache& cache, const Tensor& output_grad);

  ParamStore& params() noexcept { return store_; }
  const ParamStore& params() const noexcept { return store_; }

  const Shape& input_shape() const noexcept { return input_shape_; }
  const Shape& output_shape() const noexcept { return output_shape_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }

  /// One-line structure descriptor, stable across runs.
  std::string describe() const;

 private:
  std::uint64_t id_;
  Shape input_shape_;
  Shape output_shape_;
  std::vector<LayerSpec> specs_;
  std::vector<std::shared_ptr<const detail::Layer>> layers_;
  ParamStore store_;
};

using LossFn = std::function<LossResult(const Tensor& output)>;

struct GradCheckEntry {
  std::string name;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
  /// A pooling argmax changed (or a tie broke) under perturbation; the numeric
  /// derivative is not valid for this parameter.
  bool pooling_tie = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;  ///< sorted by descending rel_err

  /// True when every entry not flagged as a pooling tie has rel_err < tol.
  bool passed(double tol) const;
  std::size_t excluded() const;
};

/// Compares backward() against central differences with absolute step h on
/// every trainable parameter. rel_err = |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport numeric_grad_check(Network& network, const Tensor& input, const LossFn& loss_fn, double h);

/// Checkpoint text format: magic line `ASAUKIT-CKPT v1`, structure line,
/// parameter count, then one `name value` line per scalar (17 significant digits).
void save_checkpoint(std::ostream& out, const Network& network);
/// Throws FormatError on bad magic, structure mismatch or missing names.
void load_checkpoint(std::istream& in, Network& network);
void save_checkpoint(const std::string& path, const Network& network);
void load_checkpoint(const std::string& path, Network& network);

}  // namespace asaukit
