#include <algorithm>
#include <atomic>
#include <cmath>

#include "asaukit/error.hpp"
#include "asaukit/network.hpp"
#include "layers.hpp"

namespace asaukit {

namespace {

std::uint64_t next_network_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string activation_label(const ActivationSpec& spec) {
  return std::visit(Overloaded{[](const BaselineActivation& b) { return baseline_name(b.kind); },
                               [](const AsauActivation&) { return std::string("asau"); }},
                    spec);
}

Network::Network(Shape input_shape, std::vector<LayerSpec> specs, std::uint64_t seed)
    : id_(next_network_id()), input_shape_(std::move(input_shape)), specs_(std::move(specs)) {
  if (specs_.empty()) throw PreconditionError("network needs at least one layer");
  if (input_shape_.empty() || shape_volume(input_shape_) == 0) {
    throw ShapeError("network input shape must be nonempty with positive dims");
  }
  Shape current = input_shape_;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    layers_.push_back(detail::make_layer(specs_[i], i, current, store_));
    current = layers_.back()->output_shape();
  }
  output_shape_ = current;
  initialize(seed);
}

Network::Network(const Network& other)
    : id_(next_network_id()),
      input_shape_(other.input_shape_),
      output_shape_(other.output_shape_),
      specs_(other.specs_),
      layers_(other.layers_),
      store_(other.store_) {}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    id_ = next_network_id();
    input_shape_ = other.input_shape_;
    output_shape_ = other.output_shape_;
    specs_ = other.specs_;
    layers_ = other.layers_;
    store_ = other.store_;
  }
  return *this;
}

Network::~Network() = default;

void Network::initialize(std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (const auto& layer : layers_) layer->initialize(store_, rng);
}

ForwardResult Network::forward(const Tensor& input) const {
  const auto& shape = input.shape();
  if (shape.size() != input_shape_.size() + 1 || !std::equal(input_shape_.begin(), input_shape_.end(), shape.begin() + 1)) {
    throw ShapeError("layer 0: expected input [N]" + shape_to_string(input_shape_) + ", got " + shape_to_string(shape));
  }
  ForwardResult result;
  result.cache.network_id = id_;
  result.cache.param_version = store_.version();
  result.cache.layers.resize(layers_.size());
  Tensor x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) x = layers_[i]->forward(store_, x, result.cache.layers[i]);
  result.output = std::move(x);
  return result;
}

Tensor Network::predict(const Tensor& input) const { return forward(input).output; }

Tensor Network::backward(const ForwardCache& cache, const Tensor& output_grad) {
  if (cache.network_id != id_ || cache.layers.size() != layers_.size()) {
    throw StaleCacheError("backward: cache was produced by a different network");
  }
  if (cache.param_version != store_.version()) {
    throw StaleCacheError("backward: parameters changed since the forward pass that produced this cache");
  }
  const std::size_t batch = cache.layers.front().input.dim(0);
  Shape expected{batch};
  expected.insert(expected.end(), output_shape_.begin(), output_shape_.end());
  if (output_grad.shape() != expected) {
    throw ShapeError("backward: output gradient " + shape_to_string(output_grad.shape()) + " does not match output " +
                     shape_to_string(expected));
  }
  store_.zero_grads();
  Tensor g = output_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(store_, cache.layers[i], g);
  return g;
}

std::string Network::describe() const {
  std::string s = "input=" + shape_to_string(input_shape_);
  for (const auto& layer : layers_) s += ";" + layer->describe();
  return s;
}

bool GradCheckReport::passed(double tol) const {
  return std::all_of(entries.begin(), entries.end(),
                     [tol](const GradCheckEntry& e) { return e.pooling_tie || e.rel_err < tol; });
}

std::size_t GradCheckReport::excluded() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const GradCheckEntry& e) { return e.pooling_tie; }));
}

namespace {

struct PoolSignature {
  std::vector<std::uint32_t> argmax;
  std::vector<std::uint8_t> tied;

  friend bool operator==(const PoolSignature&, const PoolSignature&) = default;
};

PoolSignature pool_signature(const ForwardCache& cache) {
  PoolSignature sig;
  for (const auto& l : cache.layers) {
    sig.argmax.insert(sig.argmax.end(), l.argmax.begin(), l.argmax.end());
    sig.tied.insert(sig.tied.end(), l.tied.begin(), l.tied.end());
  }
  return sig;
}

}  // namespace

GradCheckReport numeric_grad_check(Network& network, const Tensor& input, const LossFn& loss_fn, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("numeric_grad_check: step h must be > 0");

  auto base = network.forward(input);
  const auto base_sig = pool_signature(base.cache);
  const LossResult base_loss = loss_fn(base.output);
  network.backward(base.cache, base_loss.grad);

  auto& store = network.params();
  const std::vector<double> analytic(store.grads().begin(), store.grads().end());

  GradCheckReport report;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!store.trainable(i)) continue;
    const double original = store.values()[i];

    store.set_value(i, original + h);
    auto plus = network.forward(input);
    const double lp = loss_fn(plus.output).loss;
    store.set_value(i, original - h);
    auto minus = network.forward(input);
    const double lm = loss_fn(minus.output).loss;
    store.set_value(i, original);

    GradCheckEntry e;
    e.name = store.name(i);
    e.analytic = analytic[i];
    e.numeric = (lp - lm) / (2.0 * h);
    e.rel_err = std::abs(e.analytic - e.numeric) / std::max({std::abs(e.analytic), std::abs(e.numeric), 1e-8});
    e.pooling_tie = !(pool_signature(plus.cache) == base_sig) || !(pool_signature(minus.cache) == base_sig);
    report.entries.push_back(std::move(e));
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const GradCheckEntry& a, const GradCheckEntry& b) { return a.rel_err > b.rel_err; });
  return report;
}

}  // namespace asaukit
