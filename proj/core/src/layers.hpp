#pragma once

#include <memory>
#include <string>

#include "asaukit/network.hpp"
#include "asaukit/rng.hpp"

namespace asaukit::detail {

/// Stateless layer: configuration plus offsets into the owning ParamStore.
class Layer {
 public:
  virtual ~Layer() = default;

  const Shape& input_shape() const noexcept { return in_; }
  const Shape& output_shape() const noexcept { return out_; }

  virtual std::string describe() const = 0;
  virtual void initialize(ParamStore&, SplitMix64&) const {}
  virtual Tensor forward(const ParamStore& store, const Tensor& in, LayerCache& cache) const = 0;
  virtual Tensor backward(ParamStore& store, const LayerCache& cache, const Tensor& grad_out) const = 0;

 protected:
  Shape in_;
  Shape out_;
};

/// Builds layer `index` for per-sample input shape `in`, registering its parameters.
std::shared_ptr<const Layer> make_layer(const LayerSpec& spec, std::size_t index, const Shape& in,
                                        ParamStore& store);

}  // namespace asaukit::detail
