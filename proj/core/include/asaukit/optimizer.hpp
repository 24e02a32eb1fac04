#pragma once

#include <cstdint>
#include <vector>

#include "asaukit/param_store.hpp"

namespace asaukit {

/// Adam with decoupled weight decay. m and v are aligned with the ParamStore.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  static AdamState for_store(const ParamStore& store, double lr, double weight_decay = 0.0);
};

/// One update of every trainable parameter:
///   value <- value - lr * weight_decay * value
///   value <- value - lr * m_hat / (sqrt(v_hat) + eps)
/// Throws PreconditionError when the state is not aligned with the store.
void adam_step(ParamStore& store, AdamState& state);

}  // namespace asaukit
