#include "asaukit/optimizer.hpp"

#include <cmath>

#include "asaukit/error.hpp"

namespace asaukit {

AdamState AdamState::for_store(const ParamStore& store, double lr, double weight_decay) {
  AdamState s;
  s.m.assign(store.size(), 0.0);
  s.v.assign(store.size(), 0.0);
  s.lr = lr;
  s.weight_decay = weight_decay;
  return s;
}

void adam_step(ParamStore& store, AdamState& state) {
  if (state.m.size() != store.size() || state.v.size() != store.size()) {
    throw PreconditionError("adam_step: optimizer state holds " + std::to_string(state.m.size()) +
                            " moments, store has " + std::to_string(store.size()) + " parameters");
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  const auto grads = store.grads();
  auto values = store.mutable_values();
  for (const auto& block : store.blocks()) {
    if (!block.trainable) continue;
    for (std::size_t i = block.offset; i < block.offset + block.size; ++i) {
      const double g = grads[i];
      values[i] -= state.lr * state.weight_decay * values[i];
      state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
      state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = state.m[i] / bc1;
      const double v_hat = state.v[i] / bc2;
      values[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace asaukit
