#include "asaukit/losses.hpp"

#include <algorithm>
#include <cmath>

#include "asaukit/activation.hpp"
#include "asaukit/error.hpp"

namespace asaukit {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

}  // namespace

LossResult softmax_ce_loss(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw ShapeError("softmax_ce_loss: logits must be [N x K], got " + shape_to_string(logits.shape()));
  const std::size_t n = logits.dim(0);
  const std::size_t k = logits.dim(1);
  if (labels.size() != n) throw ShapeError("softmax_ce_loss: label count does not match batch size");

  LossResult r{0.0, Tensor(logits.shape())};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw PreconditionError("softmax_ce_loss: label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
    }
    const double* row = logits.data().data() + i * k;
    const double mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(row[j] - mx);
    const double lse = mx + std::log(sum);
    r.loss += (lse - row[label]) * inv_n;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(row[j] - lse);
      r.grad[i * k + j] = (p - (static_cast<std::size_t>(label) == j ? 1.0 : 0.0)) * inv_n;
    }
  }
  return r;
}

LossResult bce_loss(const Tensor& probs, const Tensor& targets) {
  require_same_shape(probs, targets, "bce_loss");
  const double inv_n = 1.0 / static_cast<double>(probs.size());
  LossResult r{0.0, Tensor(probs.shape())};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = clamp_prob(probs[i]);
    const double t = targets[i];
    r.loss -= (t * std::log(p) + (1.0 - t) * std::log1p(-p)) * inv_n;
    r.grad[i] = (-t / p + (1.0 - t) / (1.0 - p)) * inv_n;
  }
  return r;
}

LossResult soft_dice_loss(const Tensor& probs, const Tensor& targets, double smooth) {
  require_same_shape(probs, targets, "soft_dice_loss");
  double inter = 0.0;
  double sum_p = 0.0;
  double sum_t = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    inter += probs[i] * targets[i];
    sum_p += probs[i];
    sum_t += targets[i];
  }
  const double num = 2.0 * inter + smooth;
  const double den = sum_p + sum_t + smooth;
  LossResult r{1.0 - num / den, Tensor(probs.shape())};
  // d/dp_i of -num/den = -(2 t_i * den - num) / den^2
  const double den2 = den * den;
  for (std::size_t i = 0; i < probs.size(); ++i) r.grad[i] = -(2.0 * targets[i] * den - num) / den2;
  return r;
}

LossResult combined_loss(const Tensor& probs, const Tensor& targets) {
  LossResult bce = bce_loss(probs, targets);
  const LossResult dice = soft_dice_loss(probs, targets);
  bce.loss += dice.loss;
  for (std::size_t i = 0; i < bce.grad.size(); ++i) bce.grad[i] += dice.grad[i];
  return bce;
}

Tensor sigmoid(const Tensor& logits) {
  Tensor p(logits.shape());
  for (std::size_t i = 0; i < logits.size(); ++i) p[i] = stable_sigmoid(logits[i]);
  return p;
}

LossResult mask_loss_from_logits(const Tensor& logits, const Tensor& targets, MaskLoss loss) {
  const Tensor probs = sigmoid(logits);
  LossResult r;
  switch (loss) {
    case MaskLoss::bce: r = bce_loss(probs, targets); break;
    case MaskLoss::soft_dice: r = soft_dice_loss(probs, targets); break;
    case MaskLoss::bce_dice: r = combined_loss(probs, targets); break;
  }
  for (std::size_t i = 0; i < probs.size(); ++i) r.grad[i] *= probs[i] * (1.0 - probs[i]);
  return r;
}

}  // namespace asaukit
