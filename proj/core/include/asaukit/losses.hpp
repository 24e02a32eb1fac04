#pragma once

#include <span>

#include "asaukit/network.hpp"
#include "asaukit/tensor.hpp"

namespace asaukit {

/// Probabilities fed to the binary losses are clamped into [kProbFloor, 1 - kProbFloor].
inline constexpr double kProbFloor = 1e-7;

/// Mean negative log-likelihood of rows of [N x K] logits (stable log-sum-exp).
LossResult softmax_ce_loss(const Tensor& logits, std::span<const int> labels);

/// Mean elementwise binary cross-entropy. The gradient is evaluated at the
/// clamped probability.
LossResult bce_loss(const Tensor& probs, const Tensor& targets);

/// 1 - (2*sum(p*t) + smooth) / (sum(p) + sum(t) + smooth) over all elements.
LossResult soft_dice_loss(const Tensor& probs, const Tensor& targets, double smooth = 1.0);

/// bce_loss + soft_dice_loss with unit weights.
LossResult combined_loss(const Tensor& probs, const Tensor& targets);

enum class MaskLoss { bce, soft_dice, bce_dice };

/// Applies the logistic function to logits, evaluates `loss` on the resulting
/// probabilities and returns the gradient w.r.t. the logits.
LossResult mask_loss_from_logits(const Tensor& logits, const Tensor& targets, MaskLoss loss);

Tensor sigmoid(const Tensor& logits);

}  // namespace asaukit
