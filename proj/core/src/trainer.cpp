#include "asaukit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>

#include "asaukit/approximation.hpp"
#include "asaukit/error.hpp"
#include "asaukit/metrics.hpp"
#include "asaukit/optimizer.hpp"
#include "asaukit/rng.hpp"

namespace asaukit {

namespace {

constexpr std::size_t kEvalBatch = 64;

// Runs `fn(rows)` over consecutive index ranges of at most `batch` rows.
void for_each_batch(std::size_t n, std::size_t batch, const std::function<void(std::span<const std::size_t>)>& fn) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t start = 0; start < n; start += batch) {
    fn(std::span<const std::size_t>(idx).subspan(start, std::min(batch, n - start)));
  }
}

Tensor predict_batched(const Network& network, const Tensor& inputs) {
  const std::size_t n = inputs.dim(0);
  Shape out_shape{n};
  out_shape.insert(out_shape.end(), network.output_shape().begin(), network.output_shape().end());
  Tensor out(out_shape);
  std::size_t written = 0;
  for_each_batch(n, kEvalBatch, [&](std::span<const std::size_t> rows) {
    const Tensor part = network.predict(inputs.gather_rows(rows));
    std::copy(part.data().begin(), part.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(written));
    written += part.size();
  });
  return out;
}

// batch_loss(rows) returns the loss of the listed training rows after running
// forward + backward; the optimizer step happens here.
TrainResult run_loop(Network& network, std::size_t n_train, const TrainConfig& config,
                     const std::function<LossResult(std::span<const std::size_t>, ForwardCache&)>& batch_loss,
                     const std::function<double()>& val_metric) {
  SplitMix64 rng(config.seed);
  AdamState adam = AdamState::for_store(network.params(), config.lr, config.weight_decay);
  std::vector<double> best_values(network.params().values().begin(), network.params().values().end());

  TrainResult result;
  double best = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    auto order = permutation(n_train, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train && !result.diverged; start += config.batch_size) {
      const auto rows = std::span<const std::size_t>(order).subspan(start, std::min(config.batch_size, n_train - start));
      ForwardCache cache;
      const LossResult lr = batch_loss(rows, cache);
      if (!std::isfinite(lr.loss)) {
        result.diverged = true;
        break;
      }
      loss_sum += lr.loss * static_cast<double>(rows.size());
      network.backward(cache, lr.grad);
      adam_step(network.params(), adam);
      network.params().clamp_to_bounds();
    }
    if (result.diverged) break;

    const double metric = val_metric();
    result.history.push_back({epoch, loss_sum / static_cast<double>(n_train), metric});
    if (metric > best) {
      best = metric;
      result.best_epoch = epoch;
      result.best_val_metric = metric;
      best_values.assign(network.params().values().begin(), network.params().values().end());
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }

  auto values = network.params().mutable_values();
  std::copy(best_values.begin(), best_values.end(), values.begin());
  return result;
}

template <class Set>
void require_nonempty(const Splits<Set>& data) {
  if (data.train.size() == 0 || data.val.size() == 0 || data.test.size() == 0) {
    throw PreconditionError("train_loop: train, validation and test splits must all be nonempty");
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (max_epochs < 1) throw PreconditionError("max_epochs must be >= 1");
  if (batch_size < 1) throw PreconditionError("batch_size must be >= 1");
  if (patience < 1) throw PreconditionError("patience must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw PreconditionError("lr must be finite and > 0");
  if (!(weight_decay >= 0.0)) throw PreconditionError("weight_decay must be >= 0");
  SplitSpec{split, seed}.validate();
}

TrainResult train_loop(Network& network, const Splits<LabeledSet>& data, const TrainConfig& config) {
  config.validate();
  require_nonempty(data);
  const LabeledSet& train = data.train;
  return run_loop(
      network, train.size(), config,
      [&](std::span<const std::size_t> rows, ForwardCache& cache) {
        auto fr = network.forward(train.features.gather_rows(rows));
        std::vector<int> labels;
        labels.reserve(rows.size());
        for (auto r : rows) labels.push_back(train.labels[r]);
        cache = std::move(fr.cache);
        return softmax_ce_loss(fr.output, labels);
      },
      [&] { return evaluate_accuracy(network, data.val); });
}

TrainResult train_loop(Network& network, const Splits<MaskSet>& data, const TrainConfig& config, MaskLoss loss) {
  config.validate();
  require_nonempty(data);
  const MaskSet& train = data.train;
  return run_loop(
      network, train.size(), config,
      [&](std::span<const std::size_t> rows, ForwardCache& cache) {
        auto fr = network.forward(train.images.gather_rows(rows));
        cache = std::move(fr.cache);
        return mask_loss_from_logits(fr.output, train.masks.gather_rows(rows), loss);
      },
      [&] { return evaluate_mean_dice(network, data.val); });
}

std::vector<int> predict_labels(const Network& network, const Tensor& features) {
  const Tensor logits = predict_batched(network, features);
  const std::size_t n = logits.dim(0);
  const std::size_t k = logits.row_size();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = logits.data().subspan(i * k, k);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

Tensor predict_probabilities(const Network& network, const Tensor& images) {
  return sigmoid(predict_batched(network, images));
}

double evaluate_accuracy(const Network& network, const LabeledSet& set) {
  const auto predicted = predict_labels(network, set.features);
  return accuracy(confusion_from_predictions(set.labels, predicted, static_cast<std::size_t>(set.k)));
}

double evaluate_mean_dice(const Network& network, const MaskSet& set) {
  return segmentation_report(predict_probabilities(network, set.images), set.masks).at("mdsc");
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,train_loss,val_metric\n";
  for (const auto& r : history) out << r.epoch << ',' << format_real(r.train_loss) << ',' << format_real(r.val_metric) << '\n';
}

}  // namespace asaukit
