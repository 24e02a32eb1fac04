#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "asaukit/datasets.hpp"
#include "asaukit/losses.hpp"
#include "asaukit/network.hpp"

namespace asaukit {

struct TrainConfig {
  int max_epochs = 500;
  std::size_t batch_size = 16;
  double lr = 1e-4;
  int patience = 50;
  std::uint64_t seed = 0;
  double weight_decay = 1e-4;
  std::array<double, 3> split{0.8, 0.1, 0.1};

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;  ///< 0 when no epoch completed
  double best_val_metric = 0.0;
  bool diverged = false;
  bool stopped_early = false;
};

/// Minibatch Adam on softmax cross-entropy, monitoring validation accuracy.
/// Batches are reshuffled every epoch from a stream seeded by config.seed.
/// Stops after max_epochs or `patience` consecutive epochs without a strict
/// improvement, and leaves the network holding its best-validation parameters.
TrainResult train_loop(Network& network, const Splits<LabeledSet>& data, const TrainConfig& config);

/// Same loop for mask prediction: the network emits logits, `loss` is applied
/// to their sigmoid, and the monitored quantity is mean validation Dice.
TrainResult train_loop(Network& network, const Splits<MaskSet>& data, const TrainConfig& config,
                       MaskLoss loss = MaskLoss::bce_dice);

/// argmax of the network output per row.
std::vector<int> predict_labels(const Network& network, const Tensor& features);

/// Sigmoid of the network output.
Tensor predict_probabilities(const Network& network, const Tensor& images);

double evaluate_accuracy(const Network& network, const LabeledSet& set);
double evaluate_mean_dice(const Network& network, const MaskSet& set);

/// Header `epoch,train_loss,val_metric`.
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace asaukit
