#pragma once

// Classification and segmentation metrics. Per-class 0/0 ratios are 0; for
// masks where prediction and truth are both empty every score is 1.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asaukit/tensor.hpp"

namespace asaukit {

/// counts[i][j] = samples of true class i predicted as class j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k);
  /// Row-major k*k counts.
  ConfusionMatrix(std::size_t k, std::vector<std::uint64_t> counts);

  std::size_t k() const noexcept { return k_; }
  std::uint64_t operator()(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  void add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1);

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  std::uint64_t row_sum(std::size_t i) const;
  std::uint64_t col_sum(std::size_t j) const;
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

 private:
  std::size_t k_;
  std::vector<std::uint64_t> counts_;
};

struct PrfScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ConfusionMatrix confusion_from_predictions(std::span<const int> truth, std::span<const int> predicted, std::size_t k);

std::vector<PrfScores> per_class_prf(const ConfusionMatrix& cm);
PrfScores macro_prf(const ConfusionMatrix& cm);
PrfScores micro_prf(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

struct MccResult {
  double value = 0.0;
  /// Ground truth holds a single class; value is defined as 0.
  bool single_class_truth = false;
};

/// (c*s - sum p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2)); 0 when a variance factor is 0.
MccResult mcc_multiclass(const ConfusionMatrix& cm);

struct MaskCounts {
  std::size_t intersection = 0;
  std::size_t predicted = 0;
  std::size_t truth = 0;
};

/// Binarizes at 0.5 (value >= 0.5 is foreground) and counts overlaps.
MaskCounts mask_counts(std::span<const double> pred_mask, std::span<const double> true_mask);

double dice_binary(std::span<const double> pred_mask, std::span<const double> true_mask);
double iou_binary(std::span<const double> pred_mask, std::span<const double> true_mask);
/// {precision, recall}.
std::pair<double, double> seg_precision_recall(std::span<const double> pred_mask, std::span<const double> true_mask);

double mean_over_cases(std::span<const double> values);

/// Ordered (name, value) pairs serialized as a flat JSON object.
struct MetricReport {
  std::vector<std::pair<std::string, double>> entries;

  double at(const std::string& key) const;
  std::string to_json() const;
};

/// Keys precision_macro, recall_macro, f1_macro, precision_micro, recall_micro,
/// f1_micro, accuracy, mcc.
MetricReport classification_report(const ConfusionMatrix& cm);

/// Per-case mean of Dice, IoU, recall and precision over [N x ...] masks
/// (predictions binarized at 0.5). Keys mdsc, miou, recall, precision.
MetricReport segmentation_report(const Tensor& pred_probs, const Tensor& true_masks);

}  // namespace asaukit
