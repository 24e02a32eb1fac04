#include "asaukit/metrics.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "asaukit/error.hpp"

namespace asaukit {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

void require_valid(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw PreconditionError("confusion matrix is empty");
}

void require_same_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("mask size mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {
  if (k == 0) throw PreconditionError("confusion matrix needs k >= 1");
}

ConfusionMatrix::ConfusionMatrix(std::size_t k, std::vector<std::uint64_t> counts) : k_(k), counts_(std::move(counts)) {
  if (k == 0 || counts_.size() != k * k) throw PreconditionError("confusion matrix needs k*k counts");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t n) {
  if (truth >= k_ || predicted >= k_) throw PreconditionError("confusion matrix index out of range");
  counts_[truth * k_ + predicted] += n;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < k_; ++i) t += counts_[i * k_ + i];
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) s += counts_.at(i * k_ + j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += counts_.at(i * k_ + j);
  return s;
}

ConfusionMatrix confusion_from_predictions(std::span<const int> truth, std::span<const int> predicted, std::size_t k) {
  if (truth.size() != predicted.size()) throw PreconditionError("label lists differ in length");
  if (truth.empty()) throw PreconditionError("label lists are empty");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(truth[i]) >= k ||
        static_cast<std::size_t>(predicted[i]) >= k) {
      throw PreconditionError("label out of range [0, " + std::to_string(k) + ") at position " + std::to_string(i));
    }
    cm.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return cm;
}

std::vector<PrfScores> per_class_prf(const ConfusionMatrix& cm) {
  require_valid(cm);
  std::vector<PrfScores> out(cm.k());
  for (std::size_t c = 0; c < cm.k(); ++c) {
    const double tp = static_cast<double>(cm(c, c));
    out[c].precision = ratio(tp, static_cast<double>(cm.col_sum(c)));
    out[c].recall = ratio(tp, static_cast<double>(cm.row_sum(c)));
    out[c].f1 = f1_of(out[c].precision, out[c].recall);
  }
  return out;
}

PrfScores macro_prf(const ConfusionMatrix& cm) {
  const auto per = per_class_prf(cm);
  PrfScores m;
  for (const auto& s : per) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double k = static_cast<double>(per.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

PrfScores micro_prf(const ConfusionMatrix& cm) {
  require_valid(cm);
  // Pooled over classes: every off-diagonal count is one FP and one FN.
  const double tp = static_cast<double>(cm.trace());
  const double off = static_cast<double>(cm.total() - cm.trace());
  PrfScores m;
  m.precision = ratio(tp, tp + off);
  m.recall = ratio(tp, tp + off);
  m.f1 = ratio(2.0 * tp, 2.0 * tp + off + off);
  return m;
}

double accuracy(const ConfusionMatrix& cm) {
  require_valid(cm);
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

MccResult mcc_multiclass(const ConfusionMatrix& cm) {
  require_valid(cm);
  const double s = static_cast<double>(cm.total());
  const double c = static_cast<double>(cm.trace());
  double pt = 0.0;
  double pp = 0.0;
  double tt = 0.0;
  std::size_t classes_present = 0;
  for (std::size_t k = 0; k < cm.k(); ++k) {
    const double p = static_cast<double>(cm.col_sum(k));
    const double t = static_cast<double>(cm.row_sum(k));
    pt += p * t;
    pp += p * p;
    tt += t * t;
    classes_present += t > 0.0 ? 1 : 0;
  }
  MccResult r;
  r.single_class_truth = classes_present < 2;
  const double var_p = s * s - pp;
  const double var_t = s * s - tt;
  if (var_p == 0.0 || var_t == 0.0) return r;
  r.value = (c * s - pt) / std::sqrt(var_p * var_t);
  return r;
}

MaskCounts mask_counts(std::span<const double> pred_mask, std::span<const double> true_mask) {
  require_same_size(pred_mask, true_mask);
  MaskCounts m;
  for (std::size_t i = 0; i < pred_mask.size(); ++i) {
    const bool p = pred_mask[i] >= 0.5;
    const bool t = true_mask[i] >= 0.5;
    m.predicted += p;
    m.truth += t;
    m.intersection += p && t;
  }
  return m;
}

double dice_binary(std::span<const double> pred_mask, std::span<const double> true_mask) {
  const auto m = mask_counts(pred_mask, true_mask);
  if (m.predicted + m.truth == 0) return 1.0;
  return 2.0 * static_cast<double>(m.intersection) / static_cast<double>(m.predicted + m.truth);
}

double iou_binary(std::span<const double> pred_mask, std::span<const double> true_mask) {
  const auto m = mask_counts(pred_mask, true_mask);
  const std::size_t uni = m.predicted + m.truth - m.intersection;
  if (uni == 0) return 1.0;
  return static_cast<double>(m.intersection) / static_cast<double>(uni);
}

std::pair<double, double> seg_precision_recall(std::span<const double> pred_mask, std::span<const double> true_mask) {
  const auto m = mask_counts(pred_mask, true_mask);
  if (m.predicted == 0 && m.truth == 0) return {1.0, 1.0};
  const double inter = static_cast<double>(m.intersection);
  return {ratio(inter, static_cast<double>(m.predicted)), ratio(inter, static_cast<double>(m.truth))};
}

double mean_over_cases(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("mean_over_cases: empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double MetricReport::at(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  throw PreconditionError("metric report has no key '" + key + "'");
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : entries) j[k] = v;
  return j.dump(2);
}

MetricReport classification_report(const ConfusionMatrix& cm) {
  const auto macro = macro_prf(cm);
  const auto micro = micro_prf(cm);
  return {{{"precision_macro", macro.precision},
           {"recall_macro", macro.recall},
           {"f1_macro", macro.f1},
           {"precision_micro", micro.precision},
           {"recall_micro", micro.recall},
           {"f1_micro", micro.f1},
           {"accuracy", accuracy(cm)},
           {"mcc", mcc_multiclass(cm).value}}};
}

MetricReport segmentation_report(const Tensor& pred_probs, const Tensor& true_masks) {
  if (pred_probs.shape() != true_masks.shape()) {
    throw ShapeError("segmentation_report: shape mismatch " + shape_to_string(pred_probs.shape()) + " vs " +
                     shape_to_string(true_masks.shape()));
  }
  const std::size_t n = pred_probs.dim(0);
  const std::size_t per = pred_probs.row_size();
  std::vector<double> dice, iou, recall, precision;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = pred_probs.data().subspan(i * per, per);
    const auto t = true_masks.data().subspan(i * per, per);
    dice.push_back(dice_binary(p, t));
    iou.push_back(iou_binary(p, t));
    const auto [prec, rec] = seg_precision_recall(p, t);
    precision.push_back(prec);
    recall.push_back(rec);
  }
  return {{{"mdsc", mean_over_cases(dice)},
           {"miou", mean_over_cases(iou)},
           {"recall", mean_over_cases(recall)},
           {"precision", mean_over_cases(precision)}}};
}

}  // namespace asaukit
