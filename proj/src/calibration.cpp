#include "trusteq/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "trusteq/backends.hpp"
#include "trusteq/error.hpp"

namespace trusteq {

PredictionRecord make_record(std::string instance_id, Eigen::VectorXd probs, int label) {
  if (label < 0 || label >= probs.size()) {
    throw Error(ErrorCode::kLabelOutOfRange, "label outside the probability vector");
  }
  PredictionRecord rec;
  rec.instance_id = std::move(instance_id);
  rec.predicted = argmax(probs);
  rec.confidence = probs[rec.predicted];
  rec.correct = rec.predicted == label;
  rec.p_true = probs[label];
  rec.probs = std::move(probs);
  return rec;
}

int bin_index(double confidence) {
  int i = kNumBins - 1;
  while (i > 0 && confidence < static_cast<double>(i) / kNumBins) --i;
  return i;
}

BinStats bucket(std::span<const PredictionRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no prediction records");
  BinStats stats;
  for (int i = 0; i < kNumBins; ++i) {
    stats.bins[static_cast<std::size_t>(i)].lower = static_cast<double>(i) / kNumBins;
    stats.bins[static_cast<std::size_t>(i)].upper = static_cast<double>(i + 1) / kNumBins;
  }
  for (const auto& rec : records) {
    Bin& bin = stats.bins[static_cast<std::size_t>(bin_index(rec.confidence))];
    ++bin.count;
    bin.confidence_sum += rec.confidence;
    bin.correct += rec.correct ? 1 : 0;
  }
  stats.total = static_cast<int>(records.size());
  for (auto& bin : stats.bins) bin.percent = 100.0 * bin.count / stats.total;
  return stats;
}

double ece(const BinStats& stats) {
  double sum = 0;
  for (const auto& bin : stats.bins) {
    if (bin.count == 0) continue;
    sum += bin.count * std::abs(bin.accuracy() - bin.mean_confidence());
  }
  if (stats.total == 0) return 0.0;
  // A weighted mean never exceeds its max; clamp away rounding noise.
  return std::min(sum / stats.total, mce(stats));
}

double mce(const BinStats& stats) {
  double worst = 0;
  for (const auto& bin : stats.bins) {
    if (bin.count == 0) continue;
    worst = std::max(worst, std::abs(bin.accuracy() - bin.mean_confidence()));
  }
  return worst;
}

double brier(std::span<const PredictionRecord> records, BrierVariant variant) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no prediction records");
  double sum = 0;
  for (const auto& rec : records) {
    if (variant == BrierVariant::kTrueClass) {
      sum += (rec.p_true - 1.0) * (rec.p_true - 1.0);
    } else {
      // Gold-label entry contributes (p_true - 1)^2, the rest p_c^2.
      sum += rec.probs.squaredNorm() - rec.p_true * rec.p_true + (rec.p_true - 1.0) * (rec.p_true - 1.0);
    }
  }
  return sum / static_cast<double>(records.size());
}

std::vector<ReliabilityPoint> reliability_points(const BinStats& stats) {
  std::vector<ReliabilityPoint> points;
  for (const auto& bin : stats.bins) {
    if (bin.count == 0) continue;
    points.push_back({bin.mean_confidence(), bin.accuracy(), bin.count});
  }
  return points;
}

CalibrationReport calibrate(std::string model_name, std::span<const PredictionRecord> records,
                            bool with_multiclass_brier) {
  CalibrationReport report;
  report.model_name = std::move(model_name);
  report.bins = bucket(records);
  double confidence = 0;
  int correct = 0;
  for (const auto& rec : records) {
    confidence += rec.confidence;
    correct += rec.correct ? 1 : 0;
  }
  const auto n = static_cast<double>(records.size());
  report.average_confidence = 100.0 * confidence / n;
  report.accuracy = correct / n;
  report.ece = ece(report.bins);
  report.mce = mce(report.bins);
  report.brier = brier(records);
  if (with_multiclass_brier) report.brier_multiclass = brier(records, BrierVariant::kMulticlass);
  report.reliability = reliability_points(report.bins);
  return report;
}

}  // namespace trusteq
