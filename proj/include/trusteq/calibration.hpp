#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace trusteq {

/// One model prediction scored against the gold label. Confidence is the
/// maximum class probability.
struct PredictionRecord {
  std::string instance_id;
  Eigen::VectorXd probs;
  int predicted = 0;
  double confidence = 0;
  bool correct = false;
  double p_true = 0;  // probability assigned to the gold label
};

PredictionRecord make_record(std::string instance_id, Eigen::VectorXd probs, int label);

inline constexpr int kNumBins = 10;

struct Bin {
  double lower = 0;
  double upper = 0;
  int count = 0;
  double percent = 0;
  double confidence_sum = 0;
  int correct = 0;

  double mean_confidence() const { return count ? confidence_sum / count : 0.0; }
  double accuracy() const { return count ? static_cast<double>(correct) / count : 0.0; }
};

/// Ten equal-width confidence bins [i/10, (i+1)/10); the last one is closed.
struct BinStats {
  std::array<Bin, kNumBins> bins;
  int total = 0;
};

int bin_index(double confidence);

/// Throws kEmptyInput for no records.
BinStats bucket(std::span<const PredictionRecord> records);

/// Count-weighted mean over non-empty bins of |accuracy - mean confidence|.
double ece(const BinStats& stats);

/// Largest |accuracy - mean confidence| over non-empty bins.
double mce(const BinStats& stats);

enum class BrierVariant {
  kTrueClass,   // mean (p_true - 1)^2
  kMulticlass,  // mean over records of sum_c (p_c - [c == label])^2
};

double brier(std::span<const PredictionRecord> records, BrierVariant variant = BrierVariant::kTrueClass);

struct ReliabilityPoint {
  double confidence = 0;
  double accuracy = 0;
  int count = 0;
};

/// One point per non-empty bin, in bin order.
std::vector<ReliabilityPoint> reliability_points(const BinStats& stats);

struct CalibrationReport {
  std::string model_name;
  BinStats bins;
  double accuracy = 0;
  double average_confidence = 0;  // percent
  double ece = 0;
  double mce = 0;
  double brier = 0;
  std::optional<double> brier_multiclass;
  std::vector<ReliabilityPoint> reliability;
};

CalibrationReport calibrate(std::string model_name, std::span<const PredictionRecord> records,
                            bool with_multiclass_brier = false);

}  // namespace trusteq
