#pragma once

#include <optional>

#include <Eigen/Core>

#include "trusteq/attribution.hpp"

namespace trusteq {

struct KshapConfig {
  int budget = 2048;         // coalition evaluations in sampled mode
  int exact_threshold = 13;  // enumerate all coalitions when d <= this
  double ridge = 1e-9;
  std::optional<int> target_class;
  int chunk_size = 64;
};

inline constexpr int kMaxExactShapleyFeatures = 12;
inline constexpr int kMaxExactThreshold = 20;

/// SHAP kernel weight (d - 1) / (C(d, s) s (d - s)) of a coalition of size s,
/// 0 < s < d.
double shap_kernel_weight(int d, int s);

/// Brute-force Shapley values from the classical subset formula. Evaluates
/// v on all 2^d coalitions once. Throws kTooManyFeatures for d > 12.
Eigen::VectorXd exact_shapley(const ValueFunction& v);

struct ShapleyFit {
  Eigen::VectorXd phi;
  double base_value = 0;  // v(empty)
  double full_value = 0;  // v(all features)
  int n_evals = 0;
  bool exact = false;
  double ridge = 0;
  int ladder_steps = 0;
};

/// Kernel SHAP: weighted least squares over coalitions with the efficiency
/// constraint sum(phi) = v(full) - v(empty) eliminated into the system.
/// Full enumeration when d <= exact_threshold, otherwise paired sampling.
ShapleyFit solve_kernel_shap(const ValueFunction& v, const KshapConfig& cfg, Engine& engine);

Attribution explain_kshap(const PredictionBackend& backend, const Instance& instance,
                          const FeatureSpace& space, const KshapConfig& cfg, Engine& engine);

}  // namespace trusteq
