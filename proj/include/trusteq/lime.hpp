#pragma once

#include <limits>
#include <optional>

#include <Eigen/Core>

#include "trusteq/attribution.hpp"

namespace trusteq {

struct LimeConfig {
  int n_samples = 1000;
  double kernel_width = 25.0;  // +inf gives uniform sample weights
  double ridge = 1.0;
  bool exhaustive = false;  // enumerate all 2^d masks when 2^d <= kMaxExhaustiveMasks
  std::optional<int> target_class;
  int chunk_size = 64;
};

inline constexpr int kMaxExhaustiveMasks = 4096;

struct SurrogateFit {
  Eigen::VectorXd coef;
  double intercept = 0;
  double r2 = 0;
  int n_evals = 0;
  double ridge = 0;
  int ladder_steps = 0;
};

/// Perturbation masks for d features. Row 0 is the all-ones mask; each other
/// row switches off k distinct features, k uniform in [1, d]. In exhaustive
/// mode (and 2^d small enough) every mask appears once instead.
MaskMatrix lime_masks(int d, const LimeConfig& cfg, Engine& engine);

/// sqrt(exp(-D^2 / width^2)) with D = 100 * cosine distance from the all-ones
/// mask; an all-zero mask is at distance 1.
Eigen::VectorXd lime_kernel(const MaskMatrix& masks, double kernel_width);

/// Weighted ridge fit of v on the masks with the exponential kernel.
SurrogateFit fit_lime(const ValueFunction& v, const LimeConfig& cfg, Engine& engine);

/// Explains the backend's predicted class (or cfg.target_class) on one instance.
Attribution explain_lime(const PredictionBackend& backend, const Instance& instance,
                         const FeatureSpace& space, const LimeConfig& cfg, Engine& engine);

}  // namespace trusteq
