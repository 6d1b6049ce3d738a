#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>

#include "trusteq/backends.hpp"
#include "trusteq/core.hpp"
#include "trusteq/linalg.hpp"

namespace trusteq {

enum class Method { kLime, kKernelShap };

std::string_view to_string(Method method);  // "lime" / "kshap"
Method parse_method(std::string_view name);

struct Diagnostics {
  int n_evals = 0;
  std::optional<double> r2;  // LIME surrogate fit
  bool exact = false;        // Kernel SHAP full enumeration
  double ridge = 0;          // penalty actually used
  int ladder_steps = 0;      // > 0 when the system needed extra regularization
};

/// Signed per-feature importances for one instance, method and model.
struct Attribution {
  std::string instance_id;
  Method method = Method::kLime;
  std::string model_name;
  int explained_class = 0;
  Eigen::VectorXd scores;  // aligned with FeatureSpace::features
  Diagnostics diagnostics;
};

/// Coalition value function over d binary features: evaluate(masks) returns
/// v(S) for every mask row.
struct ValueFunction {
  int num_features = 0;
  std::function<Eigen::VectorXd(const MaskMatrix&)> evaluate;
};

/// Removes every occurrence of the features whose bit is 0 and joins the
/// remaining lowercase words with single spaces. With a replacement token,
/// each removed occurrence becomes that token instead.
std::pair<std::string, std::optional<std::string>> mask_text(
    const Instance& instance, const FeatureSpace& space, std::span<const std::uint8_t> mask,
    const std::optional<std::string>& replacement = std::nullopt);

/// v(S) = backend probability of `target_class` on the masked instance,
/// queried in chunks of at most `chunk_size` texts.
ValueFunction backend_value_function(const PredictionBackend& backend, const Instance& instance,
                                     const FeatureSpace& space, int target_class,
                                     int chunk_size = 64);

/// Predicted class on the raw instance text (argmax, lowest index on ties).
int predicted_class(const PredictionBackend& backend, const Instance& instance);

}  // namespace trusteq
