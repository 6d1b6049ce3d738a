#include "trusteq/lime.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "trusteq/error.hpp"

namespace trusteq {
namespace {

bool use_enumeration(int d, const LimeConfig& cfg) {
  return cfg.exhaustive && d < 31 && (1 << d) <= kMaxExhaustiveMasks;
}

void validate(int d, const LimeConfig& cfg) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "LIME needs at least one feature");
  if (!(cfg.kernel_width > 0)) throw Error(ErrorCode::kInvalidArgument, "kernel width must be > 0");
  if (!(cfg.ridge >= 0)) throw Error(ErrorCode::kInvalidArgument, "ridge penalty must be >= 0");
  if (!use_enumeration(d, cfg) && cfg.n_samples < d + 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "n_samples must be at least d + 2 (d = " + std::to_string(d) + ")");
  }
}

}  // namespace

MaskMatrix lime_masks(int d, const LimeConfig& cfg, Engine& engine) {
  validate(d, cfg);
  if (use_enumeration(d, cfg)) {
    const int count = 1 << d;
    MaskMatrix masks(count, d);
    // Row 0 = all ones, then descending bit patterns down to all zeros.
    for (int r = 0; r < count; ++r) {
      const int bits = count - 1 - r;
      for (int j = 0; j < d; ++j) masks(r, j) = static_cast<std::uint8_t>((bits >> j) & 1);
    }
    return masks;
  }
  MaskMatrix masks = MaskMatrix::Ones(cfg.n_samples, d);
  std::vector<int> pool(static_cast<std::size_t>(d));
  for (int r = 1; r < cfg.n_samples; ++r) {
    const auto k = static_cast<int>(uniform_index(engine, static_cast<std::uint64_t>(d))) + 1;
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(uniform_index(engine, static_cast<std::uint64_t>(d - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      masks(r, pool[static_cast<std::size_t>(i)]) = 0;
    }
  }
  return masks;
}

Eigen::VectorXd lime_kernel(const MaskMatrix& masks, double kernel_width) {
  const auto d = static_cast<double>(masks.cols());
  Eigen::VectorXd w(masks.rows());
  for (Eigen::Index r = 0; r < masks.rows(); ++r) {
    const double on = masks.row(r).cast<double>().sum();
    const double distance = 100.0 * (1.0 - std::sqrt(on / d));
    w[r] = std::isinf(kernel_width)
               ? 1.0
               : std::sqrt(std::exp(-(distance * distance) / (kernel_width * kernel_width)));
  }
  return w;
}

SurrogateFit fit_lime(const ValueFunction& v, const LimeConfig& cfg, Engine& engine) {
  const MaskMatrix masks = lime_masks(v.num_features, cfg, engine);
  const Eigen::VectorXd y = v.evaluate(masks);
  if (y.size() != masks.rows() || !y.allFinite()) {
    throw Error(ErrorCode::kShapeMismatch, "value function returned invalid values");
  }
  const Eigen::VectorXd w = lime_kernel(masks, cfg.kernel_width);
  const Eigen::MatrixXd x = masks.cast<double>();

  const RidgeFit<double> ridge = weighted_ridge(x, y, w, cfg.ridge);
  SurrogateFit fit;
  fit.coef = ridge.coef;
  fit.intercept = ridge.intercept;
  fit.ridge = ridge.lambda;
  fit.ladder_steps = ridge.ladder_steps;
  fit.n_evals = static_cast<int>(masks.rows());
  const Eigen::VectorXd predicted = (x * fit.coef).array() + fit.intercept;
  fit.r2 = weighted_r2(y, predicted, w);
  return fit;
}

Attribution explain_lime(const PredictionBackend& backend, const Instance& instance,
                         const FeatureSpace& space, const LimeConfig& cfg, Engine& engine) {
  Attribution attr;
  attr.instance_id = instance.id;
  attr.method = Method::kLime;
  attr.model_name = backend.model_name();
  attr.explained_class = cfg.target_class ? *cfg.target_class : predicted_class(backend, instance);

  const ValueFunction v =
      backend_value_function(backend, instance, space, attr.explained_class, cfg.chunk_size);
  const SurrogateFit fit = fit_lime(v, cfg, engine);
  attr.scores = fit.coef;
  attr.diagnostics.n_evals = fit.n_evals;
  attr.diagnostics.r2 = fit.r2;
  attr.diagnostics.ridge = fit.ridge;
  attr.diagnostics.ladder_steps = fit.ladder_steps;
  return attr;
}

}  // namespace trusteq
