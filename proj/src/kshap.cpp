#include "trusteq/kshap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "trusteq/error.hpp"

namespace trusteq {
namespace {

using Coalition = std::vector<std::uint8_t>;

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

MaskMatrix all_coalitions(int d) {
  const Eigen::Index count = Eigen::Index{1} << d;
  MaskMatrix masks(count, d);
  for (Eigen::Index r = 0; r < count; ++r) {
    for (int j = 0; j < d; ++j) masks(r, j) = static_cast<std::uint8_t>((r >> j) & 1);
  }
  return masks;
}

// Weighted least squares on coalitions (rows of `masks`, excluding the empty
// and full ones) with phi_{d-1} eliminated through the efficiency constraint.
ShapleyFit constrained_solve(const MaskMatrix& masks, const Eigen::VectorXd& values,
                             const Eigen::VectorXd& weights, double base, double full,
                             double ridge) {
  const auto d = static_cast<int>(masks.cols());
  const double total = full - base;
  ShapleyFit fit;
  fit.base_value = base;
  fit.full_value = full;
  if (d == 1) {
    fit.phi = Eigen::VectorXd::Constant(1, total);
    fit.ridge = ridge;
    return fit;
  }
  const Eigen::MatrixXd z = masks.cast<double>();
  const Eigen::VectorXd last = z.col(d - 1);
  const Eigen::MatrixXd x = z.leftCols(d - 1).colwise() - last;
  const Eigen::VectorXd y = (values.array() - base) - last.array() * total;

  const Eigen::MatrixXd xw = x.array().colwise() * weights.array();
  const RidgeFit<double> sol = solve_regularized(Eigen::MatrixXd(xw.transpose() * x),
                                                 Eigen::VectorXd(xw.transpose() * y), ridge);
  fit.phi.resize(d);
  fit.phi.head(d - 1) = sol.coef;
  fit.phi[d - 1] = total - sol.coef.sum();
  fit.ridge = sol.lambda;
  fit.ladder_steps = sol.ladder_steps;
  return fit;
}

void validate(int d, const KshapConfig& cfg) {
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "Kernel SHAP needs at least one feature");
  if (cfg.exact_threshold > kMaxExactThreshold) {
    throw Error(ErrorCode::kInvalidArgument, "exact_threshold must be <= 20");
  }
  if (!(cfg.ridge >= 0)) throw Error(ErrorCode::kInvalidArgument, "ridge must be >= 0");
}

}  // namespace

double shap_kernel_weight(int d, int s) {
  if (s <= 0 || s >= d) throw Error(ErrorCode::kInvalidArgument, "kernel weight needs 0 < s < d");
  return (d - 1.0) / (std::exp(log_binomial(d, s)) * s * (d - s));
}

Eigen::VectorXd exact_shapley(const ValueFunction& v) {
  const int d = v.num_features;
  if (d > kMaxExactShapleyFeatures) {
    throw Error(ErrorCode::kTooManyFeatures,
                "exact Shapley enumeration is capped at 12 features, got " + std::to_string(d));
  }
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one feature");
  const Eigen::VectorXd values = v.evaluate(all_coalitions(d));

  std::vector<double> factorial(static_cast<std::size_t>(d) + 1, 1.0);
  for (int k = 1; k <= d; ++k) factorial[static_cast<std::size_t>(k)] = factorial[static_cast<std::size_t>(k) - 1] * k;

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
  const Eigen::Index count = values.size();
  for (int i = 0; i < d; ++i) {
    const Eigen::Index bit = Eigen::Index{1} << i;
    for (Eigen::Index s = 0; s < count; ++s) {
      if (s & bit) continue;
      const int size = std::popcount(static_cast<std::uint64_t>(s));
      const double weight = factorial[static_cast<std::size_t>(size)] *
                            factorial[static_cast<std::size_t>(d - size - 1)] /
                            factorial[static_cast<std::size_t>(d)];
      phi[i] += weight * (values[s | bit] - values[s]);
    }
  }
  return phi;
}

ShapleyFit solve_kernel_shap(const ValueFunction& v, const KshapConfig& cfg, Engine& engine) {
  const int d = v.num_features;
  validate(d, cfg);

  if (d <= cfg.exact_threshold) {
    const MaskMatrix masks = all_coalitions(d);
    const Eigen::VectorXd values = v.evaluate(masks);
    const Eigen::Index count = masks.rows();
    // Proper coalitions are rows 1 .. count-2.
    const Eigen::Index m = count - 2;
    Eigen::VectorXd weights(m);
    for (Eigen::Index r = 1; r <= m; ++r) {
      weights[r - 1] = shap_kernel_weight(d, std::popcount(static_cast<std::uint64_t>(r)));
    }
    ShapleyFit fit = constrained_solve(masks.middleRows(1, m), values.segment(1, m), weights,
                                       values[0], values[count - 1], cfg.ridge);
    fit.n_evals = static_cast<int>(count);
    fit.exact = true;
    return fit;
  }

  if (cfg.budget < 2 * d + 2) {
    throw Error(ErrorCode::kTooFewSamples, "budget " + std::to_string(cfg.budget) +
                                               " below 2d + 2 = " + std::to_string(2 * d + 2));
  }

  // Coalition sizes are drawn in proportion to their total kernel mass,
  // members uniformly within a size; every draw also adds its complement.
  std::vector<double> cumulative;
  double mass = 0;
  for (int s = 1; s < d; ++s) {
    mass += (d - 1.0) / (static_cast<double>(s) * (d - s));
    cumulative.push_back(mass);
  }
  const double proper = d < 62 ? std::ldexp(1.0, d) - 2.0 : std::numeric_limits<double>::infinity();
  const auto target = static_cast<std::size_t>(std::min<double>(cfg.budget - 2, proper));
  const std::size_t max_draws = 64 * static_cast<std::size_t>(cfg.budget);

  std::map<Coalition, double> counts;
  std::vector<int> pool(static_cast<std::size_t>(d));
  for (std::size_t draw = 0; draw < max_draws && counts.size() + 2 <= target; ++draw) {
    const double u = uniform_unit(engine) * mass;
    const int size = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                      cumulative.begin()) + 1;
    std::iota(pool.begin(), pool.end(), 0);
    Coalition coalition(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < std::min(size, d - 1); ++i) {
      const auto j = i + static_cast<int>(uniform_index(engine, static_cast<std::uint64_t>(d - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      coalition[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = 1;
    }
    Coalition complement(coalition);
    for (auto& bit : complement) bit ^= 1;
    counts[std::move(coalition)] += 1.0;
    counts[std::move(complement)] += 1.0;
  }

  const auto m = static_cast<Eigen::Index>(counts.size());
  MaskMatrix masks(m + 2, d);
  masks.row(0).setZero();
  masks.row(1).setOnes();
  Eigen::VectorXd weights(m);
  Eigen::Index r = 0;
  for (const auto& [coalition, count] : counts) {
    for (int j = 0; j < d; ++j) masks(r + 2, j) = coalition[static_cast<std::size_t>(j)];
    weights[r++] = count;
  }
  const Eigen::VectorXd values = v.evaluate(masks);
  ShapleyFit fit = constrained_solve(masks.bottomRows(m), values.tail(m), weights, values[0],
                                     values[1], cfg.ridge);
  fit.n_evals = static_cast<int>(m + 2);
  fit.exact = false;
  return fit;
}

Attribution explain_kshap(const PredictionBackend& backend, const Instance& instance,
                          const FeatureSpace& space, const KshapConfig& cfg, Engine& engine) {
  Attribution attr;
  attr.instance_id = instance.id;
  attr.method = Method::kKernelShap;
  attr.model_name = backend.model_name();
  attr.explained_class = cfg.target_class ? *cfg.target_class : predicted_class(backend, instance);

  const ValueFunction v =
      backend_value_function(backend, instance, space, attr.explained_class, cfg.chunk_size);
  const ShapleyFit fit = solve_kernel_shap(v, cfg, engine);
  attr.scores = fit.phi;
  attr.diagnostics.n_evals = fit.n_evals;
  attr.diagnostics.exact = fit.exact;
  attr.diagnostics.ridge = fit.ridge;
  attr.diagnostics.ladder_steps = fit.ladder_steps;
  return attr;
}

}  // namespace trusteq
