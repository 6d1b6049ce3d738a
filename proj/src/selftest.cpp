#include "trusteq/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>

#include "trusteq/alignment.hpp"
#include "trusteq/calibration.hpp"
#include "trusteq/kshap.hpp"
#include "trusteq/lime.hpp"

namespace trusteq {
namespace {

ValueFunction random_game(int d, Engine& engine) {
  auto table = std::make_shared<Eigen::VectorXd>(Eigen::Index{1} << d);
  for (Eigen::Index s = 0; s < table->size(); ++s) (*table)[s] = uniform_unit(engine);
  ValueFunction v;
  v.num_features = d;
  v.evaluate = [table](const MaskMatrix& masks) {
    Eigen::VectorXd out(masks.rows());
    for (Eigen::Index r = 0; r < masks.rows(); ++r) {
      Eigen::Index key = 0;
      for (Eigen::Index j = 0; j < masks.cols(); ++j) key |= static_cast<Eigen::Index>(masks(r, j)) << j;
      out[r] = (*table)[key];
    }
    return out;
  };
  return v;
}

ValueFunction additive_game(const Eigen::VectorXd& weights, double bias) {
  ValueFunction v;
  v.num_features = static_cast<int>(weights.size());
  v.evaluate = [weights, bias](const MaskMatrix& masks) {
    return Eigen::VectorXd((masks.cast<double>() * weights).array() + bias);
  };
  return v;
}

bool check(std::ostream& out, const std::string& name, const std::function<bool()>& body) {
  bool ok = false;
  try {
    ok = body();
  } catch (const std::exception& e) {
    out << "[FAIL] " << name << ": " << e.what() << '\n';
    return false;
  }
  out << (ok ? "[PASS] " : "[FAIL] ") << name << '\n';
  return ok;
}

}  // namespace

bool run_selftest(std::ostream& out, std::uint64_t seed) {
  bool all = true;

  all &= check(out, "kernel shap (exact mode) matches brute-force Shapley, d=3..10", [&] {
    for (int d = 3; d <= 10; ++d) {
      for (int g = 0; g < 20; ++g) {
        Engine engine = make_engine(seed, "game-" + std::to_string(d) + "-" + std::to_string(g), "selftest");
        const ValueFunction v = random_game(d, engine);
        const ShapleyFit fit = solve_kernel_shap(v, KshapConfig{}, engine);
        if ((fit.phi - exact_shapley(v)).cwiseAbs().maxCoeff() > 1e-6) return false;
      }
    }
    return true;
  });

  all &= check(out, "efficiency holds in sampled mode", [&] {
    for (int d : {14, 16}) {
      Engine engine = make_engine(seed, "efficiency-" + std::to_string(d), "selftest");
      const ValueFunction v = random_game(d, engine);
      KshapConfig cfg;
      cfg.budget = 512;
      const ShapleyFit fit = solve_kernel_shap(v, cfg, engine);
      if (std::abs(fit.phi.sum() - (fit.full_value - fit.base_value)) > 1e-6) return false;
    }
    return true;
  });

  all &= check(out, "LIME exhaustive mode recovers additive weights", [&] {
    for (int d = 2; d <= 8; ++d) {
      Engine engine = make_engine(seed, "lime-" + std::to_string(d), "selftest");
      Eigen::VectorXd w(d);
      for (int j = 0; j < d; ++j) w[j] = 2.0 * uniform_unit(engine) - 1.0;
      LimeConfig cfg;
      cfg.exhaustive = true;
      cfg.kernel_width = std::numeric_limits<double>::infinity();
      cfg.ridge = 1e-9;
      const SurrogateFit fit = fit_lime(additive_game(w, 0.25), cfg, engine);
      if ((fit.coef - w).cwiseAbs().maxCoeff() > 1e-4) return false;
    }
    return true;
  });

  all &= check(out, "calibration fixture: ECE 0.30, MCE 0.60, Brier 0.125", [&] {
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 3; ++i) records.push_back(make_record("c" + std::to_string(i), Eigen::Vector2d(0.2, 0.8), 1));
    records.push_back(make_record("w", Eigen::Vector2d(0.4, 0.6), 0));
    const BinStats stats = bucket(records);
    std::vector<PredictionRecord> brier_set{make_record("a", Eigen::Vector2d(0.0, 1.0), 1),
                                            make_record("b", Eigen::Vector2d(0.5, 0.5), 1)};
    return std::abs(ece(stats) - 0.30) <= 1e-12 && std::abs(mce(stats) - 0.60) <= 1e-12 &&
           std::abs(brier(brier_set) - 0.125) <= 1e-12;
  });

  all &= check(out, "Jaccard identity, symmetry and 5-of-15", [&] {
    TopKSet a{"x", "m", Method::kLime, 10, 20, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    TopKSet b{"x", "m", Method::kLime, 10, 20, {5, 6, 7, 8, 9, 10, 11, 12, 13, 14}};
    return jaccard(a, a) == 1.0 && jaccard(a, b) == jaccard(b, a) &&
           std::abs(jaccard(a, b) - 1.0 / 3.0) <= 1e-15;
  });

  return all;
}

}  // namespace trusteq
