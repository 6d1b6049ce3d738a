#include "trusteq/attribution.hpp"

#include <algorithm>
#include <vector>

#include "trusteq/error.hpp"

namespace trusteq {

std::string_view to_string(Method method) {
  return method == Method::kLime ? "lime" : "kshap";
}

Method parse_method(std::string_view name) {
  if (name == "lime") return Method::kLime;
  if (name == "kshap" || name == "shap") return Method::kKernelShap;
  throw Error(ErrorCode::kConfigError, "unknown method '" + std::string(name) + "'");
}

std::pair<std::string, std::optional<std::string>> mask_text(
    const Instance& instance, const FeatureSpace& space, std::span<const std::uint8_t> mask,
    const std::optional<std::string>& replacement) {
  if (static_cast<int>(mask.size()) != space.size()) {
    throw Error(ErrorCode::kInvalidArgument, "mask length differs from feature count");
  }
  auto render = [&](std::size_t segment) {
    std::string out;
    const auto& ids = space.feature_of[segment];
    for (int id : ids) {
      const std::string* word = nullptr;
      if (mask[static_cast<std::size_t>(id)] != 0) {
        word = &space.features[static_cast<std::size_t>(id)].surface;
      } else if (replacement) {
        word = &*replacement;
      }
      if (word == nullptr) continue;
      if (!out.empty()) out += ' ';
      out += *word;
    }
    return out;
  };
  std::optional<std::string> b;
  if (instance.text_b) b = render(1);
  return {render(0), std::move(b)};
}

ValueFunction backend_value_function(const PredictionBackend& backend, const Instance& instance,
                                     const FeatureSpace& space, int target_class, int chunk_size) {
  if (target_class < 0 || target_class >= backend.num_classes()) {
    throw Error(ErrorCode::kInvalidArgument, "target class outside the backend's classes");
  }
  chunk_size = std::max(1, chunk_size);
  ValueFunction v;
  v.num_features = space.size();
  v.evaluate = [&backend, &instance, &space, target_class, chunk_size,
                token = backend.mask_token()](const MaskMatrix& masks) {
    Eigen::VectorXd values(masks.rows());
    std::vector<TextPair> batch;
    for (Eigen::Index start = 0; start < masks.rows(); start += chunk_size) {
      const Eigen::Index stop = std::min<Eigen::Index>(masks.rows(), start + chunk_size);
      batch.clear();
      for (Eigen::Index r = start; r < stop; ++r) {
        auto [a, b] = mask_text(instance, space,
                                std::span(masks.row(r).data(), static_cast<std::size_t>(masks.cols())),
                                token);
        batch.push_back(TextPair{std::move(a), std::move(b)});
      }
      const Eigen::MatrixXd probs = backend.predict_proba(batch);
      if (probs.rows() != stop - start || probs.cols() != backend.num_classes()) {
        throw Error(ErrorCode::kShapeMismatch, "backend returned a batch of the wrong shape");
      }
      values.segment(start, stop - start) = probs.col(target_class);
    }
    return values;
  };
  return v;
}

int predicted_class(const PredictionBackend& backend, const Instance& instance) {
  const TextPair text{instance.text_a, instance.text_b};
  const Eigen::MatrixXd probs = backend.predict_proba(std::span(&text, 1));
  if (probs.rows() != 1) throw Error(ErrorCode::kShapeMismatch, "expected one prediction row");
  return argmax(probs.row(0).transpose());
}

}  // namespace trusteq
