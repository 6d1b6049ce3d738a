#include "trusteq/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "trusteq/error.hpp"

namespace trusteq {

std::vector<int> rank_features(const Eigen::VectorXd& scores) {
  std::vector<int> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
    return std::abs(scores[l]) > std::abs(scores[r]);
  });
  return order;
}

TopKSet top_k(const Attribution& attribution, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  TopKSet set;
  set.instance_id = attribution.instance_id;
  set.model_name = attribution.model_name;
  set.method = attribution.method;
  set.k = k;
  set.num_features = static_cast<int>(attribution.scores.size());
  const auto order = rank_features(attribution.scores);
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  set.feature_ids.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(set.feature_ids.begin(), set.feature_ids.end());
  return set;
}

double jaccard(const TopKSet& a, const TopKSet& b) {
  if (a.instance_id != b.instance_id || a.k != b.k || a.num_features != b.num_features) {
    throw Error(ErrorCode::kMismatchedInstances,
                "cannot compare top-K sets of '" + a.instance_id + "' and '" + b.instance_id + "'");
  }
  std::vector<int> common;
  std::set_intersection(a.feature_ids.begin(), a.feature_ids.end(), b.feature_ids.begin(),
                        b.feature_ids.end(), std::back_inserter(common));
  const std::size_t unite = a.feature_ids.size() + b.feature_ids.size() - common.size();
  if (unite == 0) {
    throw Error(ErrorCode::kMismatchedInstances, "Jaccard of two empty sets is undefined");
  }
  return static_cast<double>(common.size()) / static_cast<double>(unite);
}

AlignmentReport align_models(std::span<const Attribution> a, std::span<const Attribution> b,
                             const AlignmentOptions& options) {
  if (options.k < 1 || options.k_max < options.k) {
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= K <= K_max");
  }
  if (a.empty() && b.empty()) throw Error(ErrorCode::kEmptyInput, "no attributions to align");

  std::unordered_map<std::string, const Attribution*> by_id;
  for (const auto& attr : b) {
    if (!by_id.emplace(attr.instance_id, &attr).second) {
      throw Error(ErrorCode::kMismatchedCoverage, "duplicate instance '" + attr.instance_id + "'");
    }
  }
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kMismatchedCoverage, "attribution sets cover different instances");
  }

  AlignmentReport report;
  report.model_a = a.front().model_name;
  report.model_b = b.front().model_name;
  report.method = a.front().method;
  report.k = options.k;

  std::vector<std::pair<const Attribution*, const Attribution*>> pairs;
  for (const auto& left : a) {
    const auto it = by_id.find(left.instance_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMismatchedCoverage,
                  "instance '" + left.instance_id + "' is missing on one side");
    }
    const Attribution& right = *it->second;
    if (left.method != right.method || left.method != report.method) {
      throw Error(ErrorCode::kMismatchedInstances, "attributions mix explanation methods");
    }
    if (left.scores.size() != right.scores.size()) {
      throw Error(ErrorCode::kMismatchedInstances,
                  "feature spaces differ for instance '" + left.instance_id + "'");
    }
    if (options.exclude_disagreements && left.explained_class != right.explained_class) {
      ++report.excluded_instances;
      continue;
    }
    pairs.emplace_back(&left, it->second);
  }

  for (int k = 1; k <= options.k_max; ++k) {
    double sum = 0;
    for (const auto& [left, right] : pairs) {
      const double j = jaccard(top_k(*left, k), top_k(*right, k));
      sum += j;
      if (k == options.k) {
        report.instance_ids.push_back(left->instance_id);
        report.jaccard.push_back(j);
        if (left->scores.size() < k) ++report.capped_instances;
      }
    }
    const double mean = pairs.empty() ? 0.0 : sum / static_cast<double>(pairs.size());
    report.sweep[k] = mean;
    if (k == options.k) report.mean_jaccard = mean;
  }
  return report;
}

}  // namespace trusteq
