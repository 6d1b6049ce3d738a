#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "trusteq/attribution.hpp"

namespace trusteq {

/// The min(K, d) features with the largest |score|, as an unordered set
/// (stored sorted by feature id).
struct TopKSet {
  std::string instance_id;
  std::string model_name;
  Method method = Method::kLime;
  int k = 0;
  int num_features = 0;
  std::vector<int> feature_ids;
};

/// Ties on |score| go to the lower feature id.
TopKSet top_k(const Attribution& attribution, int k);

/// Feature ids ordered by decreasing |score| (ties by id).
std::vector<int> rank_features(const Eigen::VectorXd& scores);

/// |A n B| / |A u B|. Throws kMismatchedInstances when the sets describe
/// different instances, different K, or different feature spaces.
double jaccard(const TopKSet& a, const TopKSet& b);

struct AlignmentOptions {
  int k = 10;
  int k_max = 10;
  bool exclude_disagreements = false;  // skip instances whose explained classes differ
};

struct AlignmentReport {
  std::string model_a;
  std::string model_b;
  Method method = Method::kLime;
  int k = 0;
  std::vector<std::string> instance_ids;  // compared instances, in input order
  std::vector<double> jaccard;
  double mean_jaccard = 0;
  std::map<int, double> sweep;  // K -> mean Jaccard, K = 1..k_max
  int capped_instances = 0;     // instances with fewer than K features
  int excluded_instances = 0;
};

/// Per-instance Jaccard of top-K sets, averaged over instances, plus the K
/// sweep computed from the same attributions. Instances are matched by id and
/// reported in the order of `a`. Throws kMismatchedCoverage when an instance
/// is present on one side only.
AlignmentReport align_models(std::span<const Attribution> a, std::span<const Attribution> b,
                             const AlignmentOptions& options);

}  // namespace trusteq
