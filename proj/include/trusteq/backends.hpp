#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trusteq/core.hpp"

namespace trusteq {

struct TextPair {
  std::string a;
  std::optional<std::string> b;
};

/// Black-box classifier. predict_proba returns one row per input text, each a
/// probability vector of length num_classes(). Implementations must be pure,
/// accept empty text, and be callable from several threads at once.
class PredictionBackend {
 public:
  virtual ~PredictionBackend() = default;

  virtual int num_classes() const = 0;
  virtual std::vector<std::string> class_names() const;
  virtual std::string model_name() const { return {}; }

  /// Replacement token for masked words; deletion when empty.
  virtual std::optional<std::string> mask_token() const { return std::nullopt; }

  virtual Eigen::MatrixXd predict_proba(std::span<const TextPair> texts) const = 0;
};

/// Throws kShapeMismatch unless every row is a probability vector of the
/// backend's width (entries in [0,1], sum within 1e-6 of 1).
void check_probabilities(const Eigen::MatrixXd& probs, Eigen::Index expected_rows, int num_classes);

/// Index of the largest entry, lowest index on ties.
int argmax(const Eigen::Ref<const Eigen::VectorXd>& row);

// --- Additive oracle backend ------------------------------------------------

enum class Link { kIdentity, kLogistic };

/// Two-class backend with score(text) = bias + sum of weights of the distinct
/// words present. Logistic link returns [sigmoid(-s), sigmoid(s)]; identity
/// returns [1 - s, s] unclamped and exists for oracle tests only.
class AdditiveBackend final : public PredictionBackend {
 public:
  AdditiveBackend(std::map<std::string, double> weights, double bias, Link link);

  int num_classes() const override { return 2; }
  std::string model_name() const override { return "additive"; }
  Eigen::MatrixXd predict_proba(std::span<const TextPair> texts) const override;

  double score(const TextPair& text) const;

 private:
  std::map<std::string, double> weights_;
  double bias_;
  Link link_;
};

// --- Bag-of-words logistic regression ---------------------------------------

struct TrainingConfig {
  double learning_rate = 0.1;
  int epochs = 30;
  double l2 = 0.01;
  int batch_size = 8;
  std::uint64_t seed = 0;
  std::optional<int> vocab_cap;  // keep the most frequent words only
};

/// Multinomial logistic regression over binary word-presence features.
class BowLogisticModel final : public PredictionBackend {
 public:
  BowLogisticModel(std::map<std::string, int> vocab, Eigen::MatrixXd weights,
                   std::vector<std::string> class_names, std::string name = "bow-logistic");

  int num_classes() const override { return static_cast<int>(weights_.rows()); }
  std::vector<std::string> class_names() const override { return class_names_; }
  std::string model_name() const override { return name_; }
  Eigen::MatrixXd predict_proba(std::span<const TextPair> texts) const override;

  const std::map<std::string, int>& vocab() const { return vocab_; }
  /// num_classes x (|vocab| + 1); the last column is the bias.
  const Eigen::MatrixXd& weights() const { return weights_; }

  Eigen::VectorXd features(const TextPair& text) const;

 private:
  std::map<std::string, int> vocab_;
  Eigen::MatrixXd weights_;
  std::vector<std::string> class_names_;
  std::string name_;
};

/// Mini-batch gradient descent on softmax cross-entropy with L2 penalty.
/// Throws kDegenerateDataset for an empty or single-class dataset.
BowLogisticModel train_bow_logistic(const Dataset& dataset, const TrainingConfig& cfg,
                                    std::string name = "bow-logistic");

// --- Wire-protocol client ---------------------------------------------------

struct ProtocolEndpoint {
  // Exactly one of the two is used: a subprocess argv or "host:port".
  std::vector<std::string> command;
  std::string tcp;
};

/// JSON-lines client for an external model speaking the handshake / predict /
/// shutdown protocol over a subprocess's stdio or a TCP stream. Requests are
/// serialized over the single connection.
class ProtocolClient final : public PredictionBackend {
 public:
  ProtocolClient(const ProtocolEndpoint& endpoint, std::chrono::milliseconds timeout);
  ~ProtocolClient() override;

  ProtocolClient(const ProtocolClient&) = delete;
  ProtocolClient& operator=(const ProtocolClient&) = delete;

  int num_classes() const override { return num_classes_; }
  std::vector<std::string> class_names() const override { return class_names_; }
  std::string model_name() const override { return model_name_; }
  std::optional<std::string> mask_token() const override { return mask_token_; }
  Eigen::MatrixXd predict_proba(std::span<const TextPair> texts) const override;

 private:
  class Connection;

  std::unique_ptr<Connection> connection_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mutex_;
  int num_classes_ = 0;
  std::vector<std::string> class_names_;
  std::string model_name_;
  std::optional<std::string> mask_token_;
};

std::unique_ptr<PredictionBackend> protocol_client(const ProtocolEndpoint& endpoint,
                                                   std::chrono::milliseconds timeout);

}  // namespace trusteq
