#include "trusteq/backends.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "trusteq/error.hpp"

namespace trusteq {

std::vector<std::string> PredictionBackend::class_names() const {
  std::vector<std::string> names;
  for (int c = 0; c < num_classes(); ++c) names.push_back("class" + std::to_string(c));
  return names;
}

void check_probabilities(const Eigen::MatrixXd& probs, Eigen::Index expected_rows,
                         int num_classes) {
  if (probs.rows() != expected_rows || probs.cols() != num_classes) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(expected_rows) + "x" + std::to_string(num_classes) +
                    " probabilities, got " + std::to_string(probs.rows()) + "x" +
                    std::to_string(probs.cols()));
  }
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    const auto row = probs.row(r);
    if (!row.allFinite() || row.minCoeff() < 0.0 || row.maxCoeff() > 1.0 ||
        std::abs(row.sum() - 1.0) > 1e-6) {
      throw Error(ErrorCode::kShapeMismatch,
                  "row " + std::to_string(r) + " is not a probability vector");
    }
  }
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& row) {
  int best = 0;
  for (Eigen::Index c = 1; c < row.size(); ++c) {
    if (row[c] > row[best]) best = static_cast<int>(c);
  }
  return best;
}

namespace {

std::set<std::string> distinct_words(const TextPair& text) {
  std::set<std::string> words;
  for (auto& w : split_words(text.a)) words.insert(to_lower(w));
  if (text.b) {
    for (auto& w : split_words(*text.b)) words.insert(to_lower(w));
  }
  return words;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

AdditiveBackend::AdditiveBackend(std::map<std::string, double> weights, double bias, Link link)
    : bias_(bias), link_(link) {
  for (auto& [word, w] : weights) weights_.emplace(to_lower(word), w);
}

double AdditiveBackend::score(const TextPair& text) const {
  double s = bias_;
  for (const auto& word : distinct_words(text)) {
    if (auto it = weights_.find(word); it != weights_.end()) s += it->second;
  }
  return s;
}

Eigen::MatrixXd AdditiveBackend::predict_proba(std::span<const TextPair> texts) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), 2);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const double s = score(texts[i]);
    const auto r = static_cast<Eigen::Index>(i);
    if (link_ == Link::kLogistic) {
      out(r, 0) = sigmoid(-s);
      out(r, 1) = sigmoid(s);
    } else {
      out(r, 0) = 1.0 - s;
      out(r, 1) = s;
    }
  }
  return out;
}

BowLogisticModel::BowLogisticModel(std::map<std::string, int> vocab, Eigen::MatrixXd weights,
                                   std::vector<std::string> class_names, std::string name)
    : vocab_(std::move(vocab)),
      weights_(std::move(weights)),
      class_names_(std::move(class_names)),
      name_(std::move(name)) {
  if (weights_.cols() != static_cast<Eigen::Index>(vocab_.size()) + 1) {
    throw Error(ErrorCode::kShapeMismatch, "weight matrix width must be |vocab| + 1");
  }
  if (static_cast<Eigen::Index>(class_names_.size()) != weights_.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "one class name per weight row required");
  }
}

Eigen::VectorXd BowLogisticModel::features(const TextPair& text) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(weights_.cols());
  x[weights_.cols() - 1] = 1.0;
  for (const auto& word : distinct_words(text)) {
    if (auto it = vocab_.find(word); it != vocab_.end()) x[it->second] = 1.0;
  }
  return x;
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

Eigen::MatrixXd BowLogisticModel::predict_proba(std::span<const TextPair> texts) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), weights_.rows());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = softmax(weights_ * features(texts[i])).transpose();
  }
  return out;
}

BowLogisticModel train_bow_logistic(const Dataset& dataset, const TrainingConfig& cfg,
                                    std::string name) {
  if (dataset.instances.empty()) {
    throw Error(ErrorCode::kDegenerateDataset, "cannot train on an empty dataset");
  }
  std::set<int> labels;
  for (const auto& inst : dataset.instances) labels.insert(inst.label);
  if (labels.size() < 2) {
    throw Error(ErrorCode::kDegenerateDataset, "training data contains a single class");
  }
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0) || cfg.l2 < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid training configuration");
  }

  std::vector<TextPair> texts;
  texts.reserve(dataset.instances.size());
  std::map<std::string, int> doc_freq;
  for (const auto& inst : dataset.instances) {
    texts.push_back(TextPair{inst.text_a, inst.text_b});
    for (const auto& w : distinct_words(texts.back())) ++doc_freq[w];
  }

  // Most frequent first, alphabetical among equals.
  std::vector<std::pair<std::string, int>> ranked(doc_freq.begin(), doc_freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });
  if (cfg.vocab_cap && static_cast<std::size_t>(std::max(0, *cfg.vocab_cap)) < ranked.size()) {
    ranked.resize(static_cast<std::size_t>(std::max(0, *cfg.vocab_cap)));
  }
  std::vector<std::string> kept;
  for (auto& [word, df] : ranked) kept.push_back(word);
  std::sort(kept.begin(), kept.end());
  std::map<std::string, int> vocab;
  for (std::size_t i = 0; i < kept.size(); ++i) vocab.emplace(kept[i], static_cast<int>(i));

  const auto n = static_cast<Eigen::Index>(texts.size());
  const auto width = static_cast<Eigen::Index>(vocab.size()) + 1;
  const int num_classes = dataset.num_classes;

  BowLogisticModel model(vocab, Eigen::MatrixXd::Zero(num_classes, width), dataset.class_names,
                         name);
  Eigen::MatrixXd x(n, width);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = model.features(texts[i]).transpose();

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(num_classes, width);
  Engine engine(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(engine, i)]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(num_classes, width);
      for (std::size_t k = start; k < stop; ++k) {
        const Eigen::Index row = order[k];
        Eigen::VectorXd p = softmax(w * x.row(row).transpose());
        p[dataset.instances[static_cast<std::size_t>(row)].label] -= 1.0;
        grad.noalias() += p * x.row(row);
      }
      grad /= static_cast<double>(stop - start);
      grad.leftCols(width - 1) += cfg.l2 * w.leftCols(width - 1);
      w -= cfg.learning_rate * grad;
    }
  }
  return BowLogisticModel(std::move(vocab), std::move(w), dataset.class_names, std::move(name));
}

}  // namespace trusteq
