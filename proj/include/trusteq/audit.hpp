#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trusteq/alignment.hpp"
#include "trusteq/attribution.hpp"
#include "trusteq/backends.hpp"
#include "trusteq/calibration.hpp"
#include "trusteq/kshap.hpp"
#include "trusteq/lime.hpp"

namespace trusteq {

inline constexpr const char* kToolkitName = "trusteq";
inline constexpr const char* kToolkitVersion = "0.1.0";

struct BackendSpec {
  enum class Kind { kBuiltinLr, kAdditive, kSubprocess, kTcp };
  Kind kind = Kind::kBuiltinLr;
  // builtin-lr
  TrainingConfig training;
  bool training_seed_set = false;  // otherwise the audit seed is used
  std::optional<std::filesystem::path> train_path;
  // additive
  std::map<std::string, double> weights;
  double bias = 0;
  Link link = Link::kLogistic;
  // subprocess / tcp
  ProtocolEndpoint endpoint;
  std::chrono::milliseconds timeout{30000};
  nlohmann::json source = nlohmann::json::object();  // as written in the config
};

struct ModelSpec {
  std::string name;
  BackendSpec backend;
  nlohmann::json metadata = nlohmann::json::object();  // free-form pass-through
};

struct DatasetSpec {
  std::string name;
  std::filesystem::path path;
  std::filesystem::path manifest;
  nlohmann::json source = nlohmann::json::object();  // as written in the config
};

struct AuditConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ModelSpec> models;
  std::string reference_model;
  std::vector<Method> methods{Method::kLime, Method::kKernelShap};
  int k = 10;
  int k_max = 10;
  std::optional<int> sample_limit;
  std::uint64_t seed = 0;
  bool all_pairs = false;
  bool exclude_disagreements = false;
  bool multiclass_brier = false;
  int drilldown_k = 3;
  int markdown_examples = 3;
  int purity_probes = 5;
  int chunk_size = 64;
  LimeConfig lime;
  KshapConfig kshap;
};

/// Relative paths resolve against `base_dir`. Throws kConfigError.
AuditConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
AuditConfig load_config(const std::filesystem::path& path);

/// Every hyperparameter that affects results; worker count is excluded.
nlohmann::json config_to_json(const AuditConfig& cfg);

/// Instantiates the backend of one model for one dataset (builtin-lr trains on
/// `train_data`, or on the model's train_path when given).
std::unique_ptr<PredictionBackend> make_backend(const ModelSpec& spec, const Dataset& train_data,
                                                std::uint64_t seed);

struct DrilldownWord {
  std::string word;
  double score = 0;
};

struct DrilldownModel {
  std::string model;
  int predicted = 0;
  double confidence = 0;
  std::map<Method, std::vector<DrilldownWord>> top;
  std::map<Method, std::vector<int>> top_ids;
};

struct InstanceDrilldown {
  Instance instance;
  std::vector<DrilldownModel> models;
};

struct DatasetAudit {
  std::string name;
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<std::string> model_names;
  std::vector<Instance> instances;
  std::vector<FeatureSpace> spaces;
  std::vector<CalibrationReport> calibration;  // one per model
  std::vector<AlignmentReport> alignment;
  std::vector<InstanceDrilldown> drilldown;
  // attributions[model][method][instance]
  std::vector<std::map<Method, std::vector<Attribution>>> attributions;
};

struct AuditReport {
  nlohmann::json config;
  nlohmann::json models;  // name + metadata + backend-reported name
  std::vector<DatasetAudit> datasets;
  std::vector<Method> methods;
  int k = 10;
  int k_max = 10;
  int markdown_examples = 3;
  std::string masking = "delete";
};

struct AuditOptions {
  int jobs = 1;
  bool calibration_only = false;
  std::optional<std::string> only_instance;  // explain a single instance
  std::optional<std::string> only_dataset;
  std::ostream* log = nullptr;
};

/// predict -> calibrate -> attribute -> align -> drill down, for every
/// configured dataset. Any failure aborts the whole audit; the error message
/// names the offending instance.
AuditReport run_audit(const AuditConfig& cfg, const AuditOptions& options = {});

nlohmann::json report_to_json(const AuditReport& report);

/// Assumptions recorded with every report (feature grouping, ranking, ...).
nlohmann::json report_assumptions(const AuditReport& report);

// --- attributions.jsonl -----------------------------------------------------

struct AttributionRecord {
  std::string dataset;
  Attribution attribution;
  std::vector<std::string> features;
};

std::vector<AttributionRecord> attribution_records(const AuditReport& report);
nlohmann::json attribution_to_json(const AttributionRecord& record);
AttributionRecord attribution_from_json(const nlohmann::json& j);
void write_attributions(std::ostream& out, const std::vector<AttributionRecord>& records);
std::vector<AttributionRecord> read_attributions(const std::filesystem::path& path);

/// Alignment-only report from saved attributions: reference vs every other
/// model (all pairs when requested), per dataset and method.
AuditReport align_from_records(const std::vector<AttributionRecord>& records,
                               const std::string& reference, const AlignmentOptions& options,
                               bool all_pairs);

}  // namespace trusteq
