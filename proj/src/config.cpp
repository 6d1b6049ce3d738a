#include <fstream>
#include <limits>
#include <set>

#include "trusteq/audit.hpp"
#include "trusteq/error.hpp"

namespace trusteq {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::kConfigError, message);
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : allowed) known = known || key == k;
    if (!known) config_error("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

double parse_width(const json& j) {
  const auto it = j.find("kernel_width");
  if (it == j.end()) return LimeConfig{}.kernel_width;
  if (it->is_null() || (it->is_string() && (*it == "inf" || *it == "infinity"))) {
    return std::numeric_limits<double>::infinity();
  }
  if (!it->is_number()) config_error("lime.kernel_width must be a number or \"inf\"");
  return it->get<double>();
}

BackendSpec parse_backend(const json& j, const fs::path& base) {
  BackendSpec spec;
  spec.source = j;
  const auto type = get_or<std::string>(j, "type", "");
  if (type == "builtin-lr") {
    check_keys(j, {"type", "vocab_cap", "learning_rate", "epochs", "l2", "batch_size", "seed", "train_path"},
               "builtin-lr backend");
    spec.kind = BackendSpec::Kind::kBuiltinLr;
    TrainingConfig& t = spec.training;
    if (auto it = j.find("vocab_cap"); it != j.end() && !it->is_null()) t.vocab_cap = it->get<int>();
    t.learning_rate = get_or(j, "learning_rate", t.learning_rate);
    t.epochs = get_or(j, "epochs", t.epochs);
    t.l2 = get_or(j, "l2", t.l2);
    t.batch_size = get_or(j, "batch_size", t.batch_size);
    if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
      t.seed = it->get<std::uint64_t>();
      spec.training_seed_set = true;
    }
    if (auto it = j.find("train_path"); it != j.end() && !it->is_null()) {
      spec.train_path = resolve(base, it->get<std::string>());
    }
    if (t.vocab_cap && *t.vocab_cap < 1) config_error("vocab_cap must be >= 1");
  } else if (type == "additive") {
    check_keys(j, {"type", "weights", "bias", "link"}, "additive backend");
    spec.kind = BackendSpec::Kind::kAdditive;
    spec.weights = get_or<std::map<std::string, double>>(j, "weights", {});
    spec.bias = get_or(j, "bias", 0.0);
    const auto link = get_or<std::string>(j, "link", "logistic");
    if (link == "logistic") {
      spec.link = Link::kLogistic;
    } else if (link == "identity") {
      spec.link = Link::kIdentity;
    } else {
      config_error("additive link must be 'logistic' or 'identity'");
    }
  } else if (type == "subprocess") {
    check_keys(j, {"type", "command", "timeout_ms"}, "subprocess backend");
    spec.kind = BackendSpec::Kind::kSubprocess;
    const auto it = j.find("command");
    if (it == j.end()) config_error("subprocess backend needs 'command'");
    if (it->is_string()) {
      spec.endpoint.command = {"/bin/sh", "-c", it->get<std::string>()};
    } else {
      spec.endpoint.command = get_or<std::vector<std::string>>(j, "command", {});
    }
    if (spec.endpoint.command.empty()) config_error("subprocess command is empty");
    spec.timeout = std::chrono::milliseconds(get_or<long long>(j, "timeout_ms", 30000));
  } else if (type == "tcp") {
    check_keys(j, {"type", "endpoint", "timeout_ms"}, "tcp backend");
    spec.kind = BackendSpec::Kind::kTcp;
    spec.endpoint.tcp = get_or<std::string>(j, "endpoint", "");
    if (spec.endpoint.tcp.empty()) config_error("tcp backend needs 'endpoint'");
    spec.timeout = std::chrono::milliseconds(get_or<long long>(j, "timeout_ms", 30000));
  } else {
    config_error("unknown backend type '" + type + "'");
  }
  if (spec.timeout.count() <= 0) config_error("timeout_ms must be positive");
  return spec;
}

DatasetSpec parse_dataset(const json& j, const fs::path& base) {
  check_keys(j, {"name", "path", "manifest"}, "dataset");
  DatasetSpec spec;
  spec.source = j;
  const auto path = get_or<std::string>(j, "path", "");
  const auto manifest = get_or<std::string>(j, "manifest", "");
  if (path.empty() || manifest.empty()) config_error("dataset needs 'path' and 'manifest'");
  spec.path = resolve(base, path);
  spec.manifest = resolve(base, manifest);
  spec.name = get_or<std::string>(j, "name", fs::path(path).stem().string());
  return spec;
}

}  // namespace

AuditConfig parse_config(const json& j, const fs::path& base_dir) {
  check_keys(j,
             {"dataset", "datasets", "models", "reference_model", "methods", "K", "K_max", "sample_limit",
              "seed", "all_pairs", "exclude_disagreements", "multiclass_brier", "drilldown_k",
              "markdown_examples", "purity_probes", "chunk_size", "lime", "kshap"},
             "config");
  AuditConfig cfg;
  try {
    if (auto it = j.find("datasets"); it != j.end()) {
      for (const auto& d : *it) cfg.datasets.push_back(parse_dataset(d, base_dir));
    }
    if (auto it = j.find("dataset"); it != j.end()) cfg.datasets.push_back(parse_dataset(*it, base_dir));
    if (cfg.datasets.empty()) config_error("config needs 'dataset' or 'datasets'");
    std::set<std::string> dataset_names;
    for (const auto& d : cfg.datasets) {
      if (!dataset_names.insert(d.name).second) config_error("duplicate dataset name '" + d.name + "'");
    }

    const auto models = j.find("models");
    if (models == j.end() || !models->is_array() || models->empty()) {
      config_error("config needs a non-empty 'models' array");
    }
    std::set<std::string> names;
    for (const auto& m : *models) {
      check_keys(m, {"name", "backend", "metadata"}, "model");
      ModelSpec spec;
      spec.name = get_or<std::string>(m, "name", "");
      if (spec.name.empty()) config_error("every model needs a name");
      if (!names.insert(spec.name).second) config_error("duplicate model name '" + spec.name + "'");
      const auto backend = m.find("backend");
      if (backend == m.end()) config_error("model '" + spec.name + "' has no backend");
      spec.backend = parse_backend(*backend, base_dir);
      if (auto it = m.find("metadata"); it != m.end()) spec.metadata = *it;
      cfg.models.push_back(std::move(spec));
    }
    cfg.reference_model = get_or<std::string>(j, "reference_model", cfg.models.front().name);
    if (!names.count(cfg.reference_model)) {
      config_error("reference_model '" + cfg.reference_model + "' is not a configured model");
    }

    if (auto it = j.find("methods"); it != j.end()) {
      cfg.methods.clear();
      for (const auto& m : *it) {
        const Method method = parse_method(m.get<std::string>());
        if (std::find(cfg.methods.begin(), cfg.methods.end(), method) == cfg.methods.end()) {
          cfg.methods.push_back(method);
        }
      }
    }
    if (cfg.methods.empty()) config_error("methods must not be empty");

    cfg.k = get_or(j, "K", cfg.k);
    cfg.k_max = get_or(j, "K_max", std::max(cfg.k_max, cfg.k));
    if (cfg.k < 1 || cfg.k > cfg.k_max) config_error("need 1 <= K <= K_max");
    if (auto it = j.find("sample_limit"); it != j.end() && !it->is_null()) {
      cfg.sample_limit = it->get<int>();
      if (*cfg.sample_limit < 0) config_error("sample_limit must be >= 0");
    }
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.all_pairs = get_or(j, "all_pairs", cfg.all_pairs);
    cfg.exclude_disagreements = get_or(j, "exclude_disagreements", cfg.exclude_disagreements);
    cfg.multiclass_brier = get_or(j, "multiclass_brier", cfg.multiclass_brier);
    cfg.drilldown_k = get_or(j, "drilldown_k", cfg.drilldown_k);
    cfg.markdown_examples = get_or(j, "markdown_examples", cfg.markdown_examples);
    cfg.purity_probes = get_or(j, "purity_probes", cfg.purity_probes);
    cfg.chunk_size = get_or(j, "chunk_size", cfg.chunk_size);
    if (cfg.drilldown_k < 1 || cfg.markdown_examples < 0 || cfg.purity_probes < 0 || cfg.chunk_size < 1) {
      config_error("drilldown_k and chunk_size must be >= 1; counts must be >= 0");
    }

    if (auto it = j.find("lime"); it != j.end()) {
      check_keys(*it, {"n_samples", "kernel_width", "ridge", "exhaustive"}, "lime");
      cfg.lime.n_samples = get_or(*it, "n_samples", cfg.lime.n_samples);
      cfg.lime.kernel_width = parse_width(*it);
      cfg.lime.ridge = get_or(*it, "ridge", cfg.lime.ridge);
      cfg.lime.exhaustive = get_or(*it, "exhaustive", cfg.lime.exhaustive);
    }
    if (cfg.lime.n_samples < 1 || !(cfg.lime.kernel_width > 0) || !(cfg.lime.ridge >= 0)) {
      config_error("lime needs n_samples >= 1, kernel_width > 0, ridge >= 0");
    }
    if (auto it = j.find("kshap"); it != j.end()) {
      check_keys(*it, {"budget", "exact_threshold", "ridge"}, "kshap");
      cfg.kshap.budget = get_or(*it, "budget", cfg.kshap.budget);
      cfg.kshap.exact_threshold = get_or(*it, "exact_threshold", cfg.kshap.exact_threshold);
      cfg.kshap.ridge = get_or(*it, "ridge", cfg.kshap.ridge);
    }
    if (cfg.kshap.exact_threshold > kMaxExactThreshold || cfg.kshap.budget < 4 || !(cfg.kshap.ridge >= 0)) {
      config_error("kshap needs exact_threshold <= 20, budget >= 4, ridge >= 0");
    }
  } catch (const json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

AuditConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json config_to_json(const AuditConfig& cfg) {
  json j;
  j["datasets"] = json::array();
  for (const auto& d : cfg.datasets) j["datasets"].push_back(d.source);
  j["models"] = json::array();
  for (const auto& m : cfg.models) {
    j["models"].push_back({{"name", m.name}, {"backend", m.backend.source}, {"metadata", m.metadata}});
  }
  j["reference_model"] = cfg.reference_model;
  j["methods"] = json::array();
  for (auto m : cfg.methods) j["methods"].push_back(std::string(to_string(m)));
  j["K"] = cfg.k;
  j["K_max"] = cfg.k_max;
  j["sample_limit"] = cfg.sample_limit ? json(*cfg.sample_limit) : json(nullptr);
  j["seed"] = cfg.seed;
  j["all_pairs"] = cfg.all_pairs;
  j["exclude_disagreements"] = cfg.exclude_disagreements;
  j["multiclass_brier"] = cfg.multiclass_brier;
  j["drilldown_k"] = cfg.drilldown_k;
  j["markdown_examples"] = cfg.markdown_examples;
  j["purity_probes"] = cfg.purity_probes;
  j["chunk_size"] = cfg.chunk_size;
  j["lime"] = {{"n_samples", cfg.lime.n_samples},
               {"kernel_width", std::isinf(cfg.lime.kernel_width) ? json("inf") : json(cfg.lime.kernel_width)},
               {"ridge", cfg.lime.ridge},
               {"exhaustive", cfg.lime.exhaustive}};
  j["kshap"] = {{"budget", cfg.kshap.budget},
                {"exact_threshold", cfg.kshap.exact_threshold},
                {"ridge", cfg.kshap.ridge}};
  return j;
}

}  // namespace trusteq
