#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <thread>

#include "trusteq/audit.hpp"
#include "trusteq/error.hpp"

namespace trusteq {

using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, n) on `jobs` threads. Indices are handed out in
// increasing order, so the lowest failing index is always reached and its
// exception is the one rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (threads == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

[[noreturn]] void rethrow_for_instance(const std::string& id) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), "instance '" + id + "': " + e.what());
  }
}

Dataset load(const DatasetSpec& spec) {
  return load_dataset(spec.path, load_manifest(spec.manifest), spec.name);
}

std::vector<std::pair<int, int>> model_pairs(const AuditConfig& cfg) {
  std::vector<std::pair<int, int>> pairs;
  int ref = 0;
  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    if (cfg.models[m].name == cfg.reference_model) ref = static_cast<int>(m);
  }
  const auto count = static_cast<int>(cfg.models.size());
  for (int m = 0; m < count; ++m) {
    if (m != ref) pairs.emplace_back(ref, m);
  }
  if (pairs.empty()) pairs.emplace_back(ref, ref);
  if (cfg.all_pairs) {
    for (int a = 0; a < count; ++a) {
      for (int b = a + 1; b < count; ++b) {
        if (a != ref && b != ref) pairs.emplace_back(a, b);
      }
    }
  }
  return pairs;
}

void purity_probe(const PredictionBackend& backend, const std::string& model, const Dataset& ds,
                  const AuditConfig& cfg) {
  if (cfg.purity_probes == 0 || ds.instances.empty()) return;
  Engine engine = make_engine(cfg.seed, model, "purity");
  std::vector<TextPair> texts;
  for (int p = 0; p < cfg.purity_probes; ++p) {
    const auto& inst = ds.instances[uniform_index(engine, ds.instances.size())];
    texts.push_back(TextPair{inst.text_a, inst.text_b});
  }
  // Fully masked input must be accepted too.
  texts.push_back(TextPair{"", ds.instances.front().text_b ? std::optional<std::string>("") : std::nullopt});
  const Eigen::MatrixXd first = backend.predict_proba(texts);
  const Eigen::MatrixXd second = backend.predict_proba(texts);
  check_probabilities(first, static_cast<Eigen::Index>(texts.size()), backend.num_classes());
  if (second.rows() != first.rows() || (first - second).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorCode::kPurityViolation,
                "model '" + model + "' returned different probabilities for repeated inputs");
  }
}

}  // namespace

std::unique_ptr<PredictionBackend> make_backend(const ModelSpec& spec, const Dataset& train_data,
                                                std::uint64_t seed) {
  const BackendSpec& b = spec.backend;
  switch (b.kind) {
    case BackendSpec::Kind::kBuiltinLr: {
      TrainingConfig training = b.training;
      if (!b.training_seed_set) training.seed = seed;
      if (b.train_path) {
        const Dataset data = load_dataset(*b.train_path,
                                          Manifest{train_data.num_classes, train_data.class_names});
        return std::make_unique<BowLogisticModel>(train_bow_logistic(data, training, spec.name));
      }
      return std::make_unique<BowLogisticModel>(train_bow_logistic(train_data, training, spec.name));
    }
    case BackendSpec::Kind::kAdditive:
      return std::make_unique<AdditiveBackend>(b.weights, b.bias, b.link);
    case BackendSpec::Kind::kSubprocess:
    case BackendSpec::Kind::kTcp:
      return protocol_client(b.endpoint, b.timeout);
  }
  throw Error(ErrorCode::kConfigError, "unhandled backend kind");
}

AuditReport run_audit(const AuditConfig& cfg, const AuditOptions& options) {
  AuditReport report;
  report.config = config_to_json(cfg);
  report.methods = cfg.methods;
  report.k = cfg.k;
  report.k_max = cfg.k_max;
  report.markdown_examples = cfg.markdown_examples;
  report.models = json::array();
  for (const auto& m : cfg.models) {
    report.models.push_back({{"name", m.name}, {"metadata", m.metadata}});
  }
  auto log = [&](const std::string& line) {
    if (options.log) *options.log << line << '\n';
  };

  bool found_instance = !options.only_instance.has_value();
  for (const auto& spec : cfg.datasets) {
    if (options.only_dataset && spec.name != *options.only_dataset) continue;
    Dataset full = load(spec);
    Dataset ds = full;
    if (options.only_instance) {
      std::erase_if(ds.instances, [&](const Instance& i) { return i.id != *options.only_instance; });
      if (ds.instances.empty()) continue;
      found_instance = true;
    } else if (cfg.sample_limit && static_cast<std::size_t>(*cfg.sample_limit) < ds.instances.size()) {
      ds.instances.resize(static_cast<std::size_t>(*cfg.sample_limit));
    }
    if (ds.instances.empty()) {
      throw Error(ErrorCode::kEmptyDataset, "dataset '" + ds.name + "' has no instances to audit");
    }
    log("dataset " + ds.name + ": " + std::to_string(ds.instances.size()) + " instances");

    DatasetAudit audit;
    audit.name = ds.name;
    audit.num_classes = ds.num_classes;
    audit.class_names = ds.class_names;
    audit.instances = ds.instances;

    std::vector<std::unique_ptr<PredictionBackend>> backends;
    for (const auto& m : cfg.models) {
      auto backend = make_backend(m, full, cfg.seed);
      if (backend->num_classes() != ds.num_classes) {
        throw Error(ErrorCode::kConfigError, "model '" + m.name + "' has " +
                                                 std::to_string(backend->num_classes()) +
                                                 " classes, dataset '" + ds.name + "' has " +
                                                 std::to_string(ds.num_classes));
      }
      purity_probe(*backend, m.name, ds, cfg);
      audit.model_names.push_back(m.name);
      backends.push_back(std::move(backend));
    }

    // (1) predictions and (2) calibration.
    const std::size_t n = ds.instances.size();
    std::vector<std::vector<PredictionRecord>> records(backends.size());
    for (std::size_t m = 0; m < backends.size(); ++m) {
      std::vector<TextPair> batch;
      for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.chunk_size)) {
        const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.chunk_size));
        batch.clear();
        for (std::size_t i = start; i < stop; ++i) {
          batch.push_back(TextPair{ds.instances[i].text_a, ds.instances[i].text_b});
        }
        Eigen::MatrixXd probs;
        try {
          probs = backends[m]->predict_proba(batch);
          check_probabilities(probs, static_cast<Eigen::Index>(batch.size()), ds.num_classes);
        } catch (const Error&) {
          rethrow_for_instance(ds.instances[start].id);
        }
        for (std::size_t i = start; i < stop; ++i) {
          records[m].push_back(make_record(ds.instances[i].id,
                                           probs.row(static_cast<Eigen::Index>(i - start)).transpose(),
                                           ds.instances[i].label));
        }
      }
      audit.calibration.push_back(calibrate(cfg.models[m].name, records[m], cfg.multiclass_brier));
    }

    if (options.calibration_only) {
      report.datasets.push_back(std::move(audit));
      continue;
    }

    // (3) attributions, parallel over instances.
    audit.spaces.resize(n);
    audit.attributions.assign(backends.size(), {});
    for (auto& per_model : audit.attributions) {
      for (auto method : cfg.methods) per_model[method].resize(n);
    }
    parallel_for(n, options.jobs, [&](std::size_t i) {
      const Instance& inst = ds.instances[i];
      try {
        audit.spaces[i] = tokenize(inst);
        for (std::size_t m = 0; m < backends.size(); ++m) {
          for (auto method : cfg.methods) {
            Engine engine = make_engine(cfg.seed, inst.id, to_string(method));
            Attribution attr;
            if (method == Method::kLime) {
              LimeConfig lc = cfg.lime;
              lc.target_class = records[m][i].predicted;
              lc.chunk_size = cfg.chunk_size;
              attr = explain_lime(*backends[m], inst, audit.spaces[i], lc, engine);
            } else {
              KshapConfig kc = cfg.kshap;
              kc.target_class = records[m][i].predicted;
              kc.chunk_size = cfg.chunk_size;
              attr = explain_kshap(*backends[m], inst, audit.spaces[i], kc, engine);
            }
            attr.model_name = cfg.models[m].name;
            audit.attributions[m][method][i] = std::move(attr);
          }
        }
      } catch (const Error&) {
        rethrow_for_instance(inst.id);
      }
    });
    log("dataset " + ds.name + ": attributions done");

    // (4) alignment.
    AlignmentOptions align_options{cfg.k, cfg.k_max, cfg.exclude_disagreements};
    for (auto method : cfg.methods) {
      for (auto [a, b] : model_pairs(cfg)) {
        audit.alignment.push_back(align_models(audit.attributions[static_cast<std::size_t>(a)][method],
                                               audit.attributions[static_cast<std::size_t>(b)][method],
                                               align_options));
      }
    }

    // (5) drill-down.
    for (std::size_t i = 0; i < n; ++i) {
      InstanceDrilldown entry;
      entry.instance = ds.instances[i];
      for (std::size_t m = 0; m < backends.size(); ++m) {
        DrilldownModel dm;
        dm.model = cfg.models[m].name;
        dm.predicted = records[m][i].predicted;
        dm.confidence = records[m][i].confidence;
        for (auto method : cfg.methods) {
          const Attribution& attr = audit.attributions[m][method][i];
          const auto order = rank_features(attr.scores);
          const auto keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.drilldown_k), order.size());
          for (std::size_t r = 0; r < keep; ++r) {
            const int id = order[r];
            dm.top[method].push_back({audit.spaces[i].features[static_cast<std::size_t>(id)].surface,
                                      attr.scores[id]});
            dm.top_ids[method].push_back(id);
          }
        }
        entry.models.push_back(std::move(dm));
      }
      audit.drilldown.push_back(std::move(entry));
    }

    for (const auto& backend : backends) {
      if (auto token = backend->mask_token()) report.masking = "token:" + *token;
    }
    report.datasets.push_back(std::move(audit));
  }
  if (!found_instance) {
    throw Error(ErrorCode::kEmptyDataset, "instance '" + *options.only_instance + "' not found");
  }
  if (report.datasets.empty()) throw Error(ErrorCode::kEmptyDataset, "no dataset selected");
  return report;
}

}  // namespace trusteq
