#include <fstream>
#include <ostream>

#include "trusteq/audit.hpp"
#include "trusteq/error.hpp"

namespace trusteq {

using nlohmann::json;

namespace {

json calibration_json(const CalibrationReport& c) {
  json bins = json::array();
  for (const auto& b : c.bins.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"percent", b.percent},
                    {"mean_confidence", b.mean_confidence()},
                    {"accuracy", b.accuracy()}});
  }
  json points = json::array();
  for (const auto& p : c.reliability) {
    points.push_back({{"confidence", p.confidence}, {"accuracy", p.accuracy}, {"count", p.count}});
  }
  json j{{"model", c.model_name},
         {"num_records", c.bins.total},
         {"accuracy", c.accuracy},
         {"average_confidence", c.average_confidence},
         {"ece", c.ece},
         {"mce", c.mce},
         {"brier", c.brier},
         {"bins", std::move(bins)},
         {"reliability", std::move(points)}};
  if (c.brier_multiclass) j["brier_multiclass"] = *c.brier_multiclass;
  return j;
}

json alignment_json(const AlignmentReport& a) {
  json sweep = json::object();
  for (const auto& [k, mean] : a.sweep) sweep[std::to_string(k)] = mean;
  json instances = json::array();
  for (std::size_t i = 0; i < a.jaccard.size(); ++i) {
    instances.push_back({{"id", a.instance_ids[i]}, {"jaccard", a.jaccard[i]}});
  }
  return {{"model_a", a.model_a},
          {"model_b", a.model_b},
          {"method", std::string(to_string(a.method))},
          {"K", a.k},
          {"mean_jaccard", a.mean_jaccard},
          {"sweep", std::move(sweep)},
          {"capped_instances", a.capped_instances},
          {"excluded_instances", a.excluded_instances},
          {"instances", std::move(instances)}};
}

json drilldown_json(const InstanceDrilldown& d) {
  json models = json::array();
  for (const auto& m : d.models) {
    json top = json::object();
    for (const auto& [method, words] : m.top) {
      json list = json::array();
      for (const auto& w : words) list.push_back({{"word", w.word}, {"score", w.score}});
      top[std::string(to_string(method))] = std::move(list);
    }
    models.push_back({{"model", m.model},
                      {"predicted", m.predicted},
                      {"confidence", m.confidence},
                      {"top", std::move(top)}});
  }
  return {{"instance", d.instance.id},
          {"text_a", d.instance.text_a},
          {"text_b", d.instance.text_b ? json(*d.instance.text_b) : json(nullptr)},
          {"label", d.instance.label},
          {"models", std::move(models)}};
}

}  // namespace

json report_assumptions(const AuditReport& report) {
  return {{"features", "unique lowercase words; all occurrences of a word form one feature"},
          {"masking", report.masking == "delete" ? "delete word occurrences, join with single spaces"
                                                 : report.masking},
          {"explained_class", "each model's own predicted class"},
          {"ranking", "absolute score, ties by first occurrence"},
          {"shap_variant", "kernel shap, empty-text baseline, efficiency enforced by elimination"},
          {"lime_kernel", "sqrt(exp(-(100*cosine_distance)^2 / kernel_width^2))"},
          {"calibration_bins", kNumBins},
          {"brier", "mean squared gap between gold-label probability and 1"},
          {"capped_topk", "instances with fewer than K words use all of them"}};
}

json report_to_json(const AuditReport& report) {
  json j;
  j["toolkit"] = {{"name", kToolkitName}, {"version", kToolkitVersion}};
  j["config"] = report.config;
  j["assumptions"] = report_assumptions(report);
  j["models"] = report.models;
  j["datasets"] = json::array();
  for (const auto& ds : report.datasets) {
    json d;
    d["name"] = ds.name;
    d["num_classes"] = ds.num_classes;
    d["class_names"] = ds.class_names;
    d["num_instances"] = ds.instances.size();
    d["calibration"] = json::array();
    for (const auto& c : ds.calibration) d["calibration"].push_back(calibration_json(c));
    d["alignment"] = json::array();
    for (const auto& a : ds.alignment) d["alignment"].push_back(alignment_json(a));
    d["drilldown"] = json::array();
    for (const auto& dd : ds.drilldown) d["drilldown"].push_back(drilldown_json(dd));
    j["datasets"].push_back(std::move(d));
  }
  return j;
}

std::vector<AttributionRecord> attribution_records(const AuditReport& report) {
  std::vector<AttributionRecord> out;
  for (const auto& ds : report.datasets) {
    for (std::size_t m = 0; m < ds.attributions.size(); ++m) {
      for (const auto& [method, attrs] : ds.attributions[m]) {
        for (std::size_t i = 0; i < attrs.size(); ++i) {
          AttributionRecord rec{ds.name, attrs[i], {}};
          for (const auto& f : ds.spaces[i].features) rec.features.push_back(f.surface);
          out.push_back(std::move(rec));
        }
      }
    }
  }
  return out;
}

json attribution_to_json(const AttributionRecord& record) {
  const Attribution& a = record.attribution;
  json diag{{"n_evals", a.diagnostics.n_evals},
            {"exact", a.diagnostics.exact},
            {"ridge", a.diagnostics.ridge},
            {"ladder_steps", a.diagnostics.ladder_steps}};
  if (a.diagnostics.r2) diag["r2"] = *a.diagnostics.r2;
  return {{"dataset", record.dataset},
          {"instance", a.instance_id},
          {"model", a.model_name},
          {"method", std::string(to_string(a.method))},
          {"class", a.explained_class},
          {"scores", std::vector<double>(a.scores.data(), a.scores.data() + a.scores.size())},
          {"features", record.features},
          {"diag", std::move(diag)}};
}

AttributionRecord attribution_from_json(const json& j) {
  AttributionRecord rec;
  rec.dataset = j.value("dataset", std::string("default"));
  Attribution& a = rec.attribution;
  a.instance_id = j.at("instance").get<std::string>();
  a.model_name = j.at("model").get<std::string>();
  a.method = parse_method(j.at("method").get<std::string>());
  a.explained_class = j.at("class").get<int>();
  const auto scores = j.at("scores").get<std::vector<double>>();
  a.scores = Eigen::Map<const Eigen::VectorXd>(scores.data(), static_cast<Eigen::Index>(scores.size()));
  rec.features = j.at("features").get<std::vector<std::string>>();
  if (rec.features.size() != scores.size()) {
    throw Error(ErrorCode::kParseError, "scores and features differ in length");
  }
  if (auto it = j.find("diag"); it != j.end()) {
    a.diagnostics.n_evals = it->value("n_evals", 0);
    a.diagnostics.exact = it->value("exact", false);
    a.diagnostics.ridge = it->value("ridge", 0.0);
    a.diagnostics.ladder_steps = it->value("ladder_steps", 0);
    if (auto r2 = it->find("r2"); r2 != it->end() && r2->is_number()) a.diagnostics.r2 = r2->get<double>();
  }
  return rec;
}

void write_attributions(std::ostream& out, const std::vector<AttributionRecord>& records) {
  for (const auto& rec : records) out << attribution_to_json(rec).dump() << '\n';
}

std::vector<AttributionRecord> read_attributions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open attributions file " + path.string());
  std::vector<AttributionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(attribution_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

AuditReport align_from_records(const std::vector<AttributionRecord>& records,
                               const std::string& reference, const AlignmentOptions& options,
                               bool all_pairs) {
  if (records.empty()) throw Error(ErrorCode::kEmptyInput, "no attribution records");
  AuditReport report;
  report.k = options.k;
  report.k_max = options.k_max;
  report.markdown_examples = 0;
  report.models = json::array();

  auto index_of = [](auto& list, const auto& value) {
    auto it = std::find(list.begin(), list.end(), value);
    if (it == list.end()) {
      list.push_back(value);
      return list.size() - 1;
    }
    return static_cast<std::size_t>(it - list.begin());
  };

  std::vector<std::string> datasets;
  std::vector<std::string> models;
  // grouped[dataset][model][method] -> attributions in file order
  std::vector<std::vector<std::map<Method, std::vector<Attribution>>>> grouped;
  for (const auto& rec : records) {
    const auto d = index_of(datasets, rec.dataset);
    const auto m = index_of(models, rec.attribution.model_name);
    index_of(report.methods, rec.attribution.method);
    if (grouped.size() <= d) grouped.resize(d + 1);
    if (grouped[d].size() < models.size()) grouped[d].resize(models.size());
    grouped[d][m][rec.attribution.method].push_back(rec.attribution);
  }
  const auto ref_it = std::find(models.begin(), models.end(), reference);
  if (ref_it == models.end()) {
    throw Error(ErrorCode::kConfigError, "reference model '" + reference + "' not in attributions");
  }
  const auto ref = static_cast<std::size_t>(ref_it - models.begin());
  for (const auto& name : models) report.models.push_back({{"name", name}});

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (m != ref) pairs.emplace_back(ref, m);
  }
  if (pairs.empty()) pairs.emplace_back(ref, ref);
  if (all_pairs) {
    for (std::size_t a = 0; a < models.size(); ++a) {
      for (std::size_t b = a + 1; b < models.size(); ++b) {
        if (a != ref && b != ref) pairs.emplace_back(a, b);
      }
    }
  }

  for (std::size_t d = 0; d < datasets.size(); ++d) {
    DatasetAudit audit;
    audit.name = datasets[d];
    audit.model_names = models;
    grouped[d].resize(models.size());
    for (auto method : report.methods) {
      for (auto [a, b] : pairs) {
        auto& left = grouped[d][a][method];
        auto& right = grouped[d][b][method];
        if (left.empty() && right.empty()) continue;
        audit.alignment.push_back(align_models(left, right, options));
      }
    }
    report.datasets.push_back(std::move(audit));
  }
  return report;
}

}  // namespace trusteq
