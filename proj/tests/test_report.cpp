#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "svg_check.hpp"
#include "trusteq/audit.hpp"
#include "trusteq/error.hpp"
#include "trusteq/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace trusteq {
namespace {

const fs::path kMini = TRUSTEQ_MINI_DIR;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no trusteq::Error thrown";
  return ErrorCode::kInvalidArgument;
}

json mini_dataset() {
  return {{"name", "mini"}, {"path", (kMini / "mini.jsonl").string()}, {"manifest", (kMini / "manifest.json").string()}};
}

json additive_model(const std::string& name) {
  return {{"name", name},
          {"backend",
           {{"type", "additive"},
            {"weights", {{"great", 1.5}, {"love", 1.2}, {"broke", -1.4}, {"poor", -1.1}, {"returned", -0.8}}},
            {"link", "logistic"}}}};
}

json base_config() {
  return {{"dataset", mini_dataset()},
          {"models", json::array({additive_model("a")})},
          {"reference_model", "a"},
          {"methods", {"lime", "kshap"}},
          {"seed", 7},
          {"sample_limit", 12},
          {"lime", {{"n_samples", 200}}},
          {"kshap", {{"budget", 256}}}};
}

// --- config -----------------------------------------------------------------

TEST(Config, LoadsBundledMiniConfig) {
  const AuditConfig cfg = load_config(kMini / "audit.json");
  ASSERT_EQ(cfg.datasets.size(), 1u);
  EXPECT_EQ(cfg.datasets[0].name, "mini");
  EXPECT_EQ(cfg.datasets[0].path, kMini / "mini.jsonl");
  ASSERT_EQ(cfg.models.size(), 2u);
  EXPECT_EQ(cfg.models[1].backend.training.vocab_cap, std::optional<int>(50));
  EXPECT_FALSE(cfg.models[0].backend.training.vocab_cap.has_value());
  EXPECT_EQ(cfg.reference_model, "bow-full");
  EXPECT_EQ(cfg.k, 10);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.methods.size(), 2u);
}

TEST(Config, Defaults) {
  json j = base_config();
  j.erase("methods");
  j.erase("reference_model");
  const AuditConfig cfg = parse_config(j, ".");
  EXPECT_EQ(cfg.k, 10);
  EXPECT_EQ(cfg.k_max, 10);
  EXPECT_EQ(cfg.reference_model, "a");
  EXPECT_EQ(cfg.methods.size(), 2u);
  EXPECT_EQ(cfg.lime.n_samples, 200);
  EXPECT_EQ(cfg.kshap.exact_threshold, 13);
}

TEST(Config, Rejections) {
  auto rejects = [](const std::function<void(json&)>& edit) {
    json j = base_config();
    edit(j);
    return code_of([&] { parse_config(j, "."); }) == ErrorCode::kConfigError;
  };
  EXPECT_TRUE(rejects([](json& j) { j["colour"] = "red"; }));
  EXPECT_TRUE(rejects([](json& j) { j["reference_model"] = "nope"; }));
  EXPECT_TRUE(rejects([](json& j) { j["methods"] = json::array(); }));
  EXPECT_TRUE(rejects([](json& j) { j["methods"] = {"gradcam"}; }));
  EXPECT_TRUE(rejects([](json& j) {
    j["K"] = 12;
    j["K_max"] = 10;
  }));
  EXPECT_TRUE(rejects([](json& j) { j["K"] = 0; }));
  EXPECT_TRUE(rejects([](json& j) { j["models"] = json::array(); }));
  EXPECT_TRUE(rejects([](json& j) { j["models"].push_back(j["models"][0]); }));
  EXPECT_TRUE(rejects([](json& j) { j["models"][0]["backend"]["type"] = "magic"; }));
  EXPECT_TRUE(rejects([](json& j) { j["models"][0]["backend"]["link"] = "probit"; }));
  EXPECT_TRUE(rejects([](json& j) { j["lime"]["kernel"] = 3; }));
  EXPECT_TRUE(rejects([](json& j) { j["seed"] = "seven"; }));
  EXPECT_TRUE(rejects([](json& j) { j.erase("dataset"); }));
  EXPECT_EQ(code_of([] { load_config("/nonexistent/audit.json"); }), ErrorCode::kConfigError);
}

TEST(Config, BackendKindsAndPaths) {
  json j = base_config();
  j["dataset"] = {{"path", "data/x.jsonl"}, {"manifest", "data/m.json"}};
  j["models"] = json::array({
      {{"name", "p"}, {"backend", {{"type", "subprocess"}, {"command", "python3 bridge.py"}, {"timeout_ms", 500}}}},
      {{"name", "q"}, {"backend", {{"type", "subprocess"}, {"command", {"./model", "--fast"}}}}},
      {{"name", "t"}, {"backend", {{"type", "tcp"}, {"endpoint", "localhost:9000"}}}},
  });
  j["reference_model"] = "p";
  j["lime"]["kernel_width"] = "inf";
  const AuditConfig cfg = parse_config(j, "/base");
  EXPECT_EQ(cfg.datasets[0].path, fs::path("/base/data/x.jsonl"));
  EXPECT_EQ(cfg.datasets[0].name, "x");
  EXPECT_EQ(cfg.models[0].backend.endpoint.command, (std::vector<std::string>{"/bin/sh", "-c", "python3 bridge.py"}));
  EXPECT_EQ(cfg.models[0].backend.timeout, std::chrono::milliseconds(500));
  EXPECT_EQ(cfg.models[1].backend.endpoint.command, (std::vector<std::string>{"./model", "--fast"}));
  EXPECT_EQ(cfg.models[2].backend.endpoint.tcp, "localhost:9000");
  EXPECT_TRUE(std::isinf(cfg.lime.kernel_width));
}

TEST(Config, EchoIsStable) {
  const AuditConfig cfg = load_config(kMini / "audit.json");
  const json echo = config_to_json(cfg);
  EXPECT_EQ(echo, config_to_json(load_config(kMini / "audit.json")));
  EXPECT_EQ(echo.at("seed"), 7);
  EXPECT_TRUE(echo.contains("lime"));
  EXPECT_TRUE(echo.contains("kshap"));
}

// --- audit ------------------------------------------------------------------

TEST(Audit, SelfAlignmentIsPerfect) {
  const AuditReport report = run_audit(parse_config(base_config(), "."));
  ASSERT_EQ(report.datasets.size(), 1u);
  const DatasetAudit& ds = report.datasets[0];
  EXPECT_EQ(ds.instances.size(), 12u);
  EXPECT_EQ(ds.calibration.size(), 1u);
  ASSERT_EQ(ds.alignment.size(), 2u);
  for (const auto& r : ds.alignment) {
    EXPECT_EQ(r.model_a, "a");
    EXPECT_EQ(r.model_b, "a");
    EXPECT_EQ(r.mean_jaccard, 1.0);
    ASSERT_EQ(r.sweep.size(), 10u);
    for (const auto& [k, mean] : r.sweep) EXPECT_EQ(mean, 1.0) << k;
  }
}

TEST(Audit, IdenticalModelsAlignPerfectly) {
  json j = base_config();
  j["models"] = json::array({additive_model("a"), additive_model("b")});
  const AuditReport report = run_audit(parse_config(j, "."));
  const DatasetAudit& ds = report.datasets[0];
  ASSERT_EQ(ds.alignment.size(), 2u);
  for (const auto& r : ds.alignment) {
    EXPECT_EQ(r.model_b, "b");
    for (const auto& [k, mean] : r.sweep) EXPECT_EQ(mean, 1.0) << to_string(r.method) << " K=" << k;
  }
  EXPECT_EQ(ds.calibration[0].ece, ds.calibration[1].ece);
}

TEST(Audit, OneAttributionPerModelMethodInstance) {
  json j = base_config();
  j["models"] = json::array({additive_model("a"), additive_model("b")});
  j["all_pairs"] = true;
  const AuditReport report = run_audit(parse_config(j, "."));
  const auto records = attribution_records(report);
  EXPECT_EQ(records.size(), 2u * 2u * 12u);
  std::set<std::tuple<std::string, std::string, std::string>> keys;
  for (const auto& r : records) {
    keys.emplace(r.attribution.instance_id, r.attribution.model_name, std::string(to_string(r.attribution.method)));
    EXPECT_EQ(static_cast<Eigen::Index>(r.features.size()), r.attribution.scores.size());
  }
  EXPECT_EQ(keys.size(), records.size());
}

TEST(Audit, EmptySampleIsEmptyDataset) {
  json j = base_config();
  j["sample_limit"] = 0;
  EXPECT_EQ(code_of([&] { run_audit(parse_config(j, ".")); }), ErrorCode::kEmptyDataset);
}

TEST(Audit, ClassCountMismatchIsConfigError) {
  json j = base_config();
  j["models"] = json::array({{{"name", "f"},
                              {"backend", {{"type", "subprocess"}, {"command", {TRUSTEQ_FAKE_BACKEND, "--classes", "3"}}}}}});
  j["reference_model"] = "f";
  EXPECT_EQ(code_of([&] { run_audit(parse_config(j, ".")); }), ErrorCode::kConfigError);
}

TEST(Audit, WorkerCountDoesNotChangeReport) {
  json j = base_config();
  j["models"] = json::array({additive_model("a"),
                             {{"name", "lr"}, {"backend", {{"type", "builtin-lr"}, {"vocab_cap", 30}}}}});
  const AuditConfig cfg = parse_config(j, ".");
  AuditOptions one;
  one.jobs = 1;
  AuditOptions many;
  many.jobs = 6;
  const AuditReport a = run_audit(cfg, one);
  const AuditReport b = run_audit(cfg, many);
  EXPECT_EQ(report_to_json(a).dump(2), report_to_json(b).dump(2));
  EXPECT_EQ(render_markdown(a), render_markdown(b));
  EXPECT_EQ(render_svg(a, FigureKind::kKSweep), render_svg(b, FigureKind::kKSweep));
}

TEST(Audit, ProtocolBackendEndToEnd) {
  json j = base_config();
  j["models"] = json::array({{{"name", "fake"}, {"backend", {{"type", "subprocess"}, {"command", {TRUSTEQ_FAKE_BACKEND}}}}},
                             additive_model("a")});
  j["reference_model"] = "fake";
  const AuditReport report = run_audit(parse_config(j, "."));
  EXPECT_EQ(report.datasets[0].alignment.size(), 2u);
  for (const auto& c : report.datasets[0].calibration) EXPECT_TRUE(std::isfinite(c.ece));
}

TEST(Audit, ImpureBackendIsCaught) {
  json j = base_config();
  j["models"] = json::array(
      {{{"name", "f"}, {"backend", {{"type", "subprocess"}, {"command", {TRUSTEQ_FAKE_BACKEND, "--mode", "impure"}}}}}});
  j["reference_model"] = "f";
  EXPECT_EQ(code_of([&] { run_audit(parse_config(j, ".")); }), ErrorCode::kPurityViolation);
}

TEST(Audit, TimeoutAbortsAndNamesInstance) {
  json j = base_config();
  j["models"] = json::array({{{"name", "f"},
                              {"backend",
                               {{"type", "subprocess"},
                                {"command", {TRUSTEQ_FAKE_BACKEND, "--mode", "hang"}},
                                {"timeout_ms", 200}}}}});
  j["reference_model"] = "f";
  j["purity_probes"] = 0;
  try {
    run_audit(parse_config(j, "."));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimeout);
    EXPECT_NE(std::string(e.what()).find("r000"), std::string::npos) << e.what();
  }
}

TEST(Audit, AttributionsRoundTrip) {
  const AuditReport report = run_audit(parse_config(base_config(), "."));
  const auto records = attribution_records(report);
  const fs::path path = fs::temp_directory_path() / "trusteq_attr.jsonl";
  {
    std::ofstream out(path);
    write_attributions(out, records);
  }
  const auto back = read_attributions(path);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].attribution.scores, records[i].attribution.scores);
    EXPECT_EQ(back[i].features, records[i].features);
    EXPECT_EQ(back[i].attribution.explained_class, records[i].attribution.explained_class);
  }
  AlignmentOptions opt;
  const AuditReport aligned = align_from_records(back, "a", opt, false);
  ASSERT_EQ(aligned.datasets.size(), 1u);
  for (const auto& r : aligned.datasets[0].alignment) EXPECT_EQ(r.mean_jaccard, 1.0);
  const json line = attribution_to_json(records[0]);
  for (const char* key : {"instance", "model", "method", "class", "scores", "features", "diag"}) {
    EXPECT_TRUE(line.contains(key)) << key;
  }
}

// --- rendering --------------------------------------------------------------

// Cells of the first table row whose first cell is `first`, searching from
// the heading `section` onwards.
std::vector<std::string> row_cells(const std::string& md, const std::string& first, const std::string& section = "") {
  const auto from = section.empty() ? 0 : md.find(section);
  if (from == std::string::npos) return {};
  std::istringstream in(md.substr(from));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("| " + first + " |", 0) != 0) continue;
    std::vector<std::string> cells;
    std::size_t pos = 1;
    while (pos < line.size()) {
      const auto next = line.find(" |", pos);
      if (next == std::string::npos) break;
      cells.push_back(line.substr(pos + 1, next - pos - 1));
      pos = next + 2;
    }
    return cells;
  }
  return {};
}

AuditReport synthetic_report() {
  AuditReport report;
  report.methods = {Method::kLime};
  DatasetAudit ds;
  ds.name = "nli";
  ds.model_names = {"big", "small"};
  AlignmentReport r;
  r.model_a = "big";
  r.model_b = "small";
  r.method = Method::kLime;
  r.k = 10;
  r.mean_jaccard = 1.0 / 3.0;
  for (int k = 1; k <= 10; ++k) r.sweep[k] = 1.0;
  ds.alignment.push_back(r);
  CalibrationReport c;
  c.model_name = "big";
  c.bins.total = 10;
  for (int i = 0; i < kNumBins; ++i) {
    c.bins.bins[static_cast<std::size_t>(i)].lower = i / 10.0;
    c.bins.bins[static_cast<std::size_t>(i)].upper = (i + 1) / 10.0;
  }
  c.bins.bins[9].count = 10;
  c.bins.bins[9].percent = 100.0;
  c.average_confidence = 95.8;
  c.ece = 0.018;
  c.mce = 0.38;
  c.brier = 0.29;
  ds.calibration.push_back(c);
  c.model_name = "small";
  ds.calibration.push_back(c);
  report.datasets.push_back(ds);
  report.k_max = 10;
  return report;
}

TEST(Markdown, TableLayouts) {
  const std::string md = render_markdown(synthetic_report());
  EXPECT_EQ(row_cells(md, "big"), (std::vector<std::string>{"big", "small", "0.333"}));
  const char* bins[] = {"0.0 -- 0.1", "0.1 -- 0.2", "0.2 -- 0.3", "0.3 -- 0.4", "0.4 -- 0.5",
                        "0.5 -- 0.6", "0.6 -- 0.7", "0.7 -- 0.8", "0.8 -- 0.9", "0.9 -- 1.0"};
  for (int i = 0; i < 9; ++i) EXPECT_EQ(row_cells(md, bins[i]), (std::vector<std::string>{bins[i], "0.00", "0.00"}));
  EXPECT_EQ(row_cells(md, bins[9]), (std::vector<std::string>{bins[9], "100.00", "100.00"}));
  EXPECT_EQ(row_cells(md, "**Average Confidence**"),
            (std::vector<std::string>{"**Average Confidence**", "95.80", "95.80"}));
  EXPECT_NE(md.find("| Model | nli ECE | nli MCE | nli Brier Score |"), std::string::npos);
  EXPECT_NE(md.find("| big | 0.018 | 0.380 | 0.290 |"), std::string::npos);
  EXPECT_NE(md.find("| M1 | M2 | nli LIME |"), std::string::npos);
}

TEST(Markdown, FixedFormatting) {
  EXPECT_EQ(format_fixed(1.0 / 3.0, 3), "0.333");
  EXPECT_EQ(format_fixed(0.0, 2), "0.00");
  EXPECT_EQ(format_fixed(95.8, 2), "95.80");
  EXPECT_EQ(format_fixed(-0.0001, 3), "0.000");
  EXPECT_EQ(format_fixed(-0.25, 2), "-0.25");
}

TEST(Markdown, NumericCellsRoundTripToJson) {
  json j = base_config();
  j["models"] = json::array({additive_model("a"),
                             {{"name", "lr"}, {"backend", {{"type", "builtin-lr"}}}}});
  const AuditReport report = run_audit(parse_config(j, "."));
  const std::string md = render_markdown(report);
  const json rj = report_to_json(report);
  int checked = 0;
  for (const auto& c : rj["datasets"][0]["calibration"]) {
    const auto cells = row_cells(md, c["model"].get<std::string>(), "## Calibration metrics");
    ASSERT_EQ(cells.size(), 4u);
    EXPECT_EQ(cells[1], format_fixed(c["ece"].get<double>(), 3));
    EXPECT_EQ(cells[2], format_fixed(c["mce"].get<double>(), 3));
    EXPECT_EQ(cells[3], format_fixed(c["brier"].get<double>(), 3));
    for (int i = 1; i <= 3; ++i) {
      const double json_value = c[i == 1 ? "ece" : i == 2 ? "mce" : "brier"].get<double>();
      EXPECT_LE(std::abs(std::stod(cells[static_cast<std::size_t>(i)]) - json_value), 0.0005 + 1e-12);
      ++checked;
    }
  }
  const auto footer = row_cells(md, "**Average Confidence**");
  ASSERT_EQ(footer.size(), 3u);
  EXPECT_EQ(footer[1], format_fixed(rj["datasets"][0]["calibration"][0]["average_confidence"].get<double>(), 2));
  for (const auto& a : rj["datasets"][0]["alignment"]) {
    const auto cells = row_cells(md, a["model_a"].get<std::string>());
    ASSERT_GE(cells.size(), 4u);
    const std::size_t col = a["method"] == "lime" ? 2 : 3;
    EXPECT_EQ(cells[col], format_fixed(a["mean_jaccard"].get<double>(), 3));
    ++checked;
  }
  EXPECT_EQ(checked, 8);
}

TEST(Svg, ReliabilityDiagramStructure) {
  const AuditReport report = synthetic_report();
  const auto docs = render_svg(report, FigureKind::kReliability);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].first, "reliability_nli.svg");
  const auto svg = testing::inspect_svg(docs[0].second);
  ASSERT_TRUE(svg.well_formed) << svg.error;
  EXPECT_EQ(svg.diagonals, 1);
  EXPECT_EQ(svg.polylines, 2);
  EXPECT_NE(docs[0].second.find("width=\"640\" height=\"480\""), std::string::npos);
}

TEST(Svg, PerfectCalibrationLiesOnDiagonal) {
  std::vector<PredictionRecord> rs;
  for (double c : {0.6, 0.7, 0.8, 0.9}) {
    const int hits = static_cast<int>(std::lround(c * 10));
    for (int i = 0; i < 10; ++i) {
      rs.push_back(make_record("r", Eigen::Vector2d(1.0 - c, c), i < hits ? 1 : 0));
    }
  }
  AuditReport report;
  DatasetAudit ds;
  ds.name = "perfect";
  ds.calibration.push_back(calibrate("m", rs));
  report.datasets.push_back(ds);
  const auto svg = testing::inspect_svg(render_svg(report, FigureKind::kReliability).at(0).second);
  ASSERT_TRUE(svg.well_formed) << svg.error;
  ASSERT_EQ(svg.series.size(), 1u);
  ASSERT_EQ(svg.series[0].size(), 4u);
  const PlotArea area;
  for (const auto& [x, y] : svg.series[0]) {
    const double conf = (x - area.left) / area.width;
    const double acc = 1.0 - (y - area.top) / area.height;
    EXPECT_NEAR(conf, acc, 1e-9);
  }
}

TEST(Svg, SelfAlignmentSweepIsFlatAtOne) {
  const AuditReport report = synthetic_report();
  const auto docs = render_svg(report, FigureKind::kKSweep);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].first, "ksweep_lime.svg");
  const auto svg = testing::inspect_svg(docs[0].second);
  ASSERT_TRUE(svg.well_formed) << svg.error;
  ASSERT_EQ(svg.series.size(), 1u);
  ASSERT_EQ(svg.series[0].size(), 10u);
  for (const auto& [x, y] : svg.series[0]) EXPECT_DOUBLE_EQ(y, PlotArea{}.y(1.0));
}

TEST(Svg, NamesAreEscaped) {
  AuditReport report = synthetic_report();
  report.datasets[0].name = "a/b <c>";
  report.datasets[0].calibration[0].model_name = "x&y";
  const auto docs = render_svg(report, FigureKind::kReliability);
  EXPECT_EQ(docs[0].first, "reliability_a_b__c_.svg");
  EXPECT_TRUE(testing::inspect_svg(docs[0].second).well_formed);
}

// --- command line -------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TRUSTEQ_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path path = fs::temp_directory_path() / ("trusteq_cli_" + name + ".json");
  std::ofstream(path) << j.dump(2);
  return path;
}

TEST(Cli, ExitCodes) {
  const fs::path out = fs::temp_directory_path() / "trusteq_cli_out";
  const std::string out_flag = " --out " + out.string();
  EXPECT_EQ(run_cli("--config " + write_config("ok", base_config()).string() + out_flag + " calibrate"), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out / "figs" / "reliability_mini.svg"));

  json bad = base_config();
  bad["K"] = 50;
  bad["K_max"] = 10;
  EXPECT_EQ(run_cli("--config " + write_config("bad", bad).string() + out_flag + " audit"), 2);
  EXPECT_EQ(run_cli("--bogus-flag audit"), 2);

  json dead = base_config();
  dead["models"] = json::array({{{"name", "f"}, {"backend", {{"type", "subprocess"}, {"command", {TRUSTEQ_FAKE_BACKEND, "--mode", "die"}}}}}});
  dead["reference_model"] = "f";
  EXPECT_EQ(run_cli("--config " + write_config("dead", dead).string() + out_flag + " calibrate"), 3);

  json empty = base_config();
  empty["sample_limit"] = 0;
  EXPECT_EQ(run_cli("--config " + write_config("empty", empty).string() + out_flag + " audit"), 4);
}

TEST(Cli, AuditExplainAndAlign) {
  const fs::path out = fs::temp_directory_path() / "trusteq_cli_full";
  fs::remove_all(out);
  json j = base_config();
  j["models"] = json::array({additive_model("a"), additive_model("b")});
  const std::string cfg = " --config " + write_config("full", j).string() + " --out " + out.string();
  ASSERT_EQ(run_cli(cfg + " audit"), 0);
  for (const char* f : {"report.json", "report.md", "attributions.jsonl", "figs/reliability_mini.svg",
                        "figs/ksweep_lime.svg", "figs/ksweep_kshap.svg"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(run_cli(cfg + " explain --instance r003"), 0);
  EXPECT_EQ(run_cli(cfg + " explain --instance nope"), 4);
  EXPECT_EQ(run_cli(cfg + " align --reference a"), 0);
  EXPECT_TRUE(fs::exists(out / "alignment.json"));
  const json aligned = json::parse(std::ifstream(out / "alignment.json"));
  EXPECT_FALSE(aligned.dump().empty());
}

TEST(Cli, SeedPrecedence) {
  const fs::path a = fs::temp_directory_path() / "trusteq_seed_a";
  const fs::path b = fs::temp_directory_path() / "trusteq_seed_b";
  json j = base_config();
  j["models"] = json::array({{{"name", "lr"}, {"backend", {{"type", "builtin-lr"}}}}});
  j["reference_model"] = "lr";
  j["methods"] = {"lime"};
  const std::string cfg = " --config " + write_config("seed", j).string();
  ASSERT_EQ(run_cli(cfg + " --seed 3 --out " + a.string() + " audit"), 0);
  const std::string env = "TRUSTEQ_SEED=3 ";
  const int status = std::system((env + TRUSTEQ_CLI + cfg + " --out " + b.string() + " audit > /dev/null 2>&1").c_str());
  ASSERT_EQ(WEXITSTATUS(status), 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_NE(slurp(a / "report.json").find("\"seed\": 3"), std::string::npos);
}

}  // namespace
}  // namespace trusteq
