// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "games.hpp"
#include "svg_check.hpp"
#include "trusteq/alignment.hpp"
#include "trusteq/audit.hpp"
#include "trusteq/calibration.hpp"
#include "trusteq/kshap.hpp"
#include "trusteq/lime.hpp"
#include "trusteq/render.hpp"

namespace fs = std::filesystem;
using namespace trusteq;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kMini = TRUSTEQ_MINI_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  Outcome result;
  try {
    result = body();
  } catch (const std::exception& e) {
    result = {false, std::string("exception: ") + e.what()};
  }
  if (!result.ok) ++failures;
  std::cout << (result.ok ? "[PASS] " : "[FAIL] ") << name;
  if (!result.detail.empty()) std::cout << " -- " << result.detail;
  std::cout << std::endl;
}

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Largest |sum(phi) - (v(full) - v(empty))| over every Kernel SHAP run.
double worst_efficiency_gap = 0;
int efficiency_runs = 0;

void record_efficiency(const Eigen::VectorXd& phi, double full, double empty) {
  worst_efficiency_gap = std::max(worst_efficiency_gap, std::abs(phi.sum() - (full - empty)));
  ++efficiency_runs;
}

// v(full) and v(empty) straight from the backend.
std::pair<double, double> endpoints(const PredictionBackend& backend, const Instance& inst, const FeatureSpace& space,
                                    int target) {
  const ValueFunction v = backend_value_function(backend, inst, space, target);
  MaskMatrix masks(2, space.size());
  masks.row(0).setOnes();
  masks.row(1).setZero();
  const Eigen::VectorXd values = v.evaluate(masks);
  return {values[0], values[1]};
}

Outcome shapley_oracle() {
  const auto start = Clock::now();
  double worst = 0;
  int games = 0;
  for (int d = 3; d <= 10; ++d) {
    for (int g = 0; g < 20; ++g) {
      Engine setup = make_engine(7, "oracle-" + std::to_string(d) + "-" + std::to_string(g), "table");
      const auto table = testing::random_table(d, setup);
      const testing::TableBackend backend(table);
      const Instance inst = testing::TableBackend::instance(d);
      const FeatureSpace space = tokenize(inst);
      Engine engine = make_engine(7, inst.id, "kshap");
      const Attribution attr = explain_kshap(backend, inst, space, KshapConfig{}, engine);
      if (!attr.diagnostics.exact) return {false, "d=" + std::to_string(d) + " did not run in exact mode"};
      const Eigen::VectorXd oracle =
          exact_shapley(backend_value_function(backend, inst, space, attr.explained_class));
      worst = std::max(worst, (attr.scores - oracle).cwiseAbs().maxCoeff());
      const auto [full, empty] = endpoints(backend, inst, space, attr.explained_class);
      record_efficiency(attr.scores, full, empty);
      ++games;
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-6 && elapsed < 10.0, std::to_string(games) + " games, max |diff| " + num(worst) +
                                               " (tol 1e-6), " + num(elapsed) + " s (limit 10 s)"};
}

Outcome efficiency_axiom() {
  // Sampled mode on random games.
  for (int d : {14, 16, 20}) {
    for (int budget : {2 * d + 2, 128, 512, 2048}) {
      Engine engine = make_engine(7, "efficiency-" + std::to_string(d), std::to_string(budget));
      const auto table = testing::random_table(d, engine);
      KshapConfig cfg;
      cfg.budget = budget;
      const ShapleyFit fit = solve_kernel_shap(testing::table_game(d, table), cfg, engine);
      record_efficiency(fit.phi, (*table)[table->size() - 1], (*table)[0]);
    }
  }
  // Both modes on the bundled dataset with trained models.
  const AuditConfig cfg = load_config(kMini / "audit.json");
  const Dataset ds = load_dataset(cfg.datasets[0].path, load_manifest(cfg.datasets[0].manifest), "mini");
  int sampled = 0;
  for (const auto& spec : cfg.models) {
    const auto backend = make_backend(spec, ds, cfg.seed);
    for (const auto& inst : ds.instances) {
      const FeatureSpace space = tokenize(inst);
      Engine engine = make_engine(cfg.seed, inst.id, "kshap");
      const Attribution attr = explain_kshap(*backend, inst, space, cfg.kshap, engine);
      const auto [full, empty] = endpoints(*backend, inst, space, attr.explained_class);
      record_efficiency(attr.scores, full, empty);
      if (!attr.diagnostics.exact) ++sampled;
    }
  }
  return {worst_efficiency_gap <= 1e-6 && sampled > 0,
          std::to_string(efficiency_runs) + " runs (" + std::to_string(sampled) +
              " sampled on dataset instances), max gap " + num(worst_efficiency_gap) + " (tol 1e-6)"};
}

Outcome lime_recovery() {
  double worst = 0;
  for (int d = 2; d <= 8; ++d) {
    Engine engine = make_engine(7, "lime-recovery-" + std::to_string(d), "weights");
    std::map<std::string, double> weights;
    std::string text;
    for (int j = 0; j < d; ++j) {
      const std::string word = "w" + std::to_string(j);
      weights[word] = 2.0 * uniform_unit(engine) - 1.0;
      text += (j ? " " : "") + word;
    }
    const AdditiveBackend backend(weights, 0.0, Link::kIdentity);
    const Instance inst{"lime-" + std::to_string(d), text, std::nullopt, 1};
    const FeatureSpace space = tokenize(inst);
    LimeConfig cfg;
    cfg.exhaustive = true;
    cfg.kernel_width = std::numeric_limits<double>::infinity();
    cfg.ridge = 1e-9;
    cfg.target_class = 1;
    const Attribution attr = explain_lime(backend, inst, space, cfg, engine);
    for (const auto& f : space.features) worst = std::max(worst, std::abs(attr.scores[f.id] - weights.at(f.surface)));
  }
  return {worst <= 1e-4, "d=2..8, max |score - weight| " + num(worst) + " (tol 1e-4)"};
}

Outcome calibration_fixtures() {
  auto rec = [](double conf, bool correct) {
    return make_record("r", Eigen::Vector2d(1.0 - conf, conf), correct ? 1 : 0);
  };
  const std::vector<PredictionRecord> fixture{rec(0.8, true), rec(0.8, true), rec(0.8, true), rec(0.6, false)};
  const BinStats stats = bucket(fixture);
  const double e = ece(stats);
  const double m = mce(stats);
  const std::vector<PredictionRecord> pair{make_record("a", Eigen::Vector2d(0.0, 1.0), 1),
                                           make_record("b", Eigen::Vector2d(0.5, 0.5), 1)};
  const double b = brier(pair);

  std::vector<PredictionRecord> perfect;
  for (double c : {0.6, 0.7, 0.8, 0.9, 1.0}) {
    const int hits = static_cast<int>(std::lround(c * 10));
    for (int i = 0; i < 10; ++i) perfect.push_back(rec(c, i < hits));
  }
  const BinStats perfect_stats = bucket(perfect);
  const double pe = ece(perfect_stats);
  const double pm = mce(perfect_stats);

  Engine engine(7);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + static_cast<int>(uniform_index(engine, 100));
    const int classes = 2 + static_cast<int>(uniform_index(engine, 3));
    std::vector<PredictionRecord> rs;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd p(classes);
      for (int c = 0; c < classes; ++c) p[c] = -std::log(1.0 - uniform_unit(engine));
      rs.push_back(make_record("x", p / p.sum(), static_cast<int>(uniform_index(engine, classes))));
    }
    const BinStats s = bucket(rs);
    if (mce(s) < ece(s)) ++violations;
  }
  const bool ok = std::abs(e - 0.30) <= 1e-12 && std::abs(m - 0.60) <= 1e-12 && std::abs(b - 0.125) <= 1e-12 &&
                  pe <= 1e-9 && pm <= 1e-9 && violations == 0;
  return {ok, "ECE " + num(e) + ", MCE " + num(m) + ", Brier " + num(b) + ", perfect set ECE/MCE " + num(pe) + "/" +
                  num(pm) + ", mce<ece in " + std::to_string(violations) + "/1000 random sets"};
}

Outcome alignment_properties() {
  const TopKSet a{"x", "m", Method::kLime, 10, 20, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  const TopKSet b{"x", "m", Method::kLime, 10, 20, {5, 6, 7, 8, 9, 10, 11, 12, 13, 14}};
  const bool identity = jaccard(a, a) == 1.0;
  const bool five_of_fifteen = jaccard(a, b) == 5.0 / 15.0;

  Engine engine(7);
  int asymmetric = 0;
  int rescale_changes = 0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 1 + static_cast<int>(uniform_index(engine, 40));
    Attribution x;
    x.instance_id = "i" + std::to_string(t);
    x.scores.resize(d);
    for (int j = 0; j < d; ++j) x.scores[j] = uniform_unit(engine) - 0.5;
    Attribution y = x;
    for (int j = 0; j < d; ++j) y.scores[j] = uniform_unit(engine) - 0.5;
    Attribution scaled = x;
    scaled.scores *= std::exp(8.0 * uniform_unit(engine) - 4.0);
    for (int k = 1; k <= 10; ++k) {
      if (jaccard(top_k(x, k), top_k(y, k)) != jaccard(top_k(y, k), top_k(x, k))) ++asymmetric;
      if (top_k(x, k).feature_ids != top_k(scaled, k).feature_ids) ++rescale_changes;
    }
  }

  // Self-alignment through the full audit pipeline.
  AuditConfig cfg = load_config(kMini / "audit.json");
  cfg.models.resize(1);
  cfg.reference_model = cfg.models[0].name;
  const AuditReport report = run_audit(cfg);
  int sweep_points = 0;
  double worst = 1.0;
  for (const auto& r : report.datasets.at(0).alignment) {
    for (int k = 1; k <= 10; ++k) {
      worst = std::min(worst, r.sweep.at(k));
      ++sweep_points;
    }
  }
  const bool self = sweep_points == 20 && worst == 1.0;
  return {identity && five_of_fifteen && asymmetric == 0 && rescale_changes == 0 && self,
          std::string("J(A,A)=1 ") + (identity ? "yes" : "no") + ", 5-of-15 exact " + (five_of_fifteen ? "yes" : "no") +
              ", asymmetric pairs " + std::to_string(asymmetric) + ", rescaling changes " +
              std::to_string(rescale_changes) + "/1000 attributions x K=1..10, self-alignment min " + num(worst) +
              " over " + std::to_string(sweep_points) + " (method, K) points"};
}

struct EndToEnd {
  bool ran = false;
  fs::path out1;
  fs::path out8;
  double seconds1 = 0;
  double seconds8 = 0;
  int status1 = -1;
  int status8 = -1;
};

EndToEnd e2e;

int run_cli(const std::string& args) {
  const int status = std::system((std::string(TRUSTEQ_CLI) + " " + args + " > /dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end() {
  const fs::path root = fs::temp_directory_path() / "trusteq_acceptance";
  fs::remove_all(root);
  e2e.out1 = root / "jobs1";
  e2e.out8 = root / "jobs8";
  const std::string common = "--config " + (kMini / "audit.json").string() + " --seed 7";
  auto start = Clock::now();
  e2e.status1 = run_cli(common + " --jobs 1 --out " + e2e.out1.string() + " audit");
  e2e.seconds1 = seconds_since(start);
  start = Clock::now();
  e2e.status8 = run_cli(common + " --jobs 8 --out " + e2e.out8.string() + " audit");
  e2e.seconds8 = seconds_since(start);
  e2e.ran = true;
  if (e2e.status1 != 0 || e2e.status8 != 0) {
    return {false, "audit exit codes " + std::to_string(e2e.status1) + " / " + std::to_string(e2e.status8)};
  }
  const std::string r1 = slurp(e2e.out1 / "report.json");
  const std::string r8 = slurp(e2e.out8 / "report.json");
  const bool same = !r1.empty() && r1 == r8;
  const bool rest = slurp(e2e.out1 / "report.md") == slurp(e2e.out8 / "report.md") &&
                    slurp(e2e.out1 / "attributions.jsonl") == slurp(e2e.out8 / "attributions.jsonl");
  const nlohmann::json report = nlohmann::json::parse(r1);
  bool in_range = true;
  int pairs = 0;
  for (const auto& a : report["datasets"][0]["alignment"]) {
    const double m = a["mean_jaccard"].get<double>();
    in_range = in_range && m >= 0.0 && m <= 1.0;
    ++pairs;
  }
  const bool fast = e2e.seconds1 < 120.0 && e2e.seconds8 < 120.0;
  return {same && in_range && pairs == 2 && fast,
          std::string("report.json ") + (same ? "byte-identical" : "DIFFERS") + " (" + std::to_string(r1.size()) +
              " bytes), markdown+attributions " + (rest ? "identical" : "differ") + ", jobs=1 " + num(e2e.seconds1) +
              " s, jobs=8 " + num(e2e.seconds8) + " s (limit 120 s)"};
}

std::vector<std::string> lines_starting(const std::string& text, const std::string& prefix) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) out.push_back(line);
  }
  return out;
}

bool decimals_are(const std::string& cell, int decimals) {
  const auto dot = cell.find('.');
  if (dot == std::string::npos || cell.size() - dot - 1 != static_cast<std::size_t>(decimals)) return false;
  return cell.find_first_not_of("-0123456789.") == std::string::npos;
}

std::vector<std::string> split_row(const std::string& line) {
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

Outcome renderer_fixtures() {
  if (!e2e.ran || e2e.status1 != 0) return {false, "needs the end-to-end audit output"};
  const std::string md = slurp(e2e.out1 / "report.md");
  std::vector<std::string> problems;

  const char* bins[] = {"0.0 -- 0.1", "0.1 -- 0.2", "0.2 -- 0.3", "0.3 -- 0.4", "0.4 -- 0.5",
                        "0.5 -- 0.6", "0.6 -- 0.7", "0.7 -- 0.8", "0.8 -- 0.9", "0.9 -- 1.0"};
  for (const char* bin : bins) {
    const auto rows = lines_starting(md, std::string("| ") + bin + " |");
    if (rows.size() != 1) {
      problems.push_back(std::string("bin row ") + bin);
      continue;
    }
    const auto cells = split_row(rows[0]);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (!decimals_are(cells[i], 2)) problems.push_back(std::string("bin cell ") + cells[i]);
    }
  }
  const auto footer = lines_starting(md, "| **Average Confidence** |");
  if (footer.size() != 1 || split_row(footer[0]).size() != 3) problems.push_back("Average Confidence footer");
  const auto alignment = lines_starting(md, "| bow-full | bow-cap50 |");
  if (alignment.empty()) problems.push_back("alignment row");
  for (const auto& row : alignment) {
    const auto cells = split_row(row);
    if (cells.size() != 4) problems.push_back("alignment cells");
    for (std::size_t i = 2; i < cells.size(); ++i) {
      if (!decimals_are(cells[i], 3)) problems.push_back("alignment cell " + cells[i]);
    }
  }
  if (md.find("| M1 | M2 | mini LIME | mini SHAP |") == std::string::npos) problems.push_back("alignment header");
  if (md.find("| Model | mini ECE | mini MCE | mini Brier Score |") == std::string::npos) {
    problems.push_back("metrics header");
  }
  if (md.find("**") == std::string::npos) problems.push_back("highlighted examples");

  int svgs = 0;
  const auto reliability = testing::inspect_svg(slurp(e2e.out1 / "figs" / "reliability_mini.svg"));
  if (!reliability.well_formed) problems.push_back("reliability svg: " + reliability.error);
  if (reliability.diagonals != 1) problems.push_back("reliability diagonal");
  if (reliability.polylines != 2) problems.push_back("reliability polylines " + std::to_string(reliability.polylines));
  ++svgs;
  for (const char* name : {"ksweep_lime.svg", "ksweep_kshap.svg"}) {
    const auto sweep = testing::inspect_svg(slurp(e2e.out1 / "figs" / name));
    if (!sweep.well_formed) problems.push_back(std::string(name) + ": " + sweep.error);
    if (sweep.polylines != 1 || sweep.series[0].size() != 10) problems.push_back(std::string(name) + " series");
    ++svgs;
  }

  std::string detail = "10 bin rows + footer, 3-decimal alignment cells, " + std::to_string(svgs) +
                       " SVGs well-formed with diagonal and one polyline per model/pair";
  if (!problems.empty()) {
    detail = "problems:";
    for (const auto& p : problems) detail += " [" + p + "]";
  }
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  criterion("Shapley oracle equivalence", shapley_oracle);
  criterion("Efficiency axiom", efficiency_axiom);
  criterion("LIME recovery", lime_recovery);
  criterion("Calibration fixtures", calibration_fixtures);
  criterion("Alignment properties", alignment_properties);
  criterion("End-to-end determinism", end_to_end);
  criterion("Renderer fixtures", renderer_fixtures);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
