// Command-line front end: audit, explain, calibrate, align, selftest.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "trusteq/audit.hpp"
#include "trusteq/error.hpp"
#include "trusteq/render.hpp"
#include "trusteq/selftest.hpp"

namespace fs = std::filesystem;
using namespace trusteq;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "trusteq-out";
  int jobs = 1;
};

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  f << content;
}

AuditConfig load(const GlobalOptions& g) {
  if (g.config.empty()) throw Error(ErrorCode::kConfigError, "--config is required");
  AuditConfig cfg = load_config(g.config);
  if (const char* env = std::getenv("TRUSTEQ_SEED"); env != nullptr && *env != '\0') {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfigError, std::string("TRUSTEQ_SEED is not an integer: ") + env);
    }
  }
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

void write_figures(const fs::path& out, const AuditReport& report, bool ksweep) {
  for (auto& [name, svg] : render_svg(report, FigureKind::kReliability)) write_file(out / "figs" / name, svg);
  if (ksweep) {
    for (auto& [name, svg] : render_svg(report, FigureKind::kKSweep)) write_file(out / "figs" / name, svg);
  }
}

int cmd_audit(const GlobalOptions& g) {
  const AuditConfig cfg = load(g);
  AuditOptions options;
  options.jobs = g.jobs;
  options.log = &std::cerr;
  const AuditReport report = run_audit(cfg, options);

  // Render everything before touching the output directory.
  const std::string json = report_to_json(report).dump(2) + "\n";
  const std::string markdown = render_markdown(report);
  std::ostringstream attributions;
  write_attributions(attributions, attribution_records(report));

  const fs::path out(g.out);
  write_file(out / "report.json", json);
  write_file(out / "report.md", markdown);
  write_file(out / "attributions.jsonl", attributions.str());
  write_figures(out, report, true);

  for (const auto& ds : report.datasets) {
    for (const auto& a : ds.alignment) {
      std::cout << ds.name << "  " << to_string(a.method) << "  " << a.model_a << " vs " << a.model_b
                << "  mean Jaccard@" << a.k << " = " << format_fixed(a.mean_jaccard, 3) << '\n';
    }
    for (const auto& c : ds.calibration) {
      std::cout << ds.name << "  " << c.model_name << "  ECE " << format_fixed(c.ece, 3) << "  MCE "
                << format_fixed(c.mce, 3) << "  Brier " << format_fixed(c.brier, 3) << '\n';
    }
  }
  std::cout << "report written to " << out.string() << '\n';
  return 0;
}

int cmd_explain(const GlobalOptions& g, const std::string& instance, const std::string& dataset, int k) {
  AuditConfig cfg = load(g);
  if (k > 0) cfg.drilldown_k = k;
  AuditOptions options;
  options.jobs = g.jobs;
  options.only_instance = instance;
  if (!dataset.empty()) options.only_dataset = dataset;
  const AuditReport report = run_audit(cfg, options);
  for (const auto& ds : report.datasets) {
    for (const auto& d : ds.drilldown) {
      std::cout << ds.name << " / " << d.instance.id << " (gold: "
                << ds.class_names[static_cast<std::size_t>(d.instance.label)] << ")\n";
      std::cout << "  A: " << d.instance.text_a << '\n';
      if (d.instance.text_b) std::cout << "  B: " << *d.instance.text_b << '\n';
      for (const auto& m : d.models) {
        std::cout << "  " << m.model << "  predicted " << ds.class_names[static_cast<std::size_t>(m.predicted)]
                  << " (" << format_fixed(m.confidence, 3) << ")\n";
        for (const auto& [method, words] : m.top) {
          std::cout << "    " << std::left << std::setw(6) << to_string(method);
          for (const auto& w : words) std::cout << "  " << w.word << " " << format_fixed(w.score, 4);
          std::cout << '\n';
        }
      }
    }
  }
  return 0;
}

int cmd_calibrate(const GlobalOptions& g) {
  const AuditConfig cfg = load(g);
  AuditOptions options;
  options.calibration_only = true;
  options.log = &std::cerr;
  const AuditReport report = run_audit(cfg, options);
  const fs::path out(g.out);
  write_file(out / "report.json", report_to_json(report).dump(2) + "\n");
  write_file(out / "report.md", render_markdown(report));
  write_figures(out, report, false);
  std::cout << render_markdown(report);
  return 0;
}

int cmd_align(const GlobalOptions& g, std::string attributions, std::string reference, int k, int k_max,
              bool all_pairs) {
  AlignmentOptions options;
  if (!g.config.empty()) {
    const AuditConfig cfg = load(g);
    if (reference.empty()) reference = cfg.reference_model;
    options.k = cfg.k;
    options.k_max = cfg.k_max;
    options.exclude_disagreements = cfg.exclude_disagreements;
    all_pairs = all_pairs || cfg.all_pairs;
  }
  if (k > 0) options.k = k;
  if (k_max > 0) options.k_max = k_max;
  options.k_max = std::max(options.k_max, options.k);
  if (attributions.empty()) attributions = (fs::path(g.out) / "attributions.jsonl").string();
  const auto records = read_attributions(attributions);
  if (reference.empty() && !records.empty()) reference = records.front().attribution.model_name;
  const AuditReport report = align_from_records(records, reference, options, all_pairs);
  const fs::path out(g.out);
  write_file(out / "alignment.json", report_to_json(report).dump(2) + "\n");
  write_file(out / "alignment.md", render_markdown(report));
  for (auto& [name, svg] : render_svg(report, FigureKind::kKSweep)) write_file(out / "figs" / name, svg);
  std::cout << render_markdown(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-equivalence audit of a compressed classifier against a reference model"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Audit configuration (JSON)");
  app.add_option("--seed", g.seed, "Global seed (overrides TRUSTEQ_SEED and the config)");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::Range(1, 256))->capture_default_str();

  auto* audit = app.add_subcommand("audit", "Full pipeline: predict, explain, align, calibrate");

  auto* explain = app.add_subcommand("explain", "Top-K words per model and method for one instance");
  std::string instance;
  std::string dataset;
  int explain_k = 0;
  explain->add_option("--instance", instance, "Instance id")->required();
  explain->add_option("--dataset", dataset, "Dataset name (default: first containing the id)");
  explain->add_option("--k", explain_k, "Words to show (default: drilldown_k)");

  auto* calibrate = app.add_subcommand("calibrate", "Calibration metrics and reliability diagrams only");

  auto* align = app.add_subcommand("align", "Alignment from a saved attributions.jsonl");
  std::string attributions;
  std::string reference;
  int align_k = 0;
  int align_k_max = 0;
  bool all_pairs = false;
  align->add_option("--attributions", attributions, "Attributions file (default: <out>/attributions.jsonl)");
  align->add_option("--reference", reference, "Reference model name");
  align->add_option("--k", align_k, "K for the headline Jaccard");
  align->add_option("--k-max", align_k_max, "Largest K in the sweep");
  align->add_flag("--all-pairs", all_pairs, "Also compare non-reference models with each other");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*audit) return cmd_audit(g);
    if (*explain) return cmd_explain(g, instance, dataset, explain_k);
    if (*calibrate) return cmd_calibrate(g);
    if (*align) return cmd_align(g, attributions, reference, align_k, align_k_max, all_pairs);
    if (*selftest) return run_selftest(std::cout, g.seed.value_or(7)) ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
