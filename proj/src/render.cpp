#include "trusteq/render.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace trusteq {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string method_label(Method m) { return m == Method::kLime ? "LIME" : "SHAP"; }

// Shortest representation that parses back to the same double.
std::string coord(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string cell_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out;
}

// Dataset names end up in file names.
std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return out;
}

std::string bin_label(const Bin& bin) {
  return format_fixed(bin.lower, 1) + " -- " + format_fixed(bin.upper, 1);
}

void table_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  out << '|';
  for (const auto& c : cells) out << ' ' << c << " |";
  out << '\n';
}

void table_rule(std::ostringstream& out, std::size_t columns) {
  out << '|';
  for (std::size_t i = 0; i < columns; ++i) out << "---|";
  out << '\n';
}

const AlignmentReport* find_alignment(const DatasetAudit& ds, const std::string& a, const std::string& b,
                                      Method method) {
  for (const auto& r : ds.alignment) {
    if (r.model_a == a && r.model_b == b && r.method == method) return &r;
  }
  return nullptr;
}

std::string highlighted(const std::vector<std::string>& tokens, const std::vector<int>& feature_of,
                        const std::vector<int>& top) {
  std::string out;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!out.empty()) out += ' ';
    const bool hit = std::find(top.begin(), top.end(), feature_of[t]) != top.end();
    out += hit ? "**" + cell_escape(tokens[t]) + "**" : cell_escape(tokens[t]);
  }
  return out;
}

void render_alignment(std::ostringstream& out, const AuditReport& report) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& ds : report.datasets) {
    for (const auto& r : ds.alignment) {
      const std::pair<std::string, std::string> p{r.model_a, r.model_b};
      if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
    }
  }
  if (pairs.empty()) return;
  out << "## Interpretability alignment (Jaccard, K=" << report.k << ")\n\n";
  std::vector<std::string> header{"M1", "M2"};
  for (const auto& ds : report.datasets) {
    for (auto m : report.methods) header.push_back(cell_escape(ds.name) + " " + method_label(m));
  }
  table_row(out, header);
  table_rule(out, header.size());
  for (const auto& [a, b] : pairs) {
    std::vector<std::string> row{cell_escape(a), cell_escape(b)};
    for (const auto& ds : report.datasets) {
      for (auto m : report.methods) {
        const auto* r = find_alignment(ds, a, b, m);
        row.push_back(r ? format_fixed(r->mean_jaccard, 3) : "-");
      }
    }
    table_row(out, row);
  }
  out << '\n';

  out << "### Alignment by K\n\n";
  std::vector<std::string> sweep_header{"Dataset", "M1", "M2", "Method"};
  for (int k = 1; k <= report.k_max; ++k) sweep_header.push_back("K=" + std::to_string(k));
  table_row(out, sweep_header);
  table_rule(out, sweep_header.size());
  for (const auto& ds : report.datasets) {
    for (const auto& r : ds.alignment) {
      std::vector<std::string> row{cell_escape(ds.name), cell_escape(r.model_a), cell_escape(r.model_b),
                                   method_label(r.method)};
      for (int k = 1; k <= report.k_max; ++k) {
        const auto it = r.sweep.find(k);
        row.push_back(it == r.sweep.end() ? "-" : format_fixed(it->second, 3));
      }
      table_row(out, row);
    }
  }
  out << '\n';
}

void render_buckets(std::ostringstream& out, const DatasetAudit& ds) {
  out << "## Confidence buckets: " << ds.name << "\n\n";
  out << "Percentage of instances per confidence bucket.\n\n";
  std::vector<std::string> header{"Softmax bin"};
  for (const auto& c : ds.calibration) header.push_back(cell_escape(c.model_name));
  table_row(out, header);
  table_rule(out, header.size());
  for (int b = 0; b < kNumBins; ++b) {
    std::vector<std::string> row{bin_label(ds.calibration.front().bins.bins[static_cast<std::size_t>(b)])};
    for (const auto& c : ds.calibration) {
      row.push_back(format_fixed(c.bins.bins[static_cast<std::size_t>(b)].percent, 2));
    }
    table_row(out, row);
  }
  std::vector<std::string> footer{"**Average Confidence**"};
  for (const auto& c : ds.calibration) footer.push_back(format_fixed(c.average_confidence, 2));
  table_row(out, footer);
  out << '\n';
}

void render_metrics(std::ostringstream& out, const AuditReport& report) {
  std::vector<std::string> models;
  for (const auto& ds : report.datasets) {
    for (const auto& c : ds.calibration) {
      if (std::find(models.begin(), models.end(), c.model_name) == models.end()) models.push_back(c.model_name);
    }
  }
  if (models.empty()) return;
  out << "## Calibration metrics\n\n";
  std::vector<std::string> header{"Model"};
  for (const auto& ds : report.datasets) {
    const auto name = cell_escape(ds.name);
    header.insert(header.end(), {name + " ECE", name + " MCE", name + " Brier Score"});
  }
  table_row(out, header);
  table_rule(out, header.size());
  for (const auto& model : models) {
    std::vector<std::string> row{cell_escape(model)};
    for (const auto& ds : report.datasets) {
      const CalibrationReport* found = nullptr;
      for (const auto& c : ds.calibration) {
        if (c.model_name == model) found = &c;
      }
      if (found) {
        row.insert(row.end(), {format_fixed(found->ece, 3), format_fixed(found->mce, 3),
                               format_fixed(found->brier, 3)});
      } else {
        row.insert(row.end(), {"-", "-", "-"});
      }
    }
    table_row(out, row);
  }
  out << '\n';
}

void render_examples(std::ostringstream& out, const AuditReport& report, const DatasetAudit& ds) {
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, report.markdown_examples)),
                                           ds.drilldown.size());
  if (count == 0 || ds.spaces.size() < count) return;
  out << "## Examples: " << ds.name << "\n\n";
  for (std::size_t i = 0; i < count; ++i) {
    const InstanceDrilldown& d = ds.drilldown[i];
    const FeatureSpace& space = ds.spaces[i];
    const std::string& label = d.instance.label < static_cast<int>(ds.class_names.size())
                                   ? ds.class_names[static_cast<std::size_t>(d.instance.label)]
                                   : std::to_string(d.instance.label);
    for (auto method : report.methods) {
      out << "### " << d.instance.id << " (" << method_label(method) << "), gold label \"" << label << "\"\n\n";
      const bool pair = d.instance.text_b.has_value();
      std::vector<std::string> header{"Text A"};
      if (pair) header.push_back("Text B");
      header.insert(header.end(), {"Model", "Predicted", "Top words"});
      table_row(out, header);
      table_rule(out, header.size());
      for (const auto& m : d.models) {
        const auto top_it = m.top_ids.find(method);
        const std::vector<int> top = top_it == m.top_ids.end() ? std::vector<int>{} : top_it->second;
        std::vector<std::string> row{highlighted(space.tokens[0], space.feature_of[0], top)};
        if (pair) row.push_back(highlighted(space.tokens[1], space.feature_of[1], top));
        const std::string predicted = m.predicted < static_cast<int>(ds.class_names.size())
                                          ? ds.class_names[static_cast<std::size_t>(m.predicted)]
                                          : std::to_string(m.predicted);
        std::string words;
        if (auto w = m.top.find(method); w != m.top.end()) {
          for (const auto& word : w->second) {
            if (!words.empty()) words += ", ";
            words += cell_escape(word.word) + " (" + format_fixed(word.score, 3) + ")";
          }
        }
        row.insert(row.end(), {cell_escape(m.model), cell_escape(predicted), words});
        table_row(out, row);
      }
      out << '\n';
    }
  }
}

std::string svg_open(const std::string& title) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(kCanvasWidth) << "\" height=\""
      << coord(kCanvasHeight) << "\" viewBox=\"0 0 " << coord(kCanvasWidth) << ' ' << coord(kCanvasHeight)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << coord(kCanvasWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  return out.str();
}

void svg_axes(std::ostringstream& out, const PlotArea& area, const std::string& x_label,
              const std::string& y_label, const std::vector<std::pair<double, std::string>>& x_ticks) {
  out << "<rect class=\"frame\" x=\"" << coord(area.left) << "\" y=\"" << coord(area.top) << "\" width=\""
      << coord(area.width) << "\" height=\"" << coord(area.height) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (const auto& [value, label] : x_ticks) {
    out << "<text x=\"" << coord(area.x(value)) << "\" y=\"" << coord(area.y(0) + 16)
        << "\" text-anchor=\"middle\">" << xml_escape(label) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    out << "<line x1=\"" << coord(area.left) << "\" y1=\"" << coord(area.y(v)) << "\" x2=\""
        << coord(area.x(1)) << "\" y2=\"" << coord(area.y(v)) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << coord(area.left - 6) << "\" y=\"" << coord(area.y(v) + 4)
        << "\" text-anchor=\"end\">" << format_fixed(v, 1) << "</text>\n";
  }
  out << "<text x=\"" << coord(area.x(0.5)) << "\" y=\"" << coord(area.y(0) + 36)
      << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << coord(area.y(0.5)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << coord(area.y(0.5)) << ")\">" << xml_escape(y_label) << "</text>\n";
}

void svg_series(std::ostringstream& out, const PlotArea& area, const std::string& name, std::size_t index,
                const std::vector<std::pair<double, double>>& points) {
  const char* color = kPalette[index % std::size(kPalette)];
  out << "<polyline class=\"series\" data-name=\"" << xml_escape(name) << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out << ' ';
    out << coord(area.x(points[i].first)) << ',' << coord(area.y(points[i].second));
  }
  out << "\"/>\n";
  for (const auto& [x, y] : points) {
    out << "<circle cx=\"" << coord(area.x(x)) << "\" cy=\"" << coord(area.y(y)) << "\" r=\"3\" fill=\"" << color
        << "\"/>\n";
  }
  const double ly = area.top + 14 + 16 * static_cast<double>(index);
  out << "<line x1=\"" << coord(area.left + 10) << "\" y1=\"" << coord(ly) << "\" x2=\"" << coord(area.left + 30)
      << "\" y2=\"" << coord(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << coord(area.left + 36) << "\" y=\"" << coord(ly + 4) << "\">" << xml_escape(name)
      << "</text>\n";
}

std::string reliability_svg(const DatasetAudit& ds) {
  const PlotArea area;
  std::ostringstream out;
  out << svg_open("Reliability diagram: " + ds.name);
  std::vector<std::pair<double, std::string>> ticks;
  for (int i = 0; i <= 5; ++i) ticks.emplace_back(i / 5.0, format_fixed(i / 5.0, 1));
  svg_axes(out, area, "Confidence", "Accuracy", ticks);
  out << "<line class=\"diagonal\" x1=\"" << coord(area.x(0)) << "\" y1=\"" << coord(area.y(0)) << "\" x2=\""
      << coord(area.x(1)) << "\" y2=\"" << coord(area.y(1))
      << "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";
  for (std::size_t m = 0; m < ds.calibration.size(); ++m) {
    std::vector<std::pair<double, double>> points;
    for (const auto& p : ds.calibration[m].reliability) points.emplace_back(p.confidence, p.accuracy);
    svg_series(out, area, ds.calibration[m].model_name, m, points);
  }
  out << "</svg>\n";
  return out.str();
}

std::string ksweep_svg(const AuditReport& report, Method method) {
  const PlotArea area;
  std::ostringstream out;
  out << svg_open("Alignment vs K (" + method_label(method) + ")");
  const int k_max = std::max(1, report.k_max);
  auto x_of = [&](int k) { return k_max == 1 ? 0.5 : static_cast<double>(k - 1) / (k_max - 1); };
  std::vector<std::pair<double, std::string>> ticks;
  for (int k = 1; k <= k_max; ++k) ticks.emplace_back(x_of(k), std::to_string(k));
  svg_axes(out, area, "K", "Mean Jaccard", ticks);
  std::size_t series = 0;
  for (const auto& ds : report.datasets) {
    for (const auto& r : ds.alignment) {
      if (r.method != method) continue;
      std::vector<std::pair<double, double>> points;
      for (const auto& [k, mean] : r.sweep) points.emplace_back(x_of(k), mean);
      std::string name = r.model_a + " vs " + r.model_b;
      if (report.datasets.size() > 1) name = ds.name + ": " + name;
      svg_series(out, area, name, series++, points);
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string render_markdown(const AuditReport& report) {
  std::ostringstream out;
  out << "# Trust-equivalence audit\n\n";
  render_alignment(out, report);
  for (const auto& ds : report.datasets) {
    if (!ds.calibration.empty()) render_buckets(out, ds);
  }
  render_metrics(out, report);
  for (const auto& ds : report.datasets) render_examples(out, report, ds);
  return out.str();
}

std::vector<std::pair<std::string, std::string>> render_svg(const AuditReport& report, FigureKind kind) {
  std::vector<std::pair<std::string, std::string>> docs;
  if (kind == FigureKind::kReliability) {
    for (const auto& ds : report.datasets) {
      if (!ds.calibration.empty()) docs.emplace_back("reliability_" + file_stem(ds.name) + ".svg", reliability_svg(ds));
    }
  } else {
    for (auto method : report.methods) {
      docs.emplace_back("ksweep_" + std::string(to_string(method)) + ".svg", ksweep_svg(report, method));
    }
  }
  return docs;
}

}  // namespace trusteq
