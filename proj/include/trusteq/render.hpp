#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trusteq/audit.hpp"

namespace trusteq {

/// Fixed-point formatting ("%.*f"), used for every numeric table cell.
std::string format_fixed(double value, int decimals);

/// Markdown report: alignment matrix (3 decimals), confidence-bucket tables
/// with an "Average Confidence" footer (2 decimals), calibration metrics
/// (3 decimals), K-sweep table and highlighted per-instance examples.
/// Sections without data are omitted.
std::string render_markdown(const AuditReport& report);

enum class FigureKind { kReliability, kKSweep };

inline constexpr double kCanvasWidth = 640;
inline constexpr double kCanvasHeight = 480;

/// Plot area inside the canvas, in user units.
struct PlotArea {
  double left = 70;
  double top = 40;
  double width = 500;
  double height = 380;

  double x(double value) const { return left + width * value; }
  double y(double value) const { return top + height * (1.0 - value); }
};

/// (file name, SVG document) pairs: reliability_<dataset>.svg per dataset or
/// ksweep_<method>.svg per method.
std::vector<std::pair<std::string, std::string>> render_svg(const AuditReport& report, FigureKind kind);

}  // namespace trusteq
