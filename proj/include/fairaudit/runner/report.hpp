#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>

#include "fairaudit/runner/analysis.hpp"
#include "fairaudit/runner/records.hpp"

namespace fairaudit::runner {

/// Markdown tables plus machine-readable CSV companions, keyed by file name.
struct RenderedReport {
  std::string markdown;
  std::map<std::string, std::string> csv_files;
};

/// "<.001" below 0.001, otherwise six decimals.
std::string format_p(double p);

/// "***" for p < .001, "**" for p < .01, "*" for p < .05, otherwise "ns".
std::string significance_stars(double p);

/// "Agent (NR) < LLM": direction symbol between the display labels.
std::string comparison_label(const PairwiseResult& pair);

RenderedReport render_tables(const ReportBundle& bundle);

/// Writes report.md and the CSV files into `out_dir`.
void write_report(const RenderedReport& report, const std::filesystem::path& out_dir);

struct PlotData {
  /// model,agent,condition,repetition,similarity — one row per scored agent output.
  std::string data_csv;
  /// model,agent,pair,p_holm,stars — one row per pairwise comparison.
  std::string annotations_csv;
};

/// Annotations are left empty (header only) when the records can't be analyzed.
PlotData emit_plot_data(std::span<const RunRecord> records);

inline constexpr const char* kPlotDataFile = "plot_data.csv";
inline constexpr const char* kPlotAnnotationsFile = "plot_annotations.csv";

void write_plot_data(const PlotData& data, const std::filesystem::path& out_dir);

}  // namespace fairaudit::runner
