#pragma once

#include <string>
#include <vector>

#include "ylt/eval.hpp"

namespace ylt {

// All emitters produce byte-stable output for fixed inputs.

std::string pr_points_csv(const EvalReport& report, const std::vector<std::string>& class_names);
std::string ap_summary_csv(const EvalReport& report, const std::vector<std::string>& class_names);
std::string probability_stats_csv(const EvalReport& report,
                                  const std::vector<std::string>& class_names);

std::string pr_curve_svg(const PRCurve& curve, const std::string& title);
std::string box_plot_svg(const std::vector<ProbabilityStats>& stats,
                         const std::vector<std::string>& labels, const std::string& title);

std::string gap_stats_csv(const GapAnalysis& gap, const std::vector<std::string>& class_names);
std::string gap_summary_csv(const GapAnalysis& gap);

// curves.csv, ap.csv, prob_stats.csv, pr_<class>.svg, pr_combined.svg,
// prob_boxplot.svg under `dir` (created if missing).
void write_eval_report(const EvalReport& report, const std::vector<std::string>& class_names,
                       const std::string& dir);
// gap_stats.csv, gap_summary.csv, gap_boxplot.svg under `dir`.
void write_gap_report(const GapAnalysis& gap, const std::vector<std::string>& class_names,
                      const std::string& dir);

} // namespace ylt
