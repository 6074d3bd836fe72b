#include "ylt/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ylt/errors.hpp"

namespace ylt {
namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string class_label(const std::vector<std::string>& names, int c) {
    if (c >= 0 && c < static_cast<int>(names.size())) return names[static_cast<std::size_t>(c)];
    return "class" + std::to_string(c);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("write failed for " + path);
}

// plot geometry shared by the SVG emitters
constexpr int kWidth = 480, kHeight = 360;
constexpr int kLeft = 56, kRight = 16, kTop = 36, kBottom = 44;

double plot_x(double unit) { return kLeft + unit * (kWidth - kLeft - kRight); }
double plot_y(double unit) { return kHeight - kBottom - unit * (kHeight - kTop - kBottom); }

std::string svg_header(const std::string& title) {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) +
         " " + std::to_string(kHeight) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(kWidth / 2.0) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
    return s;
}

std::string svg_axes(const std::string& x_label, const std::string& y_label, bool unit_grid) {
    std::string s;
    if (unit_grid) {
        for (int i = 0; i <= 5; ++i) {
            const double t = i / 5.0;
            s += "<line x1=\"" + fmt(plot_x(t)) + "\" y1=\"" + fmt(plot_y(0)) + "\" x2=\"" +
                 fmt(plot_x(t)) + "\" y2=\"" + fmt(plot_y(1)) + "\" stroke=\"#dddddd\"/>\n";
            s += "<line x1=\"" + fmt(plot_x(0)) + "\" y1=\"" + fmt(plot_y(t)) + "\" x2=\"" +
                 fmt(plot_x(1)) + "\" y2=\"" + fmt(plot_y(t)) + "\" stroke=\"#dddddd\"/>\n";
            s += "<text x=\"" + fmt(plot_x(t)) + "\" y=\"" + fmt(plot_y(0) + 16) +
                 "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
                 fmt(t).substr(0, 3) + "</text>\n";
            s += "<text x=\"" + fmt(plot_x(0) - 8) + "\" y=\"" + fmt(plot_y(t) + 3) +
                 "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
                 fmt(t).substr(0, 3) + "</text>\n";
        }
    }
    s += "<rect x=\"" + fmt(plot_x(0)) + "\" y=\"" + fmt(plot_y(1)) + "\" width=\"" +
         fmt(plot_x(1) - plot_x(0)) + "\" height=\"" + fmt(plot_y(0) - plot_y(1)) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt((plot_x(0) + plot_x(1)) / 2) + "\" y=\"" +
         fmt(static_cast<double>(kHeight - 10)) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
         "</text>\n";
    s += "<text x=\"14\" y=\"" + fmt((plot_y(0) + plot_y(1)) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 " + fmt((plot_y(0) + plot_y(1)) / 2) + ")\">" + y_label +
         "</text>\n";
    return s;
}

} // namespace

std::string pr_points_csv(const EvalReport& report, const std::vector<std::string>& class_names) {
    std::string csv = "class,recall,precision\n";
    for (std::size_t c = 0; c < report.per_class.size(); ++c)
        for (const PRPoint& p : report.per_class[c].points)
            csv += class_label(class_names, static_cast<int>(c)) + "," + fmt(p.recall) + "," +
                   fmt(p.precision) + "\n";
    for (const PRPoint& p : report.combined.points)
        csv += "combined," + fmt(p.recall) + "," + fmt(p.precision) + "\n";
    return csv;
}

std::string ap_summary_csv(const EvalReport& report, const std::vector<std::string>& class_names) {
    std::string csv = "class,ap\n";
    for (std::size_t c = 0; c < report.per_class.size(); ++c)
        csv += class_label(class_names, static_cast<int>(c)) + "," +
               fmt(report.per_class[c].ap) + "\n";
    csv += "combined," + fmt(report.combined.ap) + "\n";
    return csv;
}

std::string probability_stats_csv(const EvalReport& report,
                                  const std::vector<std::string>& class_names) {
    std::string csv = "class,min,q1,median,q3,max\n";
    for (std::size_t c = 0; c < report.tp_probability_stats.size(); ++c) {
        const ProbabilityStats& s = report.tp_probability_stats[c];
        csv += class_label(class_names, static_cast<int>(c)) + "," + fmt(s.min) + "," +
               fmt(s.q1) + "," + fmt(s.median) + "," + fmt(s.q3) + "," + fmt(s.max) + "\n";
    }
    return csv;
}

std::string pr_curve_svg(const PRCurve& curve, const std::string& title) {
    std::string s = svg_header(title + "  (AP " + fmt(curve.ap) + ")");
    s += svg_axes("recall", "precision", true);
    if (!curve.points.empty()) {
        std::string pts;
        for (const PRPoint& p : curve.points)
            pts += fmt(plot_x(p.recall)) + "," + fmt(plot_y(p.precision)) + " ";
        s += "<polyline fill=\"none\" stroke=\"#c02020\" stroke-width=\"2\" points=\"" + pts +
             "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string box_plot_svg(const std::vector<ProbabilityStats>& stats,
                         const std::vector<std::string>& labels, const std::string& title) {
    std::string s = svg_header(title);
    s += svg_axes("", "probability", true);
    const std::size_t n = stats.size();
    for (std::size_t i = 0; i < n; ++i) {
        const ProbabilityStats& st = stats[i];
        const double cx = plot_x((i + 0.5) / static_cast<double>(n));
        const double half = 0.5 * (plot_x(1) - plot_x(0)) / static_cast<double>(n) * 0.5;
        const std::string label = i < labels.size() ? labels[i] : "series" + std::to_string(i);
        s += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(plot_y(0) + 16) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + label +
             "</text>\n";
        if (st.count == 0) continue;
        s += "<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(plot_y(st.min)) + "\" x2=\"" + fmt(cx) +
             "\" y2=\"" + fmt(plot_y(st.max)) + "\" stroke=\"black\"/>\n";
        s += "<rect x=\"" + fmt(cx - half) + "\" y=\"" + fmt(plot_y(st.q3)) + "\" width=\"" +
             fmt(2 * half) + "\" height=\"" + fmt(plot_y(st.q1) - plot_y(st.q3)) +
             "\" fill=\"#86b3e6\" stroke=\"black\"/>\n";
        s += "<line x1=\"" + fmt(cx - half) + "\" y1=\"" + fmt(plot_y(st.median)) + "\" x2=\"" +
             fmt(cx + half) + "\" y2=\"" + fmt(plot_y(st.median)) +
             "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string gap_stats_csv(const GapAnalysis& gap, const std::vector<std::string>& class_names) {
    std::string csv = "class,min,q1,median,q3,max\n";
    for (std::size_t c = 0; c < gap.known_per_class.size(); ++c) {
        const ProbabilityStats& s = gap.known_per_class[c];
        csv += class_label(class_names, static_cast<int>(c)) + "," + fmt(s.min) + "," +
               fmt(s.q1) + "," + fmt(s.median) + "," + fmt(s.q3) + "," + fmt(s.max) + "\n";
    }
    const ProbabilityStats& u = gap.unknown;
    csv += "unknown," + fmt(u.min) + "," + fmt(u.q1) + "," + fmt(u.median) + "," + fmt(u.q3) +
           "," + fmt(u.max) + "\n";
    return csv;
}

std::string gap_summary_csv(const GapAnalysis& gap) {
    std::string csv = "max_unknown,min_known,overlap,recommended_threshold\n";
    csv += fmt(gap.max_unknown) + "," + fmt(gap.min_known) + "," +
           (gap.overlap ? "1" : "0") + ",";
    csv += gap.overlap ? "" : fmt(gap.recommended_threshold);
    csv += "\n";
    return csv;
}

void write_eval_report(const EvalReport& report, const std::vector<std::string>& class_names,
                       const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir + ": " + ec.message());

    write_file((fs::path(dir) / "curves.csv").string(), pr_points_csv(report, class_names));
    write_file((fs::path(dir) / "ap.csv").string(), ap_summary_csv(report, class_names));
    write_file((fs::path(dir) / "prob_stats.csv").string(),
               probability_stats_csv(report, class_names));
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        const std::string label = class_label(class_names, static_cast<int>(c));
        write_file((fs::path(dir) / ("pr_" + label + ".svg")).string(),
                   pr_curve_svg(report.per_class[c], "precision-recall: " + label));
    }
    write_file((fs::path(dir) / "pr_combined.svg").string(),
               pr_curve_svg(report.combined, "precision-recall: combined"));

    std::vector<std::string> labels;
    for (std::size_t c = 0; c < report.tp_probability_stats.size(); ++c)
        labels.push_back(class_label(class_names, static_cast<int>(c)));
    write_file((fs::path(dir) / "prob_boxplot.svg").string(),
               box_plot_svg(report.tp_probability_stats, labels,
                            "true-positive probabilities per class"));
}

void write_gap_report(const GapAnalysis& gap, const std::vector<std::string>& class_names,
                      const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir + ": " + ec.message());

    write_file((fs::path(dir) / "gap_stats.csv").string(), gap_stats_csv(gap, class_names));
    write_file((fs::path(dir) / "gap_summary.csv").string(), gap_summary_csv(gap));

    std::vector<ProbabilityStats> stats = gap.known_per_class;
    stats.push_back(gap.unknown);
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < gap.known_per_class.size(); ++c)
        labels.push_back(class_label(class_names, static_cast<int>(c)));
    labels.push_back("unknown");
    write_file((fs::path(dir) / "gap_boxplot.svg").string(),
               box_plot_svg(stats, labels, "known vs unknown detection probabilities"));
}

} // namespace ylt
