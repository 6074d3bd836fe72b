#include "ylt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ylt/errors.hpp"
#include "ylt/image.hpp"
#include "ylt/region.hpp"

namespace ylt {
namespace {

// total order: probability desc, area desc, original index asc
std::vector<std::size_t> confidence_order(const std::vector<Detection>& ds) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ds[a].probability != ds[b].probability) return ds[a].probability > ds[b].probability;
        if (ds[a].area() != ds[b].area()) return ds[a].area() > ds[b].area();
        return a < b;
    });
    return order;
}

} // namespace

std::vector<Detection> nms(const std::vector<Detection>& detections, float overlap_threshold) {
    if (!(overlap_threshold > 0.0f) || !(overlap_threshold < 1.0f))
        throw ConfigError("nms overlap threshold must lie in (0,1)");
    const std::vector<std::size_t> order = confidence_order(detections);
    std::vector<Detection> kept;
    for (std::size_t idx : order) {
        const Detection& d = detections[idx];
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (k.class_id != d.class_id) continue;
            if (iou(k, d) > overlap_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(d);
    }
    return kept;
}

std::vector<char> match_detections(const std::vector<Detection>& detections,
                                   const std::vector<BoxAnnotation>& truths,
                                   double iou_threshold) {
    std::vector<char> labels(detections.size(), 0);
    std::vector<char> used(truths.size(), 0);
    for (std::size_t idx : confidence_order(detections)) {
        const Detection& d = detections[idx];
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t t = 0; t < truths.size(); ++t) {
            if (used[t] || truths[t].class_id != d.class_id) continue;
            const double v = iou(d, truths[t]);
            if (v >= iou_threshold && v > best_iou) {
                best_iou = v;
                best = static_cast<int>(t);
            }
        }
        if (best >= 0) {
            used[static_cast<std::size_t>(best)] = 1;
            labels[idx] = 1;
        }
    }
    return labels;
}

PRCurve compute_pr_and_ap(std::vector<LabeledDetection> labeled, int num_truths) {
    if (num_truths < 1) throw DataError("AP is undefined without ground-truth instances");
    PRCurve curve;
    std::sort(labeled.begin(), labeled.end(),
              [](const LabeledDetection& a, const LabeledDetection& b) {
                  return a.probability > b.probability;
              });
    int tp = 0, fp = 0;
    for (std::size_t i = 0; i < labeled.size();) {
        const float prob = labeled[i].probability;
        for (; i < labeled.size() && labeled[i].probability == prob; ++i)
            (labeled[i].is_tp ? tp : fp) += 1;
        curve.points.push_back({static_cast<double>(tp) / num_truths,
                                static_cast<double>(tp) / (tp + fp),
                                static_cast<double>(prob)});
    }

    double envelope = 0.0, ap = 0.0;
    for (std::size_t i = curve.points.size(); i-- > 0;) {
        envelope = std::max(envelope, curve.points[i].precision);
        const double prev_recall = i == 0 ? 0.0 : curve.points[i - 1].recall;
        ap += (curve.points[i].recall - prev_recall) * envelope;
    }
    curve.ap = ap;
    return curve;
}

ProbabilityStats summarize_probabilities(std::vector<double> values) {
    ProbabilityStats stats;
    if (values.empty()) return stats;
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    stats.min = values.front();
    stats.q1 = quantile(0.25);
    stats.median = quantile(0.5);
    stats.q3 = quantile(0.75);
    stats.max = values.back();
    stats.count = static_cast<int>(values.size());
    return stats;
}

std::vector<Detection> forward_detect(Network& net, const Tensor& image,
                                      const RegionHeadSpec& head, float probability_threshold) {
    const Tensor input =
        resize_bilinear(image, net.config().input_width, net.config().input_height);
    const Tensor output = net.forward(input, Mode::infer);
    const std::vector<Detection> raw = decode_detections(output, head, probability_threshold);
    return nms(raw, head.nms_overlap_threshold);
}

EvalReport evaluate(Network& net, const Dataset& data, const RegionHeadSpec& head,
                    float floor_threshold) {
    if (data.samples.empty()) throw DataError("nothing to evaluate: dataset is empty");
    const int classes = head.num_classes;

    std::vector<std::vector<LabeledDetection>> per_class(static_cast<std::size_t>(classes));
    std::vector<LabeledDetection> pooled;
    std::vector<int> truths_per_class(static_cast<std::size_t>(classes), 0);
    std::vector<std::vector<double>> tp_probs(static_cast<std::size_t>(classes));
    EvalReport report;

    for (const AnnotatedImage& sample : data.samples) {
        for (const BoxAnnotation& b : sample.boxes) {
            if (b.class_id >= classes)
                throw DataError("annotation class id " + std::to_string(b.class_id) +
                                " exceeds the model's " + std::to_string(classes) + " classes");
            ++truths_per_class[static_cast<std::size_t>(b.class_id)];
            ++report.total_truths;
        }
        const std::vector<Detection> detections =
            forward_detect(net, sample.pixels, head, floor_threshold);
        const std::vector<char> labels = match_detections(detections, sample.boxes);
        for (std::size_t i = 0; i < detections.size(); ++i) {
            const LabeledDetection ld{detections[i].probability, labels[i] != 0};
            per_class[static_cast<std::size_t>(detections[i].class_id)].push_back(ld);
            pooled.push_back(ld);
            if (ld.is_tp)
                tp_probs[static_cast<std::size_t>(detections[i].class_id)].push_back(
                    detections[i].probability);
        }
    }

    report.per_class.resize(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c) {
        if (truths_per_class[static_cast<std::size_t>(c)] > 0)
            report.per_class[static_cast<std::size_t>(c)] = compute_pr_and_ap(
                per_class[static_cast<std::size_t>(c)], truths_per_class[static_cast<std::size_t>(c)]);
        report.tp_probability_stats.push_back(
            summarize_probabilities(tp_probs[static_cast<std::size_t>(c)]));
    }
    if (report.total_truths > 0) report.combined = compute_pr_and_ap(pooled, report.total_truths);

    double best_f1 = -1.0;
    for (const PRPoint& p : report.combined.points) {
        if (p.precision + p.recall <= 0) continue;
        const double f1 = 2.0 * p.precision * p.recall / (p.precision + p.recall);
        if (f1 > best_f1) {
            best_f1 = f1;
            report.recommended_threshold = p.threshold;
        }
    }
    return report;
}

GapAnalysis probability_gap_analysis(const std::vector<std::pair<int, double>>& known_tp,
                                     const std::vector<double>& unknown) {
    if (known_tp.empty())
        throw DataError("gap analysis needs at least one known-class true positive");
    if (unknown.empty())
        throw DataError("gap analysis needs at least one detection on unknown data");

    GapAnalysis gap;
    int max_class = 0;
    for (const auto& [cls, prob] : known_tp) max_class = std::max(max_class, cls);
    std::vector<std::vector<double>> grouped(static_cast<std::size_t>(max_class) + 1);
    gap.min_known = 2.0;
    for (const auto& [cls, prob] : known_tp) {
        grouped[static_cast<std::size_t>(cls)].push_back(prob);
        gap.min_known = std::min(gap.min_known, prob);
    }
    for (auto& g : grouped) gap.known_per_class.push_back(summarize_probabilities(std::move(g)));

    gap.unknown = summarize_probabilities(unknown);
    gap.max_unknown = gap.unknown.max;
    gap.overlap = gap.max_unknown >= gap.min_known;
    if (!gap.overlap) gap.recommended_threshold = (gap.max_unknown + gap.min_known) / 2.0;
    return gap;
}

} // namespace ylt
