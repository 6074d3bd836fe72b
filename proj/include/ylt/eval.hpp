#pragma once

#include <utility>
#include <vector>

#include "ylt/boxes.hpp"
#include "ylt/config.hpp"
#include "ylt/dataset.hpp"
#include "ylt/network.hpp"

namespace ylt {

inline constexpr float kEvalFloorThreshold = 0.005f;
inline constexpr double kIouMatchThreshold = 0.5;

// Per class: sort by probability descending (ties: larger area first, then
// input order), keep a detection iff its IoU with every kept same-class
// detection is <= overlap_threshold.
std::vector<Detection> nms(const std::vector<Detection>& detections, float overlap_threshold);

// Greedy in probability order (same tie-break as nms); a detection is a true
// positive iff some unmatched same-class truth has IoU >= threshold (the
// best-IoU one is consumed). Returns 1/0 labels aligned with the input order.
std::vector<char> match_detections(const std::vector<Detection>& detections,
                                   const std::vector<BoxAnnotation>& truths,
                                   double iou_threshold = kIouMatchThreshold);

struct LabeledDetection {
    float probability;
    bool is_tp;
};

struct PRPoint {
    double recall, precision, threshold;
};

struct PRCurve {
    std::vector<PRPoint> points; // ordered by descending threshold
    double ap = 0.0;
    double iou_match_threshold = kIouMatchThreshold;
};

// Sweeps every distinct confidence; AP integrates the precision envelope
// p(r) = max precision at recall >= r over the recall axis.
PRCurve compute_pr_and_ap(std::vector<LabeledDetection> labeled, int num_truths);

struct ProbabilityStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    int count = 0;
};

// Quartiles by linear interpolation over the sorted sample.
ProbabilityStats summarize_probabilities(std::vector<double> values);

struct EvalReport {
    std::vector<PRCurve> per_class; // index = class id; empty curve if no truths
    PRCurve combined;               // all classes pooled
    std::vector<ProbabilityStats> tp_probability_stats; // per class, TP probabilities
    double recommended_threshold = 0.0; // best-F1 confidence on the combined curve
    int total_truths = 0;
};

// Resize to the network input dims, infer, decode, then per-class NMS.
std::vector<Detection> forward_detect(Network& net, const Tensor& image,
                                      const RegionHeadSpec& head, float probability_threshold);

// Runs forward_detect on every sample at the low floor threshold so the full
// PR sweep is available, matches against the annotations, and aggregates.
EvalReport evaluate(Network& net, const Dataset& data, const RegionHeadSpec& head,
                    float floor_threshold = kEvalFloorThreshold);

struct GapAnalysis {
    std::vector<ProbabilityStats> known_per_class;
    ProbabilityStats unknown;
    double max_unknown = 0.0, min_known = 0.0;
    bool overlap = false; // gap is negative: no usable threshold
    double recommended_threshold = 0.0; // midpoint, valid iff !overlap
};

// known_tp: (class id, probability) of true-positive detections on known-class
// data; unknown: probabilities of all detections on unknown/distractor data.
GapAnalysis probability_gap_analysis(const std::vector<std::pair<int, double>>& known_tp,
                                     const std::vector<double>& unknown);

} // namespace ylt
