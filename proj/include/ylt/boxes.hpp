#pragma once

#include <algorithm>
#include <vector>

namespace ylt {

// Ground-truth box. Coordinates are center/size fractions of the image dims.
struct BoxAnnotation {
    int class_id = 0;
    float cx = 0, cy = 0, w = 0, h = 0;
};

// Model output box, same normalized coordinate convention.
struct Detection {
    int class_id = 0;
    float cx = 0, cy = 0, w = 0, h = 0;
    float probability = 0;

    float area() const { return w * h; }
};

// Intersection over union of two center/size boxes; 0 when disjoint.
template <typename A, typename B>
double iou(const A& a, const B& b) {
    double ax0 = a.cx - a.w * 0.5, ax1 = a.cx + a.w * 0.5;
    double ay0 = a.cy - a.h * 0.5, ay1 = a.cy + a.h * 0.5;
    double bx0 = b.cx - b.w * 0.5, bx1 = b.cx + b.w * 0.5;
    double by0 = b.cy - b.h * 0.5, by1 = b.cy + b.h * 0.5;
    double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
    double ih = std::min(ay1, by1) - std::max(ay0, by0);
    if (iw <= 0 || ih <= 0) return 0.0;
    double inter = iw * ih;
    double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// IoU of two shapes placed at a common center, the anchor-matching metric.
inline double shape_iou(double w1, double h1, double w2, double h2) {
    double inter = std::min(w1, w2) * std::min(h1, h2);
    double uni = w1 * h1 + w2 * h2 - inter;
    return uni > 0 ? inter / uni : 0.0;
}

} // namespace ylt
