#include "ylt/region.hpp"

#include <algorithm>
#include <cmath>

#include "ylt/errors.hpp"

namespace ylt {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct OutputView {
    const float* data;
    int batch, channels, grid_h, grid_w;

    float at(int n, int ch, int j, int i) const {
        return data[((static_cast<std::size_t>(n) * channels + ch) * grid_h + j) * grid_w + i];
    }
    std::size_t offset(int n, int ch, int j, int i) const {
        return ((static_cast<std::size_t>(n) * channels + ch) * grid_h + j) * grid_w + i;
    }
};

OutputView view_output(const Tensor& output, const RegionHeadSpec& head) {
    OutputView v{};
    if (output.ndim() == 3) {
        v = {output.data.data(), 1, output.shape[0], output.shape[1], output.shape[2]};
    } else if (output.ndim() == 4) {
        v = {output.data.data(), output.shape[0], output.shape[1], output.shape[2],
             output.shape[3]};
    } else {
        throw ConfigError("region head expects a CHW or NCHW tensor, got " +
                          shape_str(output.shape));
    }
    const int expected = required_final_filters(head.num_classes, head.num_anchors());
    if (v.channels != expected)
        throw ConfigError("region head needs " + std::to_string(expected) + " channels for " +
                          std::to_string(head.num_classes) + " classes and " +
                          std::to_string(head.num_anchors()) + " anchors, got " +
                          std::to_string(v.channels));
    return v;
}

void stable_softmax(const float* logits, std::size_t stride, int n, double* probs) {
    double max_logit = logits[0];
    for (int c = 1; c < n; ++c) max_logit = std::max(max_logit, static_cast<double>(logits[c * stride]));
    double sum = 0.0;
    for (int c = 0; c < n; ++c) {
        probs[c] = std::exp(static_cast<double>(logits[c * stride]) - max_logit);
        sum += probs[c];
    }
    for (int c = 0; c < n; ++c) probs[c] /= sum;
}

} // namespace

DecodedBox decode_box(float tx, float ty, float tw, float th, int cell_x, int cell_y,
                      double anchor_w, double anchor_h, int grid_w, int grid_h) {
    DecodedBox b;
    b.cx = (sigmoid(tx) + cell_x) / grid_w;
    b.cy = (sigmoid(ty) + cell_y) / grid_h;
    b.w = anchor_w * std::exp(static_cast<double>(tw)) / grid_w;
    b.h = anchor_h * std::exp(static_cast<double>(th)) / grid_h;
    return b;
}

std::vector<Detection> decode_detections(const Tensor& output, const RegionHeadSpec& head,
                                         float probability_threshold) {
    OutputView v = view_output(output, head);
    if (v.batch != 1) throw ConfigError("decode_detections expects a single image");
    const int C = head.num_classes;
    const int A = head.num_anchors();
    const std::size_t plane = static_cast<std::size_t>(v.grid_h) * v.grid_w;

    std::vector<Detection> detections;
    std::vector<double> probs(static_cast<std::size_t>(C));
    for (int a = 0; a < A; ++a) {
        const int base = a * (5 + C);
        for (int j = 0; j < v.grid_h; ++j) {
            for (int i = 0; i < v.grid_w; ++i) {
                const double obj = sigmoid(v.at(0, base + 4, j, i));
                stable_softmax(v.data + v.offset(0, base + 5, j, i), plane, C, probs.data());
                int best = 0;
                for (int c = 1; c < C; ++c)
                    if (probs[c] > probs[best]) best = c;
                const double p = obj * probs[best];
                if (p < probability_threshold) continue;
                DecodedBox box = decode_box(v.at(0, base, j, i), v.at(0, base + 1, j, i),
                                            v.at(0, base + 2, j, i), v.at(0, base + 3, j, i), i, j,
                                            head.anchors[a].first, head.anchors[a].second,
                                            v.grid_w, v.grid_h);
                Detection d;
                d.class_id = best;
                d.cx = static_cast<float>(box.cx);
                d.cy = static_cast<float>(box.cy);
                d.w = static_cast<float>(box.w);
                d.h = static_cast<float>(box.h);
                d.probability = static_cast<float>(p);
                detections.push_back(d);
            }
        }
    }
    return detections;
}

std::vector<TruthAssignment> assign_truths(const std::vector<BoxAnnotation>& truths,
                                           const RegionHeadSpec& head, int grid_w, int grid_h) {
    const int A = head.num_anchors();
    std::vector<char> taken(static_cast<std::size_t>(A) * grid_h * grid_w, 0);
    std::vector<TruthAssignment> assignments;
    for (std::size_t t = 0; t < truths.size(); ++t) {
        const BoxAnnotation& box = truths[t];
        const int ci = std::clamp(static_cast<int>(std::floor(box.cx * grid_w)), 0, grid_w - 1);
        const int cj = std::clamp(static_cast<int>(std::floor(box.cy * grid_h)), 0, grid_h - 1);
        int best_anchor = 0;
        double best = -1.0;
        for (int a = 0; a < A; ++a) {
            const double s = shape_iou(box.w * grid_w, box.h * grid_h, head.anchors[a].first,
                                       head.anchors[a].second);
            if (s > best) {
                best = s;
                best_anchor = a;
            }
        }
        const std::size_t slot =
            (static_cast<std::size_t>(best_anchor) * grid_h + cj) * grid_w + ci;
        if (taken[slot]) continue;
        taken[slot] = 1;
        assignments.push_back({static_cast<int>(t), ci, cj, best_anchor});
    }
    return assignments;
}

RegionTargets build_region_loss_targets(const Tensor& output,
                                        const std::vector<std::vector<BoxAnnotation>>& truths,
                                        const RegionHeadSpec& head) {
    OutputView v = view_output(output, head);
    if (static_cast<int>(truths.size()) != v.batch)
        throw ConfigError("region loss got " + std::to_string(truths.size()) +
                          " truth lists for a batch of " + std::to_string(v.batch));

    const int A = head.num_anchors();
    const int C = head.num_classes;
    RegionTargets t;
    t.batch = v.batch;
    t.anchors = A;
    t.grid_h = v.grid_h;
    t.grid_w = v.grid_w;
    t.classes = C;
    const std::size_t slots = static_cast<std::size_t>(v.batch) * A * v.grid_h * v.grid_w;
    t.coord_weight.assign(slots, 0.0f);
    t.tx.assign(slots, 0.0f);
    t.ty.assign(slots, 0.0f);
    t.tw.assign(slots, 0.0f);
    t.th.assign(slots, 0.0f);
    t.obj_weight.assign(slots, kNoObjectLossScale);
    t.obj_target.assign(slots, 0.0f);
    t.class_weight.assign(slots, 0.0f);
    t.class_target.assign(slots, -1);

    for (int n = 0; n < v.batch; ++n) {
        const std::vector<BoxAnnotation>& boxes = truths[n];
        for (int a = 0; a < A; ++a) {
            const int base = a * (5 + C);
            for (int j = 0; j < v.grid_h; ++j) {
                for (int i = 0; i < v.grid_w; ++i) {
                    if (boxes.empty()) continue;
                    const std::size_t slot =
                        ((static_cast<std::size_t>(n) * A + a) * v.grid_h + j) * v.grid_w + i;
                    DecodedBox pred = decode_box(
                        v.at(n, base, j, i), v.at(n, base + 1, j, i), v.at(n, base + 2, j, i),
                        v.at(n, base + 3, j, i), i, j, head.anchors[a].first,
                        head.anchors[a].second, v.grid_w, v.grid_h);
                    double best = 0.0;
                    for (const BoxAnnotation& box : boxes) best = std::max(best, iou(pred, box));
                    if (best > head.objectness_ignore_iou) t.obj_weight[slot] = 0.0f;
                }
            }
        }
        for (const TruthAssignment& as : assign_truths(boxes, head, v.grid_w, v.grid_h)) {
            const BoxAnnotation& box = boxes[static_cast<std::size_t>(as.truth_index)];
            const std::size_t slot =
                ((static_cast<std::size_t>(n) * A + as.anchor) * v.grid_h + as.cell_y) * v.grid_w +
                as.cell_x;
            const int base = as.anchor * (5 + C);
            t.coord_weight[slot] = kCoordLossScale;
            t.tx[slot] = static_cast<float>(box.cx * v.grid_w - as.cell_x);
            t.ty[slot] = static_cast<float>(box.cy * v.grid_h - as.cell_y);
            t.tw[slot] = std::log(box.w * v.grid_w / head.anchors[static_cast<std::size_t>(as.anchor)].first);
            t.th[slot] = std::log(box.h * v.grid_h / head.anchors[static_cast<std::size_t>(as.anchor)].second);
            DecodedBox pred = decode_box(v.at(n, base, as.cell_y, as.cell_x),
                                         v.at(n, base + 1, as.cell_y, as.cell_x),
                                         v.at(n, base + 2, as.cell_y, as.cell_x),
                                         v.at(n, base + 3, as.cell_y, as.cell_x), as.cell_x,
                                         as.cell_y, head.anchors[as.anchor].first,
                                         head.anchors[as.anchor].second, v.grid_w, v.grid_h);
            t.obj_weight[slot] = kObjectLossScale;
            t.obj_target[slot] = static_cast<float>(iou(pred, box));
            t.class_weight[slot] = kClassLossScale;
            t.class_target[slot] = box.class_id;
        }
    }
    return t;
}

double region_loss(const Tensor& output, const RegionTargets& targets, Tensor* d_output) {
    const RegionHeadSpec dims_head{targets.classes,
                                   std::vector<std::pair<float, float>>(
                                       static_cast<std::size_t>(targets.anchors), {1.0f, 1.0f})};
    OutputView v = view_output(output, dims_head);
    if (v.batch != targets.batch || v.grid_h != targets.grid_h || v.grid_w != targets.grid_w)
        throw ConfigError("region loss targets were built for a different output shape");
    if (d_output && d_output->shape != output.shape)
        throw ConfigError("region loss gradient tensor has shape " + shape_str(d_output->shape) +
                          ", expected " + shape_str(output.shape));

    const int A = targets.anchors;
    const int C = targets.classes;
    const double inv_batch = 1.0 / v.batch;
    const std::size_t plane = static_cast<std::size_t>(v.grid_h) * v.grid_w;
    float* grad = d_output ? d_output->data.data() : nullptr;
    std::vector<double> probs(static_cast<std::size_t>(C));

    double total = 0.0;
    for (int n = 0; n < v.batch; ++n) {
        for (int a = 0; a < A; ++a) {
            const int base = a * (5 + C);
            for (int j = 0; j < v.grid_h; ++j) {
                for (int i = 0; i < v.grid_w; ++i) {
                    const std::size_t slot =
                        ((static_cast<std::size_t>(n) * A + a) * v.grid_h + j) * v.grid_w + i;
                    const std::size_t o = v.offset(n, base, j, i);

                    const double cw = targets.coord_weight[slot];
                    if (cw > 0) {
                        const double sx = sigmoid(v.data[o]);
                        const double sy = sigmoid(v.data[o + plane]);
                        const double w = v.data[o + 2 * plane];
                        const double h = v.data[o + 3 * plane];
                        const double dx = sx - targets.tx[slot];
                        const double dy = sy - targets.ty[slot];
                        const double dw = w - targets.tw[slot];
                        const double dh = h - targets.th[slot];
                        total += cw * (dx * dx + dy * dy + dw * dw + dh * dh);
                        if (grad) {
                            grad[o] += static_cast<float>(inv_batch * cw * 2 * dx * sx * (1 - sx));
                            grad[o + plane] +=
                                static_cast<float>(inv_batch * cw * 2 * dy * sy * (1 - sy));
                            grad[o + 2 * plane] += static_cast<float>(inv_batch * cw * 2 * dw);
                            grad[o + 3 * plane] += static_cast<float>(inv_batch * cw * 2 * dh);
                        }
                    }

                    const double ow = targets.obj_weight[slot];
                    if (ow > 0) {
                        const double so = sigmoid(v.data[o + 4 * plane]);
                        const double diff = so - targets.obj_target[slot];
                        total += ow * diff * diff;
                        if (grad)
                            grad[o + 4 * plane] +=
                                static_cast<float>(inv_batch * ow * 2 * diff * so * (1 - so));
                    }

                    const double clw = targets.class_weight[slot];
                    if (clw > 0) {
                        stable_softmax(v.data + o + 5 * plane, plane, C, probs.data());
                        const int y = targets.class_target[slot];
                        double inner = 0.0;
                        for (int c = 0; c < C; ++c) {
                            const double diff = probs[c] - (c == y ? 1.0 : 0.0);
                            total += clw * diff * diff;
                            inner += diff * probs[c];
                        }
                        if (grad) {
                            for (int c = 0; c < C; ++c) {
                                const double diff = probs[c] - (c == y ? 1.0 : 0.0);
                                grad[o + (5 + c) * plane] += static_cast<float>(
                                    inv_batch * clw * 2 * probs[c] * (diff - inner));
                            }
                        }
                    }
                }
            }
        }
    }
    return total * inv_batch;
}

double region_forward_backward(const Tensor& output,
                               const std::vector<std::vector<BoxAnnotation>>& truths,
                               const RegionHeadSpec& head, Tensor* d_output) {
    RegionTargets targets = build_region_loss_targets(output, truths, head);
    return region_loss(output, targets, d_output);
}

} // namespace ylt
