#include "ylt/anchors.hpp"

#include <algorithm>
#include <cmath>

#include "ylt/boxes.hpp"
#include "ylt/errors.hpp"

namespace ylt {
namespace {

using Shape = std::pair<float, float>;

double shape_distance(const Shape& a, const Shape& b) {
    return 1.0 - shape_iou(a.first, a.second, b.first, b.second);
}

double area(const Shape& s) { return static_cast<double>(s.first) * s.second; }

bool area_less(const Shape& a, const Shape& b) {
    if (area(a) != area(b)) return area(a) < area(b);
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
}

int nearest(const Shape& box, const std::vector<Shape>& centroids) {
    int best = 0;
    double best_d = shape_distance(box, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = shape_distance(box, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

} // namespace

AnchorEstimate estimate_anchors(const std::vector<Shape>& boxes, int k, int grid_size,
                                std::uint64_t seed) {
    (void)seed;
    if (k < 1) throw ConfigError("anchor count must be at least 1");
    if (grid_size < 1) throw ConfigError("grid size must be at least 1");
    if (boxes.empty()) throw DataError("no boxes to estimate anchors from");
    for (const Shape& b : boxes)
        if (!(b.first > 0.0f) || !(b.second > 0.0f))
            throw DataError("anchor estimation needs strictly positive box dims");

    AnchorEstimate result;

    std::vector<Shape> distinct;
    for (const Shape& b : boxes)
        if (std::find(distinct.begin(), distinct.end(), b) == distinct.end())
            distinct.push_back(b);

    std::vector<Shape> centroids;
    if (static_cast<int>(distinct.size()) < k) {
        std::sort(distinct.begin(), distinct.end(), area_less);
        for (int i = 0; i < k; ++i) centroids.push_back(distinct[i % distinct.size()]);
        result.duplicated = true;
    } else {
        // largest box first, then farthest-point seeding
        std::size_t first = 0;
        for (std::size_t i = 1; i < boxes.size(); ++i)
            if (area(boxes[i]) > area(boxes[first])) first = i;
        centroids.push_back(boxes[first]);
        while (static_cast<int>(centroids.size()) < k) {
            std::size_t farthest = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < boxes.size(); ++i) {
                double d = shape_distance(boxes[i], centroids[0]);
                for (std::size_t c = 1; c < centroids.size(); ++c)
                    d = std::min(d, shape_distance(boxes[i], centroids[c]));
                if (d > far_d) {
                    far_d = d;
                    farthest = i;
                }
            }
            centroids.push_back(boxes[farthest]);
        }

        // Mean updates are not monotone under the IoU distance, so keep the
        // best centroids seen (the seeding included) rather than the last.
        const auto total_distortion = [&boxes](const std::vector<Shape>& cs) {
            double d = 0.0;
            for (const Shape& b : boxes) d += shape_distance(b, cs[nearest(b, cs)]);
            return d;
        };
        std::vector<Shape> best = centroids;
        double best_d = total_distortion(centroids);
        std::vector<int> assignment(boxes.size(), -1);
        for (int round = 0; round < 100; ++round) {
            bool changed = false;
            for (std::size_t i = 0; i < boxes.size(); ++i) {
                const int c = nearest(boxes[i], centroids);
                if (c != assignment[i]) {
                    assignment[i] = c;
                    changed = true;
                }
            }
            if (!changed) break;
            for (int c = 0; c < k; ++c) {
                double sw = 0.0, sh = 0.0;
                int n = 0;
                for (std::size_t i = 0; i < boxes.size(); ++i) {
                    if (assignment[i] != c) continue;
                    sw += boxes[i].first;
                    sh += boxes[i].second;
                    ++n;
                }
                if (n > 0)
                    centroids[static_cast<std::size_t>(c)] = {static_cast<float>(sw / n),
                                                              static_cast<float>(sh / n)};
            }
            const double d = total_distortion(centroids);
            if (d < best_d) {
                best_d = d;
                best = centroids;
            }
        }
        centroids = std::move(best);
    }

    std::sort(centroids.begin(), centroids.end(), area_less);

    double distortion = 0.0;
    for (const Shape& b : boxes) distortion += shape_distance(b, centroids[nearest(b, centroids)]);
    result.mean_distortion = distortion / static_cast<double>(boxes.size());

    result.anchors.reserve(centroids.size());
    for (const Shape& c : centroids)
        result.anchors.push_back({c.first * static_cast<float>(grid_size),
                                  c.second * static_cast<float>(grid_size)});
    return result;
}

} // namespace ylt
