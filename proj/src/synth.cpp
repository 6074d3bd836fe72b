#include "ylt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ylt/errors.hpp"
#include "ylt/image.hpp"

namespace ylt {
namespace {

struct Rgb {
    float r, g, b;
};

Rgb from_hsv(float h, float s, float v) {
    Rgb c;
    hsv_to_rgb(h, s, v, c.r, c.g, c.b);
    return c;
}

float class_hue(int class_id) {
    const double h = 0.13 + 0.61803398875 * class_id;
    return static_cast<float>(h - std::floor(h));
}

struct PixelRect {
    int x0, y0, x1, y1; // [x0, x1) x [y0, y1)
};

void fill_rect(Tensor& img, const PixelRect& r, const Rgb& c) {
    const int h = img.shape[1], w = img.shape[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            img.data[i] = c.r;
            img.data[plane + i] = c.g;
            img.data[2 * plane + i] = c.b;
        }
    }
}

void draw_product(Tensor& img, const PixelRect& r, int class_id) {
    const float hue = class_hue(class_id);
    const Rgb base = from_hsv(hue, 0.72f, 0.88f);
    const Rgb stripe = from_hsv(hue, 0.72f, 0.45f);
    const Rgb border = from_hsv(hue, 0.65f, 0.20f);
    fill_rect(img, r, base);

    const int period = 4 + (class_id % 3) * 2;
    const bool horizontal = class_id % 2 == 0;
    if (horizontal) {
        for (int y = r.y0 + 2; y + 2 <= r.y1 - 2; y += period)
            fill_rect(img, {r.x0 + 1, y, r.x1 - 1, std::min(y + 2, r.y1 - 2)}, stripe);
    } else {
        for (int x = r.x0 + 2; x + 2 <= r.x1 - 2; x += period)
            fill_rect(img, {x, r.y0 + 1, std::min(x + 2, r.x1 - 2), r.y1 - 1}, stripe);
    }

    fill_rect(img, {r.x0, r.y0, r.x1, r.y0 + 1}, border);
    fill_rect(img, {r.x0, r.y1 - 1, r.x1, r.y1}, border);
    fill_rect(img, {r.x0, r.y0, r.x0 + 1, r.y1}, border);
    fill_rect(img, {r.x1 - 1, r.y0, r.x1, r.y1}, border);
}

void draw_distractor(Tensor& img, const PixelRect& r, Rng& rng) {
    const float hue = rng.uniform_f(0.0f, 1.0f);
    const float value = rng.uniform_f(0.45f, 0.8f);
    const Rgb fill = from_hsv(hue, 0.08f, value);
    const Rgb border = from_hsv(hue, 0.08f, value * 0.4f);
    fill_rect(img, r, fill);
    fill_rect(img, {r.x0, r.y0, r.x1, r.y0 + 1}, border);
    fill_rect(img, {r.x0, r.y1 - 1, r.x1, r.y1}, border);
    fill_rect(img, {r.x0, r.y0, r.x0 + 1, r.y1}, border);
    fill_rect(img, {r.x1 - 1, r.y0, r.x1, r.y1}, border);
}

BoxAnnotation rect_annotation(const PixelRect& r, int class_id, int w, int h) {
    BoxAnnotation b;
    b.class_id = class_id;
    b.cx = static_cast<float>((r.x0 + r.x1) / (2.0 * w));
    b.cy = static_cast<float>((r.y0 + r.y1) / (2.0 * h));
    b.w = static_cast<float>(static_cast<double>(r.x1 - r.x0) / w);
    b.h = static_cast<float>(static_cast<double>(r.y1 - r.y0) / h);
    return b;
}

bool place_rect(const SyntheticSceneSpec& spec, Rng& rng,
                const std::vector<BoxAnnotation>& existing, PixelRect& out, BoxAnnotation& ann) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        const float bw = rng.uniform_f(spec.min_size, spec.max_size);
        const float bh = rng.uniform_f(spec.min_size, spec.max_size);
        const float cx = rng.uniform_f(bw / 2, 1.0f - bw / 2);
        const float cy = rng.uniform_f(bh / 2, 1.0f - bh / 2);
        PixelRect r;
        r.x0 = std::clamp(static_cast<int>(std::lround((cx - bw / 2) * spec.width)), 0,
                          spec.width - 2);
        r.x1 = std::clamp(static_cast<int>(std::lround((cx + bw / 2) * spec.width)), r.x0 + 2,
                          spec.width);
        r.y0 = std::clamp(static_cast<int>(std::lround((cy - bh / 2) * spec.height)), 0,
                          spec.height - 2);
        r.y1 = std::clamp(static_cast<int>(std::lround((cy + bh / 2) * spec.height)), r.y0 + 2,
                          spec.height);
        BoxAnnotation candidate = rect_annotation(r, 0, spec.width, spec.height);

        bool ok = true;
        for (const BoxAnnotation& other : existing) {
            if (iou(candidate, other) >= spec.max_pair_iou) {
                ok = false;
                break;
            }
            const float dx = candidate.cx - other.cx, dy = candidate.cy - other.cy;
            if (std::sqrt(dx * dx + dy * dy) < spec.min_center_distance) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        out = r;
        ann = candidate;
        return true;
    }
    return false;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("write failed for " + path);
}

std::string format_annotation(const BoxAnnotation& b) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d %.9g %.9g %.9g %.9g", b.class_id,
                  static_cast<double>(b.cx), static_cast<double>(b.cy), static_cast<double>(b.w),
                  static_cast<double>(b.h));
    return buf;
}

} // namespace

AnnotatedImage generate_synthetic_scene(const SyntheticSceneSpec& spec, int* placed_boxes,
                                        int* placed_distractors) {
    if (spec.width < 8 || spec.height < 8) throw ConfigError("synthetic canvas too small");
    if (spec.num_classes < 1) throw ConfigError("synthetic scene needs at least one class");

    Rng rng(spec.seed);
    AnnotatedImage scene;
    scene.pixels = Tensor({3, spec.height, spec.width});

    // background: soft gradient plus low-amplitude noise
    const std::size_t plane = static_cast<std::size_t>(spec.height) * spec.width;
    for (int y = 0; y < spec.height; ++y) {
        const float shade = 0.82f - 0.08f * static_cast<float>(y) / spec.height;
        for (int x = 0; x < spec.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * spec.width + x;
            const float noise = rng.uniform_f(-0.03f, 0.03f);
            scene.pixels.data[i] = shade + noise;
            scene.pixels.data[plane + i] = shade + noise * 0.8f;
            scene.pixels.data[2 * plane + i] = shade - 0.02f + noise * 0.6f;
        }
    }

    std::vector<BoxAnnotation> occupied;
    int boxes_done = 0;
    for (int b = 0; b < spec.boxes; ++b) {
        const int cls = spec.class_id >= 0 ? spec.class_id : rng.uniform_int(spec.num_classes);
        PixelRect r;
        BoxAnnotation ann;
        if (!place_rect(spec, rng, occupied, r, ann)) continue;
        draw_product(scene.pixels, r, cls);
        ann.class_id = cls;
        occupied.push_back(ann);
        scene.boxes.push_back(ann);
        ++boxes_done;
    }
    int distractors_done = 0;
    for (int d = 0; d < spec.distractors; ++d) {
        PixelRect r;
        BoxAnnotation ann;
        if (!place_rect(spec, rng, occupied, r, ann)) continue;
        draw_distractor(scene.pixels, r, rng);
        ann.class_id = -1;
        occupied.push_back(ann);
        ++distractors_done;
    }

    for (float& v : scene.pixels.data) v = std::clamp(v, 0.0f, 1.0f);
    scene.is_hard_negative = scene.boxes.empty();
    if (placed_boxes) *placed_boxes = boxes_done;
    if (placed_distractors) *placed_distractors = distractors_done;
    return scene;
}

SynthDatasetPaths generate_synthetic_dataset(const SynthDatasetSpec& spec,
                                             const std::string& out_dir) {
    if (spec.classes < 1) throw ConfigError("dataset needs at least one class");
    if (spec.train_per_class < 0 || spec.val_per_class < 0 || spec.hard_negative_train < 0 ||
        spec.unknown_scenes < 0)
        throw ConfigError("image counts must be non-negative");

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "images", ec);
    if (ec) throw DataError("cannot create " + out_dir + ": " + ec.message());

    SynthDatasetPaths paths;
    std::string names;
    for (int c = 0; c < spec.classes; ++c) names += "class" + std::to_string(c) + "\n";
    paths.names = (fs::path(out_dir) / "names.txt").string();
    write_text(paths.names, names);

    auto scene_seed = [&](std::uint64_t ns, std::uint64_t index) {
        return spec.seed ^ splitmix64((ns << 32) | index);
    };

    auto emit = [&](const std::string& stem, const SyntheticSceneSpec& scene_spec,
                    std::string& manifest) {
        const AnnotatedImage scene = generate_synthetic_scene(scene_spec);
        const std::string rel = "images/" + stem + ".png";
        write_png(scene.pixels, (fs::path(out_dir) / rel).string());
        std::string labels;
        for (const BoxAnnotation& b : scene.boxes) labels += format_annotation(b) + "\n";
        write_text((fs::path(out_dir) / ("images/" + stem + ".txt")).string(), labels);
        manifest += rel + "\n";
    };

    SyntheticSceneSpec base;
    base.width = base.height = spec.canvas;
    base.num_classes = spec.classes;

    std::string train_manifest, val_manifest, unknown_manifest;
    std::uint64_t train_index = 0, val_index = 0, unknown_index = 0;
    char stem[64];
    for (int c = 0; c < spec.classes; ++c) {
        for (int i = 0; i < spec.train_per_class; ++i) {
            SyntheticSceneSpec s = base;
            s.class_id = c;
            s.boxes = 1 + i % spec.max_boxes_per_scene;
            s.seed = scene_seed(1, train_index);
            std::snprintf(stem, sizeof(stem), "train_%05llu",
                          static_cast<unsigned long long>(train_index));
            emit(stem, s, train_manifest);
            ++train_index;
        }
        for (int i = 0; i < spec.val_per_class; ++i) {
            SyntheticSceneSpec s = base;
            s.class_id = c;
            s.boxes = 1 + i % spec.max_boxes_per_scene;
            s.seed = scene_seed(2, val_index);
            std::snprintf(stem, sizeof(stem), "val_%05llu",
                          static_cast<unsigned long long>(val_index));
            emit(stem, s, val_manifest);
            ++val_index;
        }
    }
    for (int i = 0; i < spec.hard_negative_train; ++i) {
        SyntheticSceneSpec s = base;
        s.boxes = 0;
        s.distractors = spec.distractors_per_negative;
        s.seed = scene_seed(1, train_index);
        std::snprintf(stem, sizeof(stem), "train_%05llu",
                      static_cast<unsigned long long>(train_index));
        emit(stem, s, train_manifest);
        ++train_index;
    }
    for (int i = 0; i < spec.unknown_scenes; ++i) {
        SyntheticSceneSpec s = base;
        s.boxes = 0;
        s.distractors = spec.distractors_per_negative;
        s.seed = scene_seed(3, unknown_index);
        std::snprintf(stem, sizeof(stem), "unknown_%05llu",
                      static_cast<unsigned long long>(unknown_index));
        emit(stem, s, unknown_manifest);
        ++unknown_index;
    }

    paths.train_manifest = (fs::path(out_dir) / "train.txt").string();
    write_text(paths.train_manifest, train_manifest);
    paths.val_manifest = (fs::path(out_dir) / "val.txt").string();
    write_text(paths.val_manifest, val_manifest);
    if (spec.unknown_scenes > 0) {
        paths.unknown_manifest = (fs::path(out_dir) / "unknown.txt").string();
        write_text(paths.unknown_manifest, unknown_manifest);
    }
    paths.train_images = static_cast<int>(train_index);
    paths.val_images = static_cast<int>(val_index);
    paths.unknown_images = static_cast<int>(unknown_index);
    return paths;
}

} // namespace ylt
