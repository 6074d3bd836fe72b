#include "ylt/dataset.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ylt/errors.hpp"
#include "ylt/image.hpp"

namespace ylt {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) fields.push_back(tok);
    return fields;
}

double parse_number(const std::string& field, const char* what) {
    double value = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw DataError(std::string("annotation ") + what + " is not a number: '" + field + "'");
    return value;
}

std::vector<std::string> read_lines(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + " " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool skippable(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

} // namespace

BoxAnnotation parse_annotation_line(const std::string& line) {
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 5)
        throw DataError("annotation needs 5 fields <class cx cy w h>, got " +
                        std::to_string(fields.size()));
    const double cls = parse_number(fields[0], "class id");
    if (cls != std::floor(cls) || cls < 0)
        throw DataError("annotation class id must be a non-negative integer, got '" + fields[0] +
                        "'");
    BoxAnnotation b;
    b.class_id = static_cast<int>(cls);
    b.cx = static_cast<float>(parse_number(fields[1], "cx"));
    b.cy = static_cast<float>(parse_number(fields[2], "cy"));
    b.w = static_cast<float>(parse_number(fields[3], "w"));
    b.h = static_cast<float>(parse_number(fields[4], "h"));
    if (!(b.w > 0) || b.w > 1 || !(b.h > 0) || b.h > 1)
        throw DataError("annotation w/h must lie in (0,1], got w=" + fields[3] +
                        " h=" + fields[4]);
    if (b.cx < 0 || b.cx > 1 || b.cy < 0 || b.cy > 1)
        throw DataError("annotation cx/cy must lie in [0,1], got cx=" + fields[1] +
                        " cy=" + fields[2]);
    if (b.cx + b.w / 2 <= 0 || b.cx - b.w / 2 >= 1 || b.cy + b.h / 2 <= 0 || b.cy - b.h / 2 >= 1)
        throw DataError("annotation box does not intersect the image");
    return b;
}

std::vector<BoxAnnotation> load_label_file(const std::string& path) {
    std::vector<BoxAnnotation> boxes;
    const std::vector<std::string> lines = read_lines(path, "label file");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (skippable(lines[i])) continue;
        try {
            boxes.push_back(parse_annotation_line(lines[i]));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return boxes;
}

std::string label_path_for(const std::string& image_path) {
    const std::size_t dot = image_path.find_last_of('.');
    const std::size_t slash = image_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return image_path + ".txt";
    return image_path.substr(0, dot) + ".txt";
}

DatasetManifest load_manifest(const std::string& manifest_path, const std::string& names_path) {
    DatasetManifest manifest;
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    for (const std::string& line : read_lines(manifest_path, "manifest")) {
        if (skippable(line)) continue;
        std::filesystem::path p(line);
        if (p.is_relative()) p = base / p;
        manifest.image_paths.push_back(p.string());
    }
    if (manifest.image_paths.empty())
        throw DataError("manifest " + manifest_path + " lists no images");
    for (const std::string& line : read_lines(names_path, "names file")) {
        if (line.empty()) continue;
        manifest.class_names.push_back(line);
    }
    if (manifest.class_names.empty()) throw DataError("names file " + names_path + " is empty");
    return manifest;
}

AnnotatedImage load_sample(const std::string& image_path) {
    AnnotatedImage sample;
    sample.pixels = read_png(image_path);
    const std::string labels = label_path_for(image_path);
    if (std::filesystem::exists(labels)) {
        sample.boxes = load_label_file(labels);
        sample.is_hard_negative = sample.boxes.empty();
    } else {
        sample.is_hard_negative = true;
    }
    return sample;
}

Dataset load_dataset(const DatasetManifest& manifest) {
    if (manifest.image_paths.empty()) throw DataError("manifest lists no images");
    Dataset data;
    data.class_names = manifest.class_names;
    for (const std::string& path : manifest.image_paths) {
        AnnotatedImage sample = load_sample(path);
        for (const BoxAnnotation& b : sample.boxes)
            if (b.class_id >= static_cast<int>(manifest.class_names.size()))
                throw DataError(path + ": class id " + std::to_string(b.class_id) +
                                " exceeds the " + std::to_string(manifest.class_names.size()) +
                                " named classes");
        if (!sample.is_hard_negative) ++data.positives;
        data.samples.push_back(std::move(sample));
    }
    return data;
}

std::vector<AnnotatedImage> compose_batch(const Dataset& dataset, const AugmentationConfig& cfg,
                                          int batch_size, float hard_negative_cap,
                                          std::uint64_t seed, std::int64_t first_sample_index) {
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (dataset.samples.empty()) throw DataError("dataset is empty");
    if (dataset.positives == 0)
        throw ConfigError("dataset holds only hard negatives; training on it would teach the "
                          "model to detect nothing at all");

    std::vector<AnnotatedImage> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int s = 0; s < batch_size; ++s) {
        Rng rng(seed ^ static_cast<std::uint64_t>(first_sample_index + s));
        // Negatives may only land on the slots where floor((s+1)*cap) steps,
        // exactly floor(cap * batch_size) of them; keeping the decision
        // positional (not a running count) keeps slots independent.
        const double cap = static_cast<double>(hard_negative_cap);
        const bool negative_slot =
            std::floor((s + 1) * cap) - std::floor(s * cap) >= 1.0;
        const AnnotatedImage* pick = nullptr;
        for (int attempt = 0; attempt < 10000; ++attempt) {
            const std::size_t i = static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(dataset.samples.size())));
            const AnnotatedImage& candidate = dataset.samples[i];
            if (candidate.is_hard_negative && !negative_slot) continue;
            pick = &candidate;
            break;
        }
        if (!pick) throw DataError("could not draw a positive sample within the attempt budget");
        batch.push_back(augment(*pick, cfg, rng));
    }
    return batch;
}

Batch stack_batch(const std::vector<AnnotatedImage>& samples, int input_dim) {
    if (samples.empty()) throw ConfigError("cannot stack an empty batch");
    Batch batch;
    const int n = static_cast<int>(samples.size());
    batch.images = Tensor({n, 3, input_dim, input_dim});
    const std::size_t stride = static_cast<std::size_t>(3) * input_dim * input_dim;
    for (int i = 0; i < n; ++i) {
        const Tensor resized = resize_bilinear(samples[static_cast<std::size_t>(i)].pixels,
                                               input_dim, input_dim);
        std::copy(resized.data.begin(), resized.data.end(),
                  batch.images.data.begin() + static_cast<std::ptrdiff_t>(i * stride));
        batch.truths.push_back(samples[static_cast<std::size_t>(i)].boxes);
    }
    return batch;
}

} // namespace ylt
