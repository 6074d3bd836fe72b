#include "ylt/weights.hpp"

#include <cstring>
#include <fstream>

#include "ylt/errors.hpp"

namespace ylt {
namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32_array(std::ostream& out, const std::vector<float>& values) {
    std::vector<unsigned char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &values[i], 4);
        buf[i * 4] = static_cast<unsigned char>(bits);
        buf[i * 4 + 1] = static_cast<unsigned char>(bits >> 8);
        buf[i * 4 + 2] = static_cast<unsigned char>(bits >> 16);
        buf[i * 4 + 3] = static_cast<unsigned char>(bits >> 24);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

std::uint32_t read_u32(std::istream& in, const std::string& context) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw DataError("weights file truncated " + context);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

std::vector<float> read_f32_array(std::istream& in, std::size_t count, const std::string& context) {
    std::vector<unsigned char> buf(count * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
        throw DataError("weights file truncated " + context);
    std::vector<float> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(buf[i * 4]) |
                                   static_cast<std::uint32_t>(buf[i * 4 + 1]) << 8 |
                                   static_cast<std::uint32_t>(buf[i * 4 + 2]) << 16 |
                                   static_cast<std::uint32_t>(buf[i * 4 + 3]) << 24;
        std::memcpy(&values[i], &bits, 4);
    }
    return values;
}

std::string dims_str(int f, int c, int k) {
    return std::to_string(f) + "x" + std::to_string(c) + "x" + std::to_string(k) + "x" +
           std::to_string(k);
}

} // namespace

WeightsFile snapshot_weights(const Network& net) {
    WeightsFile file;
    for (const Layer& layer : net.layers()) {
        if (layer.spec.kind != LayerKind::convolutional) continue;
        LayerWeights lw;
        lw.filters = layer.spec.filters;
        lw.channels = layer.in_channels;
        lw.kernel = layer.spec.size;
        lw.batch_normalize = layer.spec.batch_normalize;
        if (lw.batch_normalize) {
            lw.gamma = layer.gamma.value.data;
            lw.beta = layer.beta.value.data;
            lw.running_mean = layer.running_mean.data;
            lw.running_var = layer.running_var.data;
        } else {
            lw.bias = layer.bias.value.data;
        }
        lw.kernels = layer.kernels.value.data;
        file.layers.push_back(std::move(lw));
    }
    return file;
}

void restore_weights(Network& net, const WeightsFile& file) {
    std::size_t index = 0;
    for (Layer& layer : net.layers()) {
        if (layer.spec.kind != LayerKind::convolutional) continue;
        if (index >= file.layers.size())
            throw DataError("weights hold " + std::to_string(file.layers.size()) +
                            " layers, network has more");
        const LayerWeights& lw = file.layers[index];
        const std::string name = "conv" + std::to_string(index);
        ++index;
        if (lw.filters != layer.spec.filters || lw.channels != layer.in_channels ||
            lw.kernel != layer.spec.size)
            throw DataError("layer " + name + ": weights are " +
                            dims_str(lw.filters, lw.channels, lw.kernel) + ", network expects " +
                            dims_str(layer.spec.filters, layer.in_channels, layer.spec.size));
        if (lw.batch_normalize != layer.spec.batch_normalize)
            throw DataError("layer " + name + ": batch-normalization flag mismatch");
        layer.kernels.value.data = lw.kernels;
        if (lw.batch_normalize) {
            layer.gamma.value.data = lw.gamma;
            layer.beta.value.data = lw.beta;
            layer.running_mean.data = lw.running_mean;
            layer.running_var.data = lw.running_var;
        } else {
            layer.bias.value.data = lw.bias;
        }
    }
    if (index != file.layers.size())
        throw DataError("weights hold " + std::to_string(file.layers.size()) +
                        " layers, network has " + std::to_string(index));
}

void write_weights_file(const WeightsFile& file, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write weights file " + path);
    out.write("YLTW", 4);
    write_u32(out, kWeightsVersion);
    write_u32(out, static_cast<std::uint32_t>(file.layers.size()));
    for (const LayerWeights& lw : file.layers) {
        write_u32(out, static_cast<std::uint32_t>(lw.filters));
        write_u32(out, static_cast<std::uint32_t>(lw.channels));
        write_u32(out, static_cast<std::uint32_t>(lw.kernel));
        if (lw.batch_normalize) {
            write_f32_array(out, lw.gamma);
            write_f32_array(out, lw.beta);
            write_f32_array(out, lw.running_mean);
            write_f32_array(out, lw.running_var);
        } else {
            write_f32_array(out, lw.bias);
        }
        write_f32_array(out, lw.kernels);
    }
    if (!out) throw DataError("write failed for weights file " + path);
}

WeightsFile read_weights_file(const std::string& path, const NetworkConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open weights file " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "YLTW", 4) != 0)
        throw DataError("bad magic in weights file " + path);
    const std::uint32_t version = read_u32(in, "in header");
    if (version != kWeightsVersion)
        throw DataError("weights file " + path + " has version " + std::to_string(version) +
                        ", expected " + std::to_string(kWeightsVersion));
    const std::uint32_t count = read_u32(in, "in header");

    std::vector<const LayerSpec*> conv_specs;
    for (const LayerSpec& spec : config.layers)
        if (spec.kind == LayerKind::convolutional) conv_specs.push_back(&spec);
    if (count != conv_specs.size())
        throw DataError("weights file has " + std::to_string(count) + " layers, config has " +
                        std::to_string(conv_specs.size()));

    WeightsFile file;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = "in layer conv" + std::to_string(i);
        LayerWeights lw;
        lw.filters = static_cast<int>(read_u32(in, name));
        lw.channels = static_cast<int>(read_u32(in, name));
        lw.kernel = static_cast<int>(read_u32(in, name));
        if (lw.filters <= 0 || lw.channels <= 0 || lw.kernel <= 0)
            throw DataError("non-positive dims " + name);
        lw.batch_normalize = conv_specs[i]->batch_normalize;
        const std::size_t f = static_cast<std::size_t>(lw.filters);
        if (lw.batch_normalize) {
            lw.gamma = read_f32_array(in, f, name);
            lw.beta = read_f32_array(in, f, name);
            lw.running_mean = read_f32_array(in, f, name);
            lw.running_var = read_f32_array(in, f, name);
        } else {
            lw.bias = read_f32_array(in, f, name);
        }
        lw.kernels = read_f32_array(
            in, f * lw.channels * lw.kernel * lw.kernel, name);
        file.layers.push_back(std::move(lw));
    }
    return file;
}

void save_weights(const Network& net, const std::string& path) {
    write_weights_file(snapshot_weights(net), path);
}

Network load_weights(const std::string& path, const NetworkConfig& config) {
    WeightsFile file = read_weights_file(path, config);
    Network net(config, 0);
    restore_weights(net, file);
    return net;
}

} // namespace ylt
