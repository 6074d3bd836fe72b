#include "ylt/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "ylt/errors.hpp"

namespace ylt {
namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

struct Dims4 {
    int n, c, h, w;
    bool batched;
};

Dims4 as4d(const Tensor& t, const char* who) {
    if (t.ndim() == 3) return {1, t.shape[0], t.shape[1], t.shape[2], false};
    if (t.ndim() == 4) return {t.shape[0], t.shape[1], t.shape[2], t.shape[3], true};
    throw ConfigError(std::string(who) + " expects a CHW or NCHW tensor, got " + shape_str(t.shape));
}

std::vector<int> make_shape(const Dims4& like, int c, int h, int w) {
    if (like.batched) return {like.n, c, h, w};
    return {c, h, w};
}

// column buffer layout: [C*k*k rows, outH*outW cols], row-major.
void im2col(const float* img, int C, int H, int W, int k, int stride, int pad, int outH, int outW,
            float* col) {
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                float* dst = col + ((static_cast<std::size_t>(c) * k + ky) * k + kx) *
                                       (static_cast<std::size_t>(outH) * outW);
                for (int oy = 0; oy < outH; ++oy) {
                    int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= H) {
                        for (int ox = 0; ox < outW; ++ox) *dst++ = 0.0f;
                        continue;
                    }
                    const float* src_row = img + (static_cast<std::size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < outW; ++ox) {
                        int ix = ox * stride - pad + kx;
                        *dst++ = (ix >= 0 && ix < W) ? src_row[ix] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im(const float* col, int C, int H, int W, int k, int stride, int pad, int outH, int outW,
            float* img) {
    for (int c = 0; c < C; ++c) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const float* src = col + ((static_cast<std::size_t>(c) * k + ky) * k + kx) *
                                             (static_cast<std::size_t>(outH) * outW);
                for (int oy = 0; oy < outH; ++oy) {
                    int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= H) {
                        src += outW;
                        continue;
                    }
                    float* dst_row = img + (static_cast<std::size_t>(c) * H + iy) * W;
                    for (int ox = 0; ox < outW; ++ox) {
                        int ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < W) dst_row[ix] += src[ox];
                    }
                    src += outW;
                }
            }
        }
    }
}

} // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
                      int pad) {
    Dims4 d = as4d(input, "conv2d");
    if (weights.ndim() != 4)
        throw ConfigError("conv2d weights must be FCkk, got " + shape_str(weights.shape));
    int F = weights.shape[0], C = weights.shape[1], k = weights.shape[2];
    if (weights.shape[3] != k) throw ConfigError("conv2d kernel must be square");
    if (C != d.c)
        throw ConfigError("conv2d input has " + std::to_string(d.c) + " channels, weights expect " +
                          std::to_string(C));
    if (bias.numel() != F)
        throw ConfigError("conv2d bias length " + std::to_string(bias.numel()) +
                          " does not match " + std::to_string(F) + " filters");
    if (d.h < k || d.w < k) throw ConfigError("conv2d input smaller than kernel");
    int outH = (d.h + 2 * pad - k) / stride + 1;
    int outW = (d.w + 2 * pad - k) / stride + 1;
    if (outH < 1 || outW < 1) throw ConfigError("conv2d produces empty output");

    Tensor out(make_shape(d, F, outH, outW));
    const std::size_t ckk = static_cast<std::size_t>(C) * k * k;
    const std::size_t hw = static_cast<std::size_t>(outH) * outW;
    std::vector<float> col(ckk * hw);
    CMapRM W(weights.data.data(), F, static_cast<Eigen::Index>(ckk));

    const std::size_t in_stride = static_cast<std::size_t>(C) * d.h * d.w;
    const std::size_t out_stride = static_cast<std::size_t>(F) * hw;
    for (int n = 0; n < d.n; ++n) {
        im2col(input.data.data() + n * in_stride, C, d.h, d.w, k, stride, pad, outH, outW,
               col.data());
        CMapRM Col(col.data(), static_cast<Eigen::Index>(ckk), static_cast<Eigen::Index>(hw));
        MapRM Out(out.data.data() + n * out_stride, F, static_cast<Eigen::Index>(hw));
        Out.noalias() = W * Col;
        for (int f = 0; f < F; ++f) Out.row(f).array() += bias[f];
    }
    return out;
}

void conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& d_output,
                     int stride, int pad, Tensor& d_input, Tensor& d_weights, Tensor& d_bias) {
    Dims4 d = as4d(input, "conv2d backward");
    int F = weights.shape[0], C = weights.shape[1], k = weights.shape[2];
    Dims4 od = as4d(d_output, "conv2d backward");
    int outH = od.h, outW = od.w;

    if (d_input.shape != input.shape) d_input = Tensor(input.shape);
    if (d_weights.shape != weights.shape) d_weights = Tensor(weights.shape);
    if (d_bias.numel() != F) d_bias = Tensor({F});

    const std::size_t ckk = static_cast<std::size_t>(C) * k * k;
    const std::size_t hw = static_cast<std::size_t>(outH) * outW;
    std::vector<float> col(ckk * hw);
    std::vector<float> dcol(ckk * hw);
    CMapRM W(weights.data.data(), F, static_cast<Eigen::Index>(ckk));
    MapRM dW(d_weights.data.data(), F, static_cast<Eigen::Index>(ckk));

    const std::size_t in_stride = static_cast<std::size_t>(C) * d.h * d.w;
    const std::size_t out_stride = static_cast<std::size_t>(F) * hw;
    for (int n = 0; n < d.n; ++n) {
        im2col(input.data.data() + n * in_stride, C, d.h, d.w, k, stride, pad, outH, outW,
               col.data());
        CMapRM Col(col.data(), static_cast<Eigen::Index>(ckk), static_cast<Eigen::Index>(hw));
        CMapRM dOut(d_output.data.data() + n * out_stride, F, static_cast<Eigen::Index>(hw));
        dW.noalias() += dOut * Col.transpose();
        for (int f = 0; f < F; ++f) d_bias[f] += dOut.row(f).sum();

        MapRM dCol(dcol.data(), static_cast<Eigen::Index>(ckk), static_cast<Eigen::Index>(hw));
        dCol.noalias() = W.transpose() * dOut;
        col2im(dcol.data(), C, d.h, d.w, k, stride, pad, outH, outW,
               d_input.data.data() + n * in_stride);
    }
}

Tensor maxpool_forward(const Tensor& input, std::vector<std::int64_t>* argmax) {
    Dims4 d = as4d(input, "maxpool");
    if (d.h % 2 != 0 || d.w % 2 != 0)
        throw ConfigError("maxpool needs even input dims, got " + std::to_string(d.h) + "x" +
                          std::to_string(d.w));
    int outH = d.h / 2, outW = d.w / 2;
    Tensor out(make_shape(d, d.c, outH, outW));
    if (argmax) argmax->assign(out.data.size(), 0);

    std::size_t oi = 0;
    for (int n = 0; n < d.n; ++n) {
        const std::size_t base = static_cast<std::size_t>(n) * d.c * d.h * d.w;
        for (int c = 0; c < d.c; ++c) {
            for (int oy = 0; oy < outH; ++oy) {
                for (int ox = 0; ox < outW; ++ox, ++oi) {
                    std::int64_t best_idx = 0;
                    float best = -std::numeric_limits<float>::infinity();
                    for (int dy = 0; dy < 2; ++dy) {
                        for (int dx = 0; dx < 2; ++dx) {
                            std::size_t idx = base + (static_cast<std::size_t>(c) * d.h +
                                                      (oy * 2 + dy)) * d.w + (ox * 2 + dx);
                            if (input.data[idx] > best) {
                                best = input.data[idx];
                                best_idx = static_cast<std::int64_t>(idx);
                            }
                        }
                    }
                    out.data[oi] = best;
                    if (argmax) (*argmax)[oi] = best_idx;
                }
            }
        }
    }
    return out;
}

void maxpool_backward(const Tensor& d_output, const std::vector<std::int64_t>& argmax,
                      Tensor& d_input) {
    if (argmax.size() != d_output.data.size())
        throw ConfigError("maxpool backward: argmax/update size mismatch");
    for (std::size_t i = 0; i < argmax.size(); ++i)
        d_input.data[static_cast<std::size_t>(argmax[i])] += d_output.data[i];
}

Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, Mode mode,
                         BatchNormCache* cache) {
    Dims4 d = as4d(input, "batchnorm");
    if (gamma.numel() != d.c || beta.numel() != d.c || running_mean.numel() != d.c ||
        running_var.numel() != d.c)
        throw ConfigError("batchnorm parameter length does not match " + std::to_string(d.c) +
                          " channels");

    Tensor out(input.shape);
    const std::size_t plane = static_cast<std::size_t>(d.h) * d.w;
    const std::size_t chan_stride = static_cast<std::size_t>(d.c) * plane;
    const double m = static_cast<double>(d.n) * plane;

    if (cache) {
        cache->xhat = Tensor(input.shape);
        cache->invstd.assign(static_cast<std::size_t>(d.c), 0.0f);
    }

    for (int c = 0; c < d.c; ++c) {
        float mean, var;
        if (mode == Mode::infer) {
            mean = running_mean[c];
            var = running_var[c];
        } else {
            double sum = 0, sq = 0;
            for (int n = 0; n < d.n; ++n) {
                const float* p = input.data.data() + n * chan_stride + c * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    sum += p[i];
                    sq += static_cast<double>(p[i]) * p[i];
                }
            }
            mean = static_cast<float>(sum / m);
            var = static_cast<float>(sq / m - (sum / m) * (sum / m));
            if (var < 0) var = 0;
            if (mode == Mode::train) {
                running_mean[c] = kBatchNormMomentum * running_mean[c] + (1 - kBatchNormMomentum) * mean;
                running_var[c] = kBatchNormMomentum * running_var[c] + (1 - kBatchNormMomentum) * var;
            }
        }
        const float invstd = 1.0f / std::sqrt(var + kBatchNormEps);
        if (cache) cache->invstd[static_cast<std::size_t>(c)] = invstd;
        const float g = gamma[c], b = beta[c];
        for (int n = 0; n < d.n; ++n) {
            const std::size_t off = n * chan_stride + c * plane;
            const float* p = input.data.data() + off;
            float* o = out.data.data() + off;
            float* xh = cache ? cache->xhat.data.data() + off : nullptr;
            for (std::size_t i = 0; i < plane; ++i) {
                float xhat = (p[i] - mean) * invstd;
                if (xh) xh[i] = xhat;
                o[i] = g * xhat + b;
            }
        }
    }
    return out;
}

void batchnorm_backward(const Tensor& d_output, const BatchNormCache& cache, const Tensor& gamma,
                        Tensor& d_input, Tensor& d_gamma, Tensor& d_beta) {
    Dims4 d = as4d(d_output, "batchnorm backward");
    const std::size_t plane = static_cast<std::size_t>(d.h) * d.w;
    const std::size_t chan_stride = static_cast<std::size_t>(d.c) * plane;
    const double m = static_cast<double>(d.n) * plane;

    if (d_input.shape != d_output.shape) d_input = Tensor(d_output.shape);

    for (int c = 0; c < d.c; ++c) {
        double sum_dy = 0, sum_dy_xhat = 0;
        for (int n = 0; n < d.n; ++n) {
            const std::size_t off = n * chan_stride + c * plane;
            const float* dy = d_output.data.data() + off;
            const float* xh = cache.xhat.data.data() + off;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += dy[i];
                sum_dy_xhat += static_cast<double>(dy[i]) * xh[i];
            }
        }
        d_gamma[c] += static_cast<float>(sum_dy_xhat);
        d_beta[c] += static_cast<float>(sum_dy);

        const float g = gamma[c];
        const float invstd = cache.invstd[static_cast<std::size_t>(c)];
        const float k1 = static_cast<float>(sum_dy / m);
        const float k2 = static_cast<float>(sum_dy_xhat / m);
        for (int n = 0; n < d.n; ++n) {
            const std::size_t off = n * chan_stride + c * plane;
            const float* dy = d_output.data.data() + off;
            const float* xh = cache.xhat.data.data() + off;
            float* dx = d_input.data.data() + off;
            for (std::size_t i = 0; i < plane; ++i)
                dx[i] += g * invstd * (dy[i] - k1 - xh[i] * k2);
        }
    }
}

Tensor leaky_relu_forward(const Tensor& input) {
    Tensor out(input.shape);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        float v = input.data[i];
        out.data[i] = v > 0 ? v : kLeakySlope * v;
    }
    return out;
}

void leaky_relu_backward(const Tensor& output, const Tensor& d_output, Tensor& d_input) {
    if (d_input.shape != d_output.shape) d_input = Tensor(d_output.shape);
    for (std::size_t i = 0; i < d_output.data.size(); ++i)
        d_input.data[i] = d_output.data[i] * (output.data[i] > 0 ? 1.0f : kLeakySlope);
}

} // namespace ylt
