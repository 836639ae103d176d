#include "kdg/reconstructor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "kdg/binary_io.hpp"
#include "kdg/simd.hpp"

namespace kdg {

void ReconNetConfig::validate() const {
    if (depth < 1 || depth > 6) throw ArgumentError("model.depth must be in [1, 6]");
    if (base_channels < 1 || base_channels > 256) throw ArgumentError("model.base_channels must be in [1, 256]");
}

std::vector<LayerShape> layer_layout(const ReconNetConfig& config) {
    config.validate();
    std::vector<LayerShape> layers;
    std::size_t offset = 0;
    auto add = [&](int cin, int cout, int k) {
        LayerShape s{cin, cout, k, offset, 0};
        offset += s.weight_count();
        s.bias_offset = offset;
        offset += static_cast<std::size_t>(cout);
        layers.push_back(s);
    };
    int cin = 1;
    for (int l = 0; l < config.depth; ++l) {
        add(cin, config.channels(l), 3);
        add(config.channels(l), config.channels(l), 3);
        cin = config.channels(l);
    }
    const int deep = config.channels(config.depth - 1);
    add(deep, deep, 3);
    add(deep, deep, 3);
    int below = deep;
    for (int l = config.depth - 1; l >= 0; --l) {
        add(below + config.channels(l), config.channels(l), 3);
        add(config.channels(l), config.channels(l), 3);
        below = config.channels(l);
    }
    add(config.channels(0), 1, 1);
    return layers;
}

std::span<const double> ReconNetParams::weights(std::size_t layer) const {
    const auto& s = layers.at(layer);
    return {values.data() + s.weight_offset, s.weight_count()};
}

std::span<const double> ReconNetParams::bias(std::size_t layer) const {
    const auto& s = layers.at(layer);
    return {values.data() + s.bias_offset, static_cast<std::size_t>(s.cout)};
}

ReconNetParams init_params(const ReconNetConfig& config, std::uint64_t seed) {
    ReconNetParams p;
    p.config = config;
    p.layers = layer_layout(config);
    const auto& last = p.layers.back();
    p.values.assign(last.bias_offset + static_cast<std::size_t>(last.cout), 0.0);
    std::mt19937_64 rng(seed);
    for (const auto& s : p.layers) {
        const double bound = std::sqrt(6.0 / (s.cin * s.kernel * s.kernel));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t i = 0; i < s.weight_count(); ++i) p.values[s.weight_offset + i] = u(rng);
    }
    return p;
}

// ---- tensor ops -------------------------------------------------------------

namespace {

struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}
    double* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * h * w; }
    const double* plane(int ch) const { return v.data() + static_cast<std::size_t>(ch) * h * w; }
};

// Zero-padded "same" convolution (cross-correlation) with odd kernel size.
void conv_forward(const Tensor& in, const LayerShape& s, const double* params, Tensor& out) {
    const auto& k = simd::kernels();
    out = Tensor(s.cout, in.h, in.w);
    const double* wt = params + s.weight_offset;
    const double* b = params + s.bias_offset;
    const int r = s.kernel / 2, H = in.h, W = in.w;
    for (int co = 0; co < s.cout; ++co) {
        double* o = out.plane(co);
        std::fill(o, o + static_cast<std::size_t>(H) * W, b[co]);
        for (int ci = 0; ci < s.cin; ++ci) {
            const double* src = in.plane(ci);
            for (int ky = 0; ky < s.kernel; ++ky) {
                const int dy = ky - r;
                for (int kx = 0; kx < s.kernel; ++kx) {
                    const int dx = kx - r;
                    const double wv = wt[((static_cast<std::size_t>(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx];
                    const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    for (int y = y0; y < y1; ++y)
                        k.axpy(wv, src + static_cast<std::size_t>(y + dy) * W + x0 + dx, o + static_cast<std::size_t>(y) * W + x0,
                               static_cast<std::size_t>(x1 - x0));
                }
            }
        }
    }
}

void conv_backward(const Tensor& in, const LayerShape& s, const double* params, const Tensor& gout, double* gparams,
                   Tensor* gin) {
    const auto& k = simd::kernels();
    const double* wt = params + s.weight_offset;
    double* gw = gparams + s.weight_offset;
    double* gb = gparams + s.bias_offset;
    const int r = s.kernel / 2, H = in.h, W = in.w;
    if (gin) *gin = Tensor(s.cin, H, W);
    for (int co = 0; co < s.cout; ++co) {
        const double* g = gout.plane(co);
        double sum = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) sum += g[i];
        gb[co] += sum;
        for (int ci = 0; ci < s.cin; ++ci) {
            const double* src = in.plane(ci);
            double* gi = gin ? gin->plane(ci) : nullptr;
            for (int ky = 0; ky < s.kernel; ++ky) {
                const int dy = ky - r;
                for (int kx = 0; kx < s.kernel; ++kx) {
                    const int dx = kx - r;
                    const std::size_t widx = ((static_cast<std::size_t>(co) * s.cin + ci) * s.kernel + ky) * s.kernel + kx;
                    const double wv = wt[widx];
                    const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    const auto len = static_cast<std::size_t>(x1 - x0);
                    double acc = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const std::size_t src_off = static_cast<std::size_t>(y + dy) * W + x0 + dx;
                        const std::size_t g_off = static_cast<std::size_t>(y) * W + x0;
                        acc += k.dot(g + g_off, src + src_off, len);
                        if (gi) k.axpy(wv, g + g_off, gi + src_off, len);
                    }
                    gw[widx] += acc;
                }
            }
        }
    }
}

void relu_inplace(Tensor& t) {
    for (auto& v : t.v) v = v > 0.0 ? v : 0.0;
}

void relu_backward(const Tensor& out, Tensor& g) {
    for (std::size_t i = 0; i < g.v.size(); ++i)
        if (!(out.v[i] > 0.0)) g.v[i] = 0.0;
}

void maxpool_forward(const Tensor& in, Tensor& out, std::vector<std::uint32_t>& argmax) {
    out = Tensor(in.c, in.h / 2, in.w / 2);
    argmax.assign(out.v.size(), 0);
    std::size_t o = 0;
    for (int c = 0; c < in.c; ++c) {
        const double* p = in.plane(c);
        for (int y = 0; y < out.h; ++y) {
            for (int x = 0; x < out.w; ++x, ++o) {
                std::uint32_t best = static_cast<std::uint32_t>((2 * y) * in.w + 2 * x);
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const auto idx = static_cast<std::uint32_t>((2 * y + dy) * in.w + 2 * x + dx);
                        if (p[idx] > p[best]) best = idx;
                    }
                out.v[o] = p[best];
                argmax[o] = best;
            }
        }
    }
}

void maxpool_backward(const Tensor& gout, const std::vector<std::uint32_t>& argmax, int h, int w, Tensor& gin) {
    gin = Tensor(gout.c, h, w);
    std::size_t o = 0;
    for (int c = 0; c < gout.c; ++c) {
        double* g = gin.plane(c);
        for (int i = 0; i < gout.h * gout.w; ++i, ++o) g[argmax[o]] += gout.v[o];
    }
}

void upsample_forward(const Tensor& in, Tensor& out) {
    out = Tensor(in.c, in.h * 2, in.w * 2);
    for (int c = 0; c < in.c; ++c) {
        const double* p = in.plane(c);
        double* q = out.plane(c);
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x) q[y * out.w + x] = p[(y / 2) * in.w + x / 2];
    }
}

void upsample_backward(const Tensor& gout, Tensor& gin) {
    gin = Tensor(gout.c, gout.h / 2, gout.w / 2);
    for (int c = 0; c < gout.c; ++c) {
        const double* p = gout.plane(c);
        double* q = gin.plane(c);
        for (int y = 0; y < gout.h; ++y)
            for (int x = 0; x < gout.w; ++x) q[(y / 2) * gin.w + x / 2] += p[y * gout.w + x];
    }
}

Tensor concat(const Tensor& a, const Tensor& b) {
    Tensor out(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), out.v.begin());
    std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<std::ptrdiff_t>(a.v.size()));
    return out;
}

void split(const Tensor& g, int ca, Tensor& ga, Tensor& gb) {
    ga = Tensor(ca, g.h, g.w);
    gb = Tensor(g.c - ca, g.h, g.w);
    std::copy(g.v.begin(), g.v.begin() + static_cast<std::ptrdiff_t>(ga.v.size()), ga.v.begin());
    std::copy(g.v.begin() + static_cast<std::ptrdiff_t>(ga.v.size()), g.v.end(), gb.v.begin());
}

void add_into(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
}

// Activations retained for the backward pass. conv_in[i]/conv_out[i] are the
// input and (post-ReLU, except the last) output of layer i.
struct Cache {
    std::vector<Tensor> conv_in;
    std::vector<Tensor> conv_out;
    std::vector<std::vector<std::uint32_t>> pool_argmax;
    std::vector<std::pair<int, int>> pool_shape;
};

void check_input(const ReconNetParams& params, const Image& x) {
    const int m = 1 << params.config.depth;
    if (x.height() % m != 0 || x.width() % m != 0)
        throw ShapeError("network input " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                         " is not divisible by 2^depth = " + std::to_string(m));
}

Tensor run_forward(const ReconNetParams& params, const Image& x, Cache& cache) {
    check_input(params, x);
    const int depth = params.config.depth;
    const std::size_t n_layers = params.layers.size();
    cache.conv_in.assign(n_layers, {});
    cache.conv_out.assign(n_layers, {});
    cache.pool_argmax.assign(static_cast<std::size_t>(depth), {});
    cache.pool_shape.assign(static_cast<std::size_t>(depth), {});

    std::size_t li = 0;
    auto conv = [&](Tensor in, bool relu) {
        cache.conv_in[li] = std::move(in);
        conv_forward(cache.conv_in[li], params.layers[li], params.values.data(), cache.conv_out[li]);
        if (relu) relu_inplace(cache.conv_out[li]);
        return cache.conv_out[li++];
    };

    Tensor cur(1, x.height(), x.width());
    std::copy(x.data().begin(), x.data().end(), cur.v.begin());
    std::vector<std::size_t> skip_layer(static_cast<std::size_t>(depth));
    for (int l = 0; l < depth; ++l) {
        cur = conv(std::move(cur), true);
        cur = conv(std::move(cur), true);
        skip_layer[l] = li - 1;
        cache.pool_shape[l] = {cur.h, cur.w};
        Tensor pooled;
        maxpool_forward(cur, pooled, cache.pool_argmax[l]);
        cur = std::move(pooled);
    }
    cur = conv(std::move(cur), true);
    cur = conv(std::move(cur), true);
    for (int l = depth - 1; l >= 0; --l) {
        Tensor up;
        upsample_forward(cur, up);
        cur = conv(concat(up, cache.conv_out[skip_layer[l]]), true);
        cur = conv(std::move(cur), true);
    }
    return conv(std::move(cur), false);
}

Image to_image(const Tensor& t) { return Image(t.h, t.w, t.v); }

}  // namespace

Image forward(const ReconNetParams& params, const Image& x) {
    Cache cache;
    return to_image(run_forward(params, x, cache));
}

double loss_l1(const Image& pred, const Image& target) {
    require_same_shape(pred, target, "loss_l1");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred.data()[i] - target.data()[i]);
    return s / static_cast<double>(pred.size());
}

namespace {

BackwardResult run_backward(const ReconNetParams& params, const Image& x, const Cache& cache, const Tensor& out,
                            const Image& upstream) {
    const int depth = params.config.depth;
    BackwardResult res;
    res.prediction = to_image(out);
    res.grads.params.assign(params.values.size(), 0.0);
    double* gp = res.grads.params.data();

    Tensor g(1, out.h, out.w);
    std::copy(upstream.data().begin(), upstream.data().end(), g.v.begin());

    std::size_t li = params.layers.size();
    auto conv_back = [&](Tensor gout, bool relu) {
        --li;
        if (relu) relu_backward(cache.conv_out[li], gout);
        Tensor gin;
        conv_backward(cache.conv_in[li], params.layers[li], params.values.data(), gout, gp, &gin);
        return gin;
    };

    std::vector<Tensor> skip_grad(static_cast<std::size_t>(depth));

    g = conv_back(std::move(g), false);
    for (int l = 0; l < depth; ++l) {
        g = conv_back(std::move(g), true);
        g = conv_back(std::move(g), true);
        const int c_up = g.c - params.config.channels(l);
        Tensor g_up, g_skip;
        split(g, c_up, g_up, g_skip);
        skip_grad[l] = std::move(g_skip);
        upsample_backward(g_up, g);
    }
    g = conv_back(std::move(g), true);
    g = conv_back(std::move(g), true);
    for (int l = depth - 1; l >= 0; --l) {
        Tensor gin;
        maxpool_backward(g, cache.pool_argmax[l], cache.pool_shape[l].first, cache.pool_shape[l].second, gin);
        add_into(gin, skip_grad[l]);
        g = conv_back(std::move(gin), true);
        g = conv_back(std::move(g), true);
    }
    res.grads.input = Image(x.height(), x.width(), std::move(g.v));
    return res;
}

}  // namespace

BackwardResult backward_from(const ReconNetParams& params, const Image& x, const Image& upstream) {
    Cache cache;
    const Tensor out = run_forward(params, x, cache);
    require_same_shape(x, upstream, "backward_from");
    return run_backward(params, x, cache, out, upstream);
}

BackwardResult backward(const ReconNetParams& params, const Image& x, const Image& target, double weight_decay) {
    Cache cache;
    const Tensor out = run_forward(params, x, cache);
    const Image pred = to_image(out);
    require_same_shape(pred, target, "backward");
    const double n = static_cast<double>(pred.size());
    Image upstream(pred.height(), pred.width());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        upstream.data()[i] = ((d > 0.0) - (d < 0.0)) / n;
    }
    BackwardResult res = run_backward(params, x, cache, out, upstream);
    res.loss = loss_l1(pred, target);
    if (weight_decay > 0.0) {
        double sq = 0.0;
        for (std::size_t i = 0; i < params.values.size(); ++i) {
            sq += params.values[i] * params.values[i];
            res.grads.params[i] += weight_decay * params.values[i];
        }
        res.loss += 0.5 * weight_decay * sq;
    }
    return res;
}

void adam_step(std::span<double> params, std::span<const double> grads, double lr, AdamState& st) {
    if (grads.size() != params.size()) throw ShapeError("adam_step: gradient length != parameter length");
    if (st.m.empty()) {
        st.m.assign(params.size(), 0.0);
        st.v.assign(params.size(), 0.0);
    }
    if (st.m.size() != params.size()) throw ShapeError("adam_step: optimizer state length != parameter length");
    ++st.step;
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
        const double mhat = st.m[i] / c1;
        const double vhat = st.v[i] / c2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
}

// ---- checkpoint -------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const ReconNetParams& params) {
    std::vector<std::uint8_t> buf;
    bin::put_magic(buf, "KDGW");
    bin::put<std::uint32_t>(buf, kCheckpointVersion);
    bin::put<std::uint32_t>(buf, static_cast<std::uint32_t>(params.config.depth));
    bin::put<std::uint32_t>(buf, static_cast<std::uint32_t>(params.config.base_channels));
    bin::put<std::uint64_t>(buf, params.values.size());
    for (double v : params.values) bin::put<double>(buf, v);
    bin::write_file(path.string(), buf);
}

ReconNetParams load_checkpoint(const std::filesystem::path& path) {
    const auto buf = bin::read_file(path.string());
    bin::Reader r(buf);
    if (!r.magic_is("KDGW")) throw Error(path.string() + ": not a checkpoint (bad magic)");
    std::uint32_t version = 0, depth = 0, base = 0;
    std::uint64_t count = 0;
    if (!r.get(version) || !r.get(depth) || !r.get(base) || !r.get(count))
        throw Error(path.string() + ": truncated checkpoint header");
    if (version != kCheckpointVersion)
        throw Error(path.string() + ": checkpoint version " + std::to_string(version) + " unsupported");
    ReconNetParams p;
    p.config = {static_cast<int>(depth), static_cast<int>(base)};
    p.layers = layer_layout(p.config);
    const auto& last = p.layers.back();
    const std::size_t expected = last.bias_offset + static_cast<std::size_t>(last.cout);
    if (count != expected) throw Error(path.string() + ": parameter count does not match the stored config");
    if (r.remaining() != count * sizeof(double)) throw Error(path.string() + ": truncated checkpoint payload");
    p.values.resize(count);
    for (auto& v : p.values) r.get(v);
    return p;
}

}  // namespace kdg
