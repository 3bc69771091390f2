#include "cne/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "cne/rng.hpp"
#include "cne/tensor_io.hpp"

namespace cne {

namespace {

void conv3x3_forward(const float* in, std::size_t cin, const float* w, const float* b,
                     std::size_t cout, std::size_t H, std::size_t W, float* out) {
    const std::size_t P = H * W;
    for (std::size_t co = 0; co < cout; ++co)
        std::fill(out + co * P, out + (co + 1) * P, b[co]);
    for (std::size_t co = 0; co < cout; ++co) {
        float* op = out + co * P;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const float* ip = in + ci * P;
            const float* wbase = w + (co * cin + ci) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const std::size_t y_lo = dy < 0 ? 1 : 0;
                const std::size_t y_hi = H - (dy > 0 ? 1 : 0);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const std::size_t x_lo = dx < 0 ? 1 : 0;
                    const std::size_t n = W - (dx > 0 ? 1 : 0) - x_lo;
                    const float wv = wbase[ky * 3 + kx];
                    for (std::size_t y = y_lo; y < y_hi; ++y) {
                        float* orow = op + y * W + x_lo;
                        const float* irow = ip + (y + dy) * W + x_lo + dx;
                        for (std::size_t i = 0; i < n; ++i) orow[i] += wv * irow[i];
                    }
                }
            }
        }
    }
}

// din must be zeroed by the caller.
void conv3x3_backward_input(const float* dout, std::size_t cout, const float* w,
                            std::size_t cin, std::size_t H, std::size_t W, float* din) {
    const std::size_t P = H * W;
    for (std::size_t co = 0; co < cout; ++co) {
        const float* dop = dout + co * P;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            float* dip = din + ci * P;
            const float* wbase = w + (co * cin + ci) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const std::size_t y_lo = dy < 0 ? 1 : 0;
                const std::size_t y_hi = H - (dy > 0 ? 1 : 0);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const std::size_t x_lo = dx < 0 ? 1 : 0;
                    const std::size_t n = W - (dx > 0 ? 1 : 0) - x_lo;
                    const float wv = wbase[ky * 3 + kx];
                    for (std::size_t y = y_lo; y < y_hi; ++y) {
                        float* drow = dip + (y + dy) * W + x_lo + dx;
                        const float* srow = dop + y * W + x_lo;
                        for (std::size_t i = 0; i < n; ++i) drow[i] += wv * srow[i];
                    }
                }
            }
        }
    }
}

void conv3x3_backward_params(const float* dout, std::size_t cout, const float* in,
                             std::size_t cin, std::size_t H, std::size_t W, double* dw,
                             double* db) {
    const std::size_t P = H * W;
    for (std::size_t co = 0; co < cout; ++co) {
        const float* dop = dout + co * P;
        double acc_b = 0.0;
        for (std::size_t i = 0; i < P; ++i) acc_b += dop[i];
        db[co] += acc_b;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const float* ip = in + ci * P;
            double* dwbase = dw + (co * cin + ci) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const std::size_t y_lo = dy < 0 ? 1 : 0;
                const std::size_t y_hi = H - (dy > 0 ? 1 : 0);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const std::size_t x_lo = dx < 0 ? 1 : 0;
                    const std::size_t n = W - (dx > 0 ? 1 : 0) - x_lo;
                    double acc = 0.0;
                    for (std::size_t y = y_lo; y < y_hi; ++y) {
                        const float* srow = dop + y * W + x_lo;
                        const float* irow = ip + (y + dy) * W + x_lo + dx;
                        for (std::size_t i = 0; i < n; ++i)
                            acc += static_cast<double>(srow[i]) * irow[i];
                    }
                    dwbase[ky * 3 + kx] += acc;
                }
            }
        }
    }
}

void relu_inplace(float* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > 0.0f ? v[i] : 0.0f;
}

// Per-channel multiplier: 0 with probability p, otherwise 1/(1-p).
std::vector<float> dropout_mask(std::size_t hidden, float p, std::uint64_t seed) {
    std::vector<float> mask(hidden, 1.0f);
    if (p <= 0.0f) return mask;
    Rng rng(seed);
    const float scale = 1.0f / (1.0f - p);
    for (auto& v : mask) v = rng.uniform() < static_cast<double>(p) ? 0.0f : scale;
    return mask;
}

struct Workspace {
    std::vector<float> h1, h2, h3, feat, logits, probs;

    void resize(const SegModel& m, std::size_t P) {
        h1.resize(m.hidden * P);
        h2.resize(m.hidden * P);
        h3.resize(m.hidden * P);
        feat.resize(m.hidden * P);
        logits.resize(m.classes * P);
        probs.resize(m.classes * P);
    }
};

void check_image(const SegModel& m, const Tensor& image) {
    if (image.rank() != 3 || image.dims()[0] != m.in_channels)
        throw std::invalid_argument("segmenter: expected a (" +
                                    std::to_string(m.in_channels) + ", H, W) image");
}

// Runs the net into ws.probs. Returns mean cross-entropy when truth is given,
// 0 otherwise. drop_mask == nullptr means dropout off.
double forward_impl(const SegModel& m, const float* img, std::size_t H, std::size_t W,
                    const float* drop_mask, Workspace& ws, const LabelMask* truth) {
    const std::size_t P = H * W;
    ws.resize(m, P);

    conv3x3_forward(img, m.in_channels, m.w1.data(), m.b1.data(), m.hidden, H, W, ws.h1.data());
    relu_inplace(ws.h1.data(), ws.h1.size());
    conv3x3_forward(ws.h1.data(), m.hidden, m.w2.data(), m.b2.data(), m.hidden, H, W,
                    ws.h2.data());
    relu_inplace(ws.h2.data(), ws.h2.size());
    conv3x3_forward(ws.h2.data(), m.hidden, m.w3.data(), m.b3.data(), m.hidden, H, W,
                    ws.h3.data());
    relu_inplace(ws.h3.data(), ws.h3.size());

    for (std::size_t k = 0; k < m.hidden; ++k) {
        const float s = drop_mask ? drop_mask[k] : 1.0f;
        const float* src = ws.h3.data() + k * P;
        float* dst = ws.feat.data() + k * P;
        for (std::size_t i = 0; i < P; ++i) dst[i] = s * src[i];
    }

    for (std::size_t c = 0; c < m.classes; ++c)
        std::fill(ws.logits.begin() + c * P, ws.logits.begin() + (c + 1) * P, m.bc[c]);
    for (std::size_t c = 0; c < m.classes; ++c) {
        float* lp = ws.logits.data() + c * P;
        for (std::size_t k = 0; k < m.hidden; ++k) {
            const float wv = m.wc[c * m.hidden + k];
            const float* fp = ws.feat.data() + k * P;
            for (std::size_t i = 0; i < P; ++i) lp[i] += wv * fp[i];
        }
    }

    double loss = 0.0;
    const std::size_t C = m.classes;
    for (std::size_t i = 0; i < P; ++i) {
        float mx = ws.logits[i];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, ws.logits[c * P + i]);
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const double e = std::exp(static_cast<double>(ws.logits[c * P + i]) - mx);
            ws.probs[c * P + i] = static_cast<float>(e);
            sum += e;
        }
        const double inv = 1.0 / sum;
        for (std::size_t c = 0; c < C; ++c)
            ws.probs[c * P + i] = static_cast<float>(ws.probs[c * P + i] * inv);
        if (truth) {
            const std::size_t y = truth->ids[i];
            loss += std::log(sum) + static_cast<double>(mx) -
                    static_cast<double>(ws.logits[y * P + i]);
        }
    }
    return truth ? loss / static_cast<double>(P) : 0.0;
}

}  // namespace

SegModel SegModel::init(std::size_t classes, std::size_t hidden, float p_drop,
                        std::uint64_t seed) {
    if (classes == 0 || classes > 256)
        throw std::invalid_argument("segmenter: class count must be in [1, 256]");
    if (hidden == 0) throw std::invalid_argument("segmenter: hidden width must be >= 1");
    if (!(p_drop >= 0.0f && p_drop < 1.0f))
        throw std::invalid_argument("segmenter: p_drop must be in [0, 1)");
    SegModel m;
    m.classes = classes;
    m.hidden = hidden;
    m.p_drop = p_drop;
    m.init_seed = seed;
    Rng rng(mix_seed(seed, 0x1717));
    auto he_fill = [&rng](std::vector<float>& w, std::size_t n, std::size_t fan_in) {
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        w.resize(n);
        for (auto& v : w) v = static_cast<float>(sd * rng.gaussian());
    };
    he_fill(m.w1, m.hidden * m.in_channels * 9, m.in_channels * 9);
    m.b1.assign(m.hidden, 0.0f);
    he_fill(m.w2, m.hidden * m.hidden * 9, m.hidden * 9);
    m.b2.assign(m.hidden, 0.0f);
    he_fill(m.w3, m.hidden * m.hidden * 9, m.hidden * 9);
    m.b3.assign(m.hidden, 0.0f);
    he_fill(m.wc, m.classes * m.hidden, m.hidden);
    m.bc.assign(m.classes, 0.0f);
    return m;
}

std::size_t SegModel::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size() +
           wc.size() + bc.size();
}

Tensor seg_forward(const SegModel& model, const Tensor& image, bool dropout_active,
                   std::uint64_t rng_seed) {
    check_image(model, image);
    const std::size_t H = image.dims()[1], W = image.dims()[2];
    Workspace ws;
    std::vector<float> mask;
    if (dropout_active) mask = dropout_mask(model.hidden, model.p_drop, rng_seed);
    forward_impl(model, image.data(), H, W, dropout_active ? mask.data() : nullptr, ws,
                 nullptr);
    return Tensor({model.classes, H, W}, std::move(ws.probs));
}

Tensor seg_features(const SegModel& model, const Tensor& image, bool dropout_active,
                    std::uint64_t rng_seed) {
    check_image(model, image);
    const std::size_t H = image.dims()[1], W = image.dims()[2];
    Workspace ws;
    std::vector<float> mask;
    if (dropout_active) mask = dropout_mask(model.hidden, model.p_drop, rng_seed);
    forward_impl(model, image.data(), H, W, dropout_active ? mask.data() : nullptr, ws,
                 nullptr);
    return Tensor({model.hidden, H, W}, std::move(ws.feat));
}

Tensor mc_sample(const SegModel& model, const Tensor& image, std::size_t runs,
                 std::uint64_t seed) {
    if (runs == 0) throw std::invalid_argument("mc_sample: run count must be >= 1");
    check_image(model, image);
    const std::size_t H = image.dims()[1], W = image.dims()[2];
    const std::size_t slice = model.classes * H * W;
    Tensor out({runs, model.classes, H, W});
    float* base = out.data();

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        Workspace ws;
        for (std::size_t j = lo; j < hi; ++j) {
            const auto mask = dropout_mask(model.hidden, model.p_drop, mix_seed(seed, j));
            forward_impl(model, image.data(), H, W, mask.data(), ws, nullptr);
            std::memcpy(base + j * slice, ws.probs.data(), slice * sizeof(float));
        }
    };

    std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, runs);
    if (workers <= 1) {
        run_range(0, runs);
        return out;
    }
    // Runs are seeded independently and write disjoint slices, so the result
    // does not depend on the worker count.
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        const std::size_t lo = runs * t / workers;
        const std::size_t hi = runs * (t + 1) / workers;
        pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
    return out;
}

SegGrad::SegGrad(const SegModel& m)
    : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0),
      b2(m.b2.size(), 0.0), w3(m.w3.size(), 0.0), b3(m.b3.size(), 0.0),
      wc(m.wc.size(), 0.0), bc(m.bc.size(), 0.0) {}

void SegGrad::zero() {
    auto z = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    z(w1); z(b1); z(w2); z(b2); z(w3); z(b3); z(wc); z(bc);
}

double seg_loss_grad(const SegModel& model, const Tensor& image, const LabelMask& truth,
                     bool dropout_active, std::uint64_t dropout_seed, SegGrad* grad) {
    check_image(model, image);
    const std::size_t H = image.dims()[1], W = image.dims()[2];
    if (truth.height != H || truth.width != W)
        throw std::invalid_argument("segmenter: mask size does not match image");
    for (std::uint8_t id : truth.ids)
        if (id >= model.classes)
            throw std::out_of_range("segmenter: mask id " + std::to_string(id) +
                                    " >= class count " + std::to_string(model.classes));
    const std::size_t P = H * W;

    Workspace ws;
    std::vector<float> mask;
    if (dropout_active) mask = dropout_mask(model.hidden, model.p_drop, dropout_seed);
    const double loss = forward_impl(model, image.data(), H, W,
                                     dropout_active ? mask.data() : nullptr, ws, &truth);
    if (!grad) return loss;

    const std::size_t C = model.classes;
    // d(loss)/d(logits), reusing the probs buffer.
    std::vector<float>& dlogits = ws.probs;
    const float invp = 1.0f / static_cast<float>(P);
    for (std::size_t i = 0; i < P; ++i) dlogits[truth.ids[i] * P + i] -= 1.0f;
    for (float& v : dlogits) v *= invp;

    // Classifier.
    for (std::size_t c = 0; c < C; ++c) {
        const float* dl = dlogits.data() + c * P;
        double acc = 0.0;
        for (std::size_t i = 0; i < P; ++i) acc += dl[i];
        grad->bc[c] += acc;
        for (std::size_t k = 0; k < model.hidden; ++k) {
            const float* fp = ws.feat.data() + k * P;
            double dot = 0.0;
            for (std::size_t i = 0; i < P; ++i) dot += static_cast<double>(dl[i]) * fp[i];
            grad->wc[c * model.hidden + k] += dot;
        }
    }

    std::vector<float> dfeat(model.hidden * P, 0.0f);
    for (std::size_t c = 0; c < C; ++c) {
        const float* dl = dlogits.data() + c * P;
        for (std::size_t k = 0; k < model.hidden; ++k) {
            const float wv = model.wc[c * model.hidden + k];
            float* df = dfeat.data() + k * P;
            for (std::size_t i = 0; i < P; ++i) df[i] += wv * dl[i];
        }
    }

    // Through dropout and the third ReLU.
    for (std::size_t k = 0; k < model.hidden; ++k) {
        const float s = dropout_active ? mask[k] : 1.0f;
        float* df = dfeat.data() + k * P;
        const float* h = ws.h3.data() + k * P;
        for (std::size_t i = 0; i < P; ++i) df[i] = h[i] > 0.0f ? s * df[i] : 0.0f;
    }

    std::vector<float> dh(model.hidden * P, 0.0f);
    conv3x3_backward_params(dfeat.data(), model.hidden, ws.h2.data(), model.hidden, H, W,
                            grad->w3.data(), grad->b3.data());
    conv3x3_backward_input(dfeat.data(), model.hidden, model.w3.data(), model.hidden, H, W,
                           dh.data());
    for (std::size_t n = 0; n < dh.size(); ++n)
        dh[n] = ws.h2[n] > 0.0f ? dh[n] : 0.0f;

    std::vector<float>& dh2 = dfeat;  // reuse
    std::fill(dh2.begin(), dh2.end(), 0.0f);
    conv3x3_backward_params(dh.data(), model.hidden, ws.h1.data(), model.hidden, H, W,
                            grad->w2.data(), grad->b2.data());
    conv3x3_backward_input(dh.data(), model.hidden, model.w2.data(), model.hidden, H, W,
                           dh2.data());
    for (std::size_t n = 0; n < dh2.size(); ++n)
        dh2[n] = ws.h1[n] > 0.0f ? dh2[n] : 0.0f;

    conv3x3_backward_params(dh2.data(), model.hidden, image.data(), model.in_channels, H, W,
                            grad->w1.data(), grad->b1.data());
    return loss;
}

double seg_loss(const SegModel& model, const Tensor& image, const LabelMask& truth) {
    return seg_loss_grad(model, image, truth, false, 0, nullptr);
}

IouResult iou(const LabelMask& pred, const LabelMask& truth, std::size_t classes) {
    if (pred.height != truth.height || pred.width != truth.width)
        throw std::invalid_argument("iou: mask dimensions differ");
    std::vector<std::size_t> inter(classes, 0), pred_n(classes, 0), truth_n(classes, 0);
    for (std::size_t i = 0; i < pred.ids.size(); ++i) {
        const std::uint8_t p = pred.ids[i], t = truth.ids[i];
        if (p >= classes || t >= classes)
            throw std::out_of_range("iou: id exceeds class count");
        ++pred_n[p];
        ++truth_n[t];
        if (p == t) ++inter[p];
    }
    IouResult out;
    out.per_class.resize(classes);
    double sum = 0.0;
    std::size_t engaged = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t uni = pred_n[c] + truth_n[c] - inter[c];
        if (uni == 0) continue;  // absent from both: excluded from the mean
        out.per_class[c] = static_cast<double>(inter[c]) / static_cast<double>(uni);
        sum += *out.per_class[c];
        ++engaged;
    }
    out.mean_iou = engaged ? sum / static_cast<double>(engaged) : 0.0;
    return out;
}

namespace {

SplitMetrics split_metrics(const SegModel& model, const std::vector<SceneSample>& data,
                           std::span<const std::size_t> idx) {
    SplitMetrics out;
    out.scene_count = idx.size();
    out.per_class.resize(model.classes);
    if (idx.empty()) return out;
    std::vector<std::size_t> inter(model.classes, 0), pred_n(model.classes, 0),
        truth_n(model.classes, 0);
    for (std::size_t i : idx) {
        const Tensor probs = seg_forward(model, data[i].image, false, 0);
        const LabelMask pred = argmax_channel(probs);
        for (std::size_t n = 0; n < pred.ids.size(); ++n) {
            const std::uint8_t p = pred.ids[n], t = data[i].mask.ids[n];
            ++pred_n[p];
            ++truth_n[t];
            if (p == t) ++inter[p];
        }
    }
    double sum = 0.0;
    std::size_t engaged = 0;
    for (std::size_t c = 0; c < model.classes; ++c) {
        const std::size_t uni = pred_n[c] + truth_n[c] - inter[c];
        if (uni == 0) continue;
        out.per_class[c] = static_cast<double>(inter[c]) / static_cast<double>(uni);
        sum += *out.per_class[c];
        ++engaged;
    }
    if (engaged) out.mean_iou = sum / static_cast<double>(engaged);
    return out;
}

}  // namespace

TrainResult seg_train(SegModel& model, const std::vector<SceneSample>& data,
                      const TrainConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("seg_train: empty dataset");
    if (cfg.epochs < 1) throw std::invalid_argument("seg_train: epochs must be >= 1");
    if (!(cfg.split > 0.0 && cfg.split < 1.0))
        throw std::invalid_argument("seg_train: split must be in (0, 1)");
    if (cfg.batch_size < 1) throw std::invalid_argument("seg_train: batch size must be >= 1");
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("seg_train: learning rate must be > 0");
    for (const auto& s : data)
        for (std::uint8_t id : s.mask.ids)
            if (id >= model.classes)
                throw std::out_of_range("seg_train: mask id " + std::to_string(id) +
                                        " >= class count " + std::to_string(model.classes));

    const std::size_t n = data.size();
    const auto n_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(cfg.split * static_cast<double>(n))));
    std::vector<std::size_t> train_idx(n_train), test_idx;
    for (std::size_t i = 0; i < n_train; ++i) train_idx[i] = i;
    for (std::size_t i = n_train; i < n; ++i) test_idx.push_back(i);

    SegGrad grad(model);
    std::vector<std::size_t> order(n_train);
    double epoch_loss = 0.0;
    std::uint64_t tick = 0;

    auto apply = [&](std::vector<float>& w, const std::vector<double>& g, double scale) {
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = static_cast<float>(w[i] - scale * g[i]);
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < n_train; ++i) order[i] = train_idx[i];
        Rng shuffle_rng(mix_seed(cfg.seed, 0x5F0F, epoch));
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        epoch_loss = 0.0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t stop = std::min(n_train, start + cfg.batch_size);
            grad.zero();
            for (std::size_t b = start; b < stop; ++b) {
                const auto& s = data[order[b]];
                epoch_loss += seg_loss_grad(model, s.image, s.mask, true,
                                            mix_seed(cfg.seed, 0xD209, tick++), &grad);
            }
            const double scale = cfg.learning_rate / static_cast<double>(stop - start);
            apply(model.w1, grad.w1, scale);
            apply(model.b1, grad.b1, scale);
            apply(model.w2, grad.w2, scale);
            apply(model.b2, grad.b2, scale);
            apply(model.w3, grad.w3, scale);
            apply(model.b3, grad.b3, scale);
            apply(model.wc, grad.wc, scale);
            apply(model.bc, grad.bc, scale);
        }
    }

    model.train_seed = cfg.seed;
    model.trained = true;

    TrainResult result;
    result.final_loss = epoch_loss / static_cast<double>(n_train);
    result.train = split_metrics(model, data, train_idx);
    result.test = split_metrics(model, data, test_idx);
    return result;
}

namespace {

constexpr char kModelMagic[4] = {'C', 'N', 'E', 'M'};
constexpr std::uint8_t kModelVersion = 1;

Tensor wrap(const std::vector<float>& v, std::vector<std::size_t> dims) {
    return Tensor(std::move(dims), v);
}

}  // namespace

void save_model(const SegModel& model, const std::filesystem::path& path) {
    nlohmann::json manifest = {
        {"arch", "conv3x3_x3_spatial_dropout_1x1"},
        {"in_channels", model.in_channels},
        {"hidden", model.hidden},
        {"classes", model.classes},
        {"p_drop", static_cast<double>(model.p_drop)},
        {"init_seed", model.init_seed},
        {"train_seed", model.train_seed},
        {"trained", model.trained},
    };
    const std::string mtext = manifest.dump();

    std::string bytes;
    bytes.append(kModelMagic, 4);
    bytes.push_back(static_cast<char>(kModelVersion));
    const auto mlen = static_cast<std::uint32_t>(mtext.size());
    for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<char>((mlen >> s) & 0xFF));
    bytes += mtext;

    const std::size_t h = model.hidden, in = model.in_channels, C = model.classes;
    bytes += encode_tensor(wrap(model.w1, {h, in, 3, 3}));
    bytes += encode_tensor(wrap(model.b1, {h}));
    bytes += encode_tensor(wrap(model.w2, {h, h, 3, 3}));
    bytes += encode_tensor(wrap(model.b2, {h}));
    bytes += encode_tensor(wrap(model.w3, {h, h, 3, 3}));
    bytes += encode_tensor(wrap(model.b3, {h}));
    bytes += encode_tensor(wrap(model.wc, {C, h}));
    bytes += encode_tensor(wrap(model.bc, {C}));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("model: cannot open " + path.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("model: write failed for " + path.string());
}

SegModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("model: cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 9 || std::memcmp(bytes.data(), kModelMagic, 4) != 0)
        throw std::runtime_error("model: bad magic in " + path.string());
    if (bytes[4] != kModelVersion)
        throw std::runtime_error("model: unsupported version in " + path.string());
    std::uint32_t mlen = 0;
    for (int s = 0; s < 4; ++s) mlen |= static_cast<std::uint32_t>(bytes[5 + s]) << (8 * s);
    if (bytes.size() < 9 + mlen)
        throw std::runtime_error("model: truncated manifest in " + path.string());
    const nlohmann::json manifest =
        nlohmann::json::parse(bytes.begin() + 9, bytes.begin() + 9 + mlen);

    SegModel m;
    m.in_channels = manifest.at("in_channels").get<std::size_t>();
    m.hidden = manifest.at("hidden").get<std::size_t>();
    m.classes = manifest.at("classes").get<std::size_t>();
    m.p_drop = static_cast<float>(manifest.at("p_drop").get<double>());
    m.init_seed = manifest.at("init_seed").get<std::uint64_t>();
    m.train_seed = manifest.at("train_seed").get<std::uint64_t>();
    m.trained = manifest.at("trained").get<bool>();

    std::size_t pos = 9 + mlen;
    auto take = [&](std::vector<float>& dst, std::size_t expected) {
        const Tensor t = decode_tensor(bytes, &pos);
        if (t.size() != expected)
            throw std::runtime_error("model: parameter tensor size mismatch in " +
                                     path.string());
        dst.assign(t.values().begin(), t.values().end());
    };
    take(m.w1, m.hidden * m.in_channels * 9);
    take(m.b1, m.hidden);
    take(m.w2, m.hidden * m.hidden * 9);
    take(m.b2, m.hidden);
    take(m.w3, m.hidden * m.hidden * 9);
    take(m.b3, m.hidden);
    take(m.wc, m.classes * m.hidden);
    take(m.bc, m.classes);
    if (pos != bytes.size())
        throw std::runtime_error("model: trailing bytes in " + path.string());
    return m;
}

}  // namespace cne
