#include "cne/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cne {

namespace {

std::size_t checked_element_count(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) throw std::invalid_argument("tensor: zero extent in shape");
        if (d > std::numeric_limits<std::size_t>::max() / n)
            throw std::invalid_argument("tensor: shape overflows size_t");
        n *= d;
    }
    return n;
}

void check_finite(std::span<const float> values) {
    for (float v : values) {
        if (!std::isfinite(v))
            throw std::invalid_argument("tensor: non-finite value");
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims)), values_(checked_element_count(dims_), 0.0f) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<float> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
    if (values_.size() != checked_element_count(dims_))
        throw std::invalid_argument("tensor: value count does not match shape");
    check_finite(values_);
}

std::size_t Tensor::offset(std::span<const std::size_t> idx) const {
    if (idx.size() != dims_.size())
        throw std::out_of_range("tensor: index rank mismatch");
    std::size_t off = 0;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        if (idx[d] >= dims_[d])
            throw std::out_of_range("tensor: index " + std::to_string(idx[d]) +
                                    " out of range for axis " + std::to_string(d));
        off = off * dims_[d] + idx[d];
    }
    return off;
}

LabelMask::LabelMask(std::size_t h, std::size_t w, std::vector<std::uint8_t> values)
    : height(h), width(w), ids(std::move(values)) {
    if (ids.size() != h * w)
        throw std::invalid_argument("label mask: id count does not match H*W");
}

OneHotMask one_hot_encode(const LabelMask& mask, std::size_t class_count) {
    if (class_count == 0 || class_count > 256)
        throw std::invalid_argument("one_hot_encode: class count must be in [1, 256]");
    OneHotMask out;
    out.channels = class_count;
    out.height = mask.height;
    out.width = mask.width;
    out.bits.assign(class_count * mask.pixels(), 0);
    const std::size_t plane = mask.pixels();
    for (std::size_t i = 0; i < plane; ++i) {
        const std::uint8_t id = mask.ids[i];
        if (id >= class_count)
            throw std::out_of_range(
                "one_hot_encode: id " + std::to_string(id) + " >= class count " +
                std::to_string(class_count) + " at pixel (y=" +
                std::to_string(i / mask.width) + ", x=" + std::to_string(i % mask.width) + ")");
        out.bits[id * plane + i] = 1;
    }
    return out;
}

namespace {

// Shapes a reduction over `axis` as outer * extent * inner.
struct AxisSplit {
    std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Tensor& t, std::size_t axis) {
    if (axis >= t.rank())
        throw std::out_of_range("reduce: axis " + std::to_string(axis) +
                                " out of range for rank " + std::to_string(t.rank()));
    AxisSplit s;
    const auto& dims = t.dims();
    for (std::size_t d = 0; d < axis; ++d) s.outer *= dims[d];
    s.extent = dims[axis];
    for (std::size_t d = axis + 1; d < dims.size(); ++d) s.inner *= dims[d];
    return s;
}

std::vector<std::size_t> drop_axis(const std::vector<std::size_t>& dims, std::size_t axis) {
    std::vector<std::size_t> out;
    out.reserve(dims.size() - 1);
    for (std::size_t d = 0; d < dims.size(); ++d)
        if (d != axis) out.push_back(dims[d]);
    return out;
}

}  // namespace

Tensor reduce_mean_axis(const Tensor& t, std::size_t axis) {
    const AxisSplit s = split_axis(t, axis);
    Tensor out(drop_axis(t.dims(), axis));
    const float* in = t.data();
    float* res = out.data();
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < s.extent; ++j)
                acc += in[(o * s.extent + j) * s.inner + i];
            res[o * s.inner + i] = static_cast<float>(acc / static_cast<double>(s.extent));
        }
    }
    return out;
}

Tensor reduce_std_axis(const Tensor& t, std::size_t axis) {
    const AxisSplit s = split_axis(t, axis);
    Tensor out(drop_axis(t.dims(), axis));
    const float* in = t.data();
    float* res = out.data();
    const double inv = 1.0 / static_cast<double>(s.extent);
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t i = 0; i < s.inner; ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < s.extent; ++j)
                mean += in[(o * s.extent + j) * s.inner + i];
            mean *= inv;
            double ss = 0.0;
            for (std::size_t j = 0; j < s.extent; ++j) {
                const double d = in[(o * s.extent + j) * s.inner + i] - mean;
                ss += d * d;
            }
            res[o * s.inner + i] = static_cast<float>(std::sqrt(ss * inv));
        }
    }
    return out;
}

LabelMask argmax_channel(const Tensor& probs) {
    if (probs.rank() != 3)
        throw std::invalid_argument("argmax_channel: expected a (C, H, W) tensor");
    const std::size_t C = probs.dims()[0];
    const std::size_t H = probs.dims()[1];
    const std::size_t W = probs.dims()[2];
    if (C > 256)
        throw std::invalid_argument("argmax_channel: more than 256 channels");
    LabelMask out(H, W);
    const float* p = probs.data();
    const std::size_t plane = H * W;
    for (std::size_t i = 0; i < plane; ++i) {
        std::size_t best = 0;
        float best_v = p[i];
        for (std::size_t c = 1; c < C; ++c) {
            const float v = p[c * plane + i];
            if (v > best_v) {  // strict: ties keep the lowest index
                best_v = v;
                best = c;
            }
        }
        out.ids[i] = static_cast<std::uint8_t>(best);
    }
    return out;
}

}  // namespace cne
