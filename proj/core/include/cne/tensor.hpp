#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cne {

// Dense row-major float tensor (last axis fastest). Rank 0 (empty dims, one
// value) is allowed in memory but rejected by the file format.
class Tensor {
public:
    Tensor() : values_(1, 0.0f) {}

    // Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> dims);

    // Takes ownership of values; validates length and finiteness.
    Tensor(std::vector<std::size_t> dims, std::vector<float> values);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t rank() const { return dims_.size(); }
    std::size_t size() const { return values_.size(); }

    std::span<const float> values() const& { return values_; }
    std::span<float> values() & { return values_; }
    // A span into a temporary would dangle; bind the tensor first.
    void values() && = delete;
    void values() const&& = delete;
    const float* data() const { return values_.data(); }
    float* data() { return values_.data(); }

    float& operator[](std::size_t i) { return values_[i]; }
    float operator[](std::size_t i) const { return values_[i]; }

    // Flat offset of a multi-index; checked against the shape.
    std::size_t offset(std::span<const std::size_t> idx) const;

    float at(std::span<const std::size_t> idx) const { return values_[offset(idx)]; }
    float at(std::initializer_list<std::size_t> idx) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()));
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<float> values_;
};

// Per-pixel class-id raster. Ids are validated against a class count at the
// operations that need one.
struct LabelMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> ids;

    LabelMask() = default;
    LabelMask(std::size_t h, std::size_t w)
        : height(h), width(w), ids(h * w, 0) {}
    LabelMask(std::size_t h, std::size_t w, std::vector<std::uint8_t> values);

    std::uint8_t& at(std::size_t y, std::size_t x) { return ids[y * width + x]; }
    std::uint8_t at(std::size_t y, std::size_t x) const { return ids[y * width + x]; }
    std::size_t pixels() const { return height * width; }

    bool operator==(const LabelMask&) const = default;
};

// C binary channels, exactly one set per pixel.
struct OneHotMask {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> bits;  // [c][y][x]

    std::uint8_t at(std::size_t c, std::size_t y, std::size_t x) const {
        return bits[(c * height + y) * width + x];
    }
};

OneHotMask one_hot_encode(const LabelMask& mask, std::size_t class_count);

// Arithmetic mean over one axis; the axis is removed from the shape.
// Accumulation happens in double, the result is rounded to float.
Tensor reduce_mean_axis(const Tensor& t, std::size_t axis);

// Population standard deviation over one axis (divide by the extent, not
// extent - 1).
Tensor reduce_std_axis(const Tensor& t, std::size_t axis);

// Per-pixel argmax over the leading channel axis of a (C, H, W) tensor.
// Ties break toward the lowest class index.
LabelMask argmax_channel(const Tensor& probs);

}  // namespace cne
