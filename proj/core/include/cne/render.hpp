#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "cne/tensor.hpp"

namespace cne {

struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    bool operator==(const GrayImage&) const = default;
};

struct RgbImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, interleaved r,g,b

    bool operator==(const RgbImage&) const = default;
};

using Rgb = std::array<std::uint8_t, 3>;

// Deterministic palette of pairwise-distinct colors, one per class id.
// The same table colors both synthetic scene rendering and predicted-mask
// output, so masks are visually comparable to their source scenes.
std::vector<Rgb> class_palette(std::size_t class_count);

// Inverse of class_palette: exact color -> class id, nullopt if absent.
std::optional<std::size_t> palette_lookup(const std::vector<Rgb>& palette, Rgb color);

// Linear rescale of [0, max(pixel_std)] to [0, 255]; an all-zero map renders
// all-black. Input is a rank-2 (H, W) tensor of non-negative values.
GrayImage render_uncertainty_map(const Tensor& pixel_std);

RgbImage render_class_mask(const LabelMask& mask, std::size_t class_count);

// Binary PGM (P5) / PPM (P6), maxval 255.
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
void write_ppm(const RgbImage& img, const std::filesystem::path& path);

}  // namespace cne
