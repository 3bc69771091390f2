#include "cne/render.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace cne {

namespace {

Rgb hsv_to_rgb(double h, double s, double v) {
    const double hh = h * 6.0;
    const int sector = static_cast<int>(hh) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    auto to8 = [](double x) {
        return static_cast<std::uint8_t>(std::lround(255.0 * x));
    };
    return {to8(r), to8(g), to8(b)};
}

}  // namespace

std::vector<Rgb> class_palette(std::size_t class_count) {
    std::vector<Rgb> palette;
    palette.reserve(class_count);
    std::set<Rgb> used;
    for (std::size_t id = 0; id < class_count; ++id) {
        // Golden-angle hue walk keeps neighbouring ids far apart in hue.
        const double hue = std::fmod(0.61803398875 * static_cast<double>(id), 1.0);
        const double sat = 0.55 + 0.15 * static_cast<double>(id % 3);
        const double val = 0.95 - 0.20 * static_cast<double>((id / 3) % 2);
        Rgb c = hsv_to_rgb(hue, sat, val);
        while (used.count(c)) {  // resolve rare 8-bit collisions deterministically
            c[2] = static_cast<std::uint8_t>(c[2] + 1);
            if (c[2] == 0) c[1] = static_cast<std::uint8_t>(c[1] + 1);
        }
        used.insert(c);
        palette.push_back(c);
    }
    return palette;
}

std::optional<std::size_t> palette_lookup(const std::vector<Rgb>& palette, Rgb color) {
    for (std::size_t i = 0; i < palette.size(); ++i)
        if (palette[i] == color) return i;
    return std::nullopt;
}

GrayImage render_uncertainty_map(const Tensor& pixel_std) {
    if (pixel_std.rank() != 2)
        throw std::invalid_argument("render_uncertainty_map: expected a (H, W) tensor");
    GrayImage img;
    img.height = pixel_std.dims()[0];
    img.width = pixel_std.dims()[1];
    img.pixels.resize(img.height * img.width, 0);
    float max_v = 0.0f;
    for (float v : pixel_std.values()) {
        if (v < 0.0f)
            throw std::invalid_argument("render_uncertainty_map: negative value");
        if (v > max_v) max_v = v;
    }
    if (max_v > 0.0f) {
        const double scale = 255.0 / static_cast<double>(max_v);
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            const long q = std::lround(scale * static_cast<double>(pixel_std[i]));
            img.pixels[i] = static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
        }
    }
    return img;
}

RgbImage render_class_mask(const LabelMask& mask, std::size_t class_count) {
    const auto palette = class_palette(class_count);
    RgbImage img;
    img.height = mask.height;
    img.width = mask.width;
    img.pixels.resize(3 * mask.pixels());
    for (std::size_t i = 0; i < mask.pixels(); ++i) {
        const std::uint8_t id = mask.ids[i];
        if (id >= class_count)
            throw std::out_of_range("render_class_mask: id " + std::to_string(id) +
                                    " beyond palette of " + std::to_string(class_count));
        const Rgb& c = palette[id];
        img.pixels[3 * i + 0] = c[0];
        img.pixels[3 * i + 1] = c[1];
        img.pixels[3 * i + 2] = c[2];
    }
    return img;
}

namespace {

void write_netpbm(const std::filesystem::path& path, const char* magic,
                  std::size_t width, std::size_t height,
                  const std::vector<std::uint8_t>& payload) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << magic << "\n" << width << " " << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    write_netpbm(path, "P5", img.width, img.height, img.pixels);
}

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
    write_netpbm(path, "P6", img.width, img.height, img.pixels);
}

}  // namespace cne
