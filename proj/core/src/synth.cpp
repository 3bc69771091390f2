#include "cne/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "cne/render.hpp"
#include "cne/rng.hpp"
#include "cne/tensor_io.hpp"

namespace cne {

void validate(const SynthConfig& cfg) {
    if (cfg.height == 0 || cfg.width == 0)
        throw std::invalid_argument("synth: image size must be positive");
    if (cfg.classes == 0 || cfg.classes > 256)
        throw std::invalid_argument("synth: class count must be in [1, 256]");
    for (std::size_t c : cfg.natural_classes)
        if (c >= cfg.classes)
            throw std::invalid_argument("synth: natural class " + std::to_string(c) +
                                        " >= class count " + std::to_string(cfg.classes));
    if (!(cfg.natural_threshold > 0.0 && cfg.natural_threshold < 1.0))
        throw std::invalid_argument("synth: natural_threshold must be in (0, 1)");
    if (!(cfg.noise_scale >= 1.0))
        throw std::invalid_argument("synth: noise_scale must be >= 1");
}

int scene_label(const LabelMask& mask, const SynthConfig& cfg) {
    std::size_t natural = 0;
    for (std::uint8_t id : mask.ids)
        if (std::binary_search(cfg.natural_classes.begin(), cfg.natural_classes.end(),
                               static_cast<std::size_t>(id)))
            ++natural;
    const double frac = static_cast<double>(natural) / static_cast<double>(mask.pixels());
    return frac > cfg.natural_threshold ? 1 : 0;
}

namespace {

// Bilinearly interpolated value noise: smooth in space at cfg.noise_scale, so
// thresholding it yields contiguous blobs rather than per-pixel speckle.
struct ValueNoise {
    std::size_t gh = 0, gw = 0;
    double cell = 1.0;
    std::vector<double> grid;

    ValueNoise(std::size_t h, std::size_t w, double scale, Rng& rng) : cell(scale) {
        gh = static_cast<std::size_t>(std::ceil(static_cast<double>(h) / scale)) + 2;
        gw = static_cast<std::size_t>(std::ceil(static_cast<double>(w) / scale)) + 2;
        grid.resize(gh * gw);
        for (double& v : grid) v = rng.uniform();
    }

    double at(std::size_t y, std::size_t x) const {
        const double fy = static_cast<double>(y) / cell;
        const double fx = static_cast<double>(x) / cell;
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t x0 = static_cast<std::size_t>(fx);
        const double ty = fy - static_cast<double>(y0);
        const double tx = fx - static_cast<double>(x0);
        const double v00 = grid[y0 * gw + x0];
        const double v01 = grid[y0 * gw + x0 + 1];
        const double v10 = grid[(y0 + 1) * gw + x0];
        const double v11 = grid[(y0 + 1) * gw + x0 + 1];
        return (v00 * (1 - tx) + v01 * tx) * (1 - ty) + (v10 * (1 - tx) + v11 * tx) * ty;
    }
};

constexpr float kImageNoiseSigma = 0.05f;

}  // namespace

SceneSample synth_scene(const SynthConfig& cfg, std::size_t index) {
    validate(cfg);
    Rng rng(mix_seed(cfg.seed, 0x5C3E, index));

    // A per-scene band shift moves the whole field toward low (natural-ish)
    // or high class ids, so the natural-pixel fraction varies across scenes
    // and both scene labels occur.
    const double shift = rng.uniform(-0.3, 0.3);
    const ValueNoise noise(cfg.height, cfg.width, cfg.noise_scale, rng);

    SceneSample out;
    out.mask = LabelMask(cfg.height, cfg.width);
    for (std::size_t y = 0; y < cfg.height; ++y) {
        for (std::size_t x = 0; x < cfg.width; ++x) {
            double v = noise.at(y, x) + shift;
            v = std::clamp(v, 0.0, 1.0);
            auto id = static_cast<std::size_t>(v * static_cast<double>(cfg.classes));
            if (id >= cfg.classes) id = cfg.classes - 1;
            out.mask.at(y, x) = static_cast<std::uint8_t>(id);
        }
    }

    const auto palette = class_palette(cfg.classes);
    const std::size_t plane = cfg.height * cfg.width;
    std::vector<float> img(3 * plane);
    for (std::size_t i = 0; i < plane; ++i) {
        const Rgb& c = palette[out.mask.ids[i]];
        for (std::size_t ch = 0; ch < 3; ++ch) {
            float v = static_cast<float>(c[ch]) / 255.0f +
                      kImageNoiseSigma * static_cast<float>(rng.gaussian());
            img[ch * plane + i] = std::clamp(v, 0.0f, 1.0f);
        }
    }
    out.image = Tensor({3, cfg.height, cfg.width}, std::move(img));
    out.label = scene_label(out.mask, cfg);
    return out;
}

std::vector<SceneSample> synth_generate(const SynthConfig& cfg) {
    validate(cfg);
    std::vector<SceneSample> out;
    out.reserve(cfg.scenes);
    for (std::size_t i = 0; i < cfg.scenes; ++i) out.push_back(synth_scene(cfg, i));
    return out;
}

std::vector<double> class_distribution(const std::vector<SceneSample>& samples,
                                       std::size_t classes) {
    if (samples.empty())
        throw std::invalid_argument("class_distribution: empty sample list");
    std::vector<std::size_t> counts(classes, 0);
    std::size_t total = 0;
    for (const auto& s : samples) {
        for (std::uint8_t id : s.mask.ids) {
            if (id >= classes)
                throw std::out_of_range("class_distribution: id " + std::to_string(id) +
                                        " >= class count " + std::to_string(classes));
            ++counts[id];
        }
        total += s.mask.pixels();
    }
    std::vector<double> out(classes);
    for (std::size_t c = 0; c < classes; ++c)
        out[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
    return out;
}

namespace {

std::string scene_stem(std::size_t idx, const char* kind) {
    return "scene_" + std::to_string(idx) + "_" + kind + ".cnet";
}

}  // namespace

void write_dataset(const std::vector<SceneSample>& samples, const SynthConfig& cfg,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json index;
    index["scenes"] = samples.size();
    index["classes"] = cfg.classes;
    index["height"] = cfg.height;
    index["width"] = cfg.width;
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        save_tensor(samples[i].image, dir / scene_stem(i, "img"));
        save_mask(samples[i].mask, dir / scene_stem(i, "mask"));
        labels.push_back(samples[i].label);
    }
    index["labels"] = labels;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cfg.classes; ++c) names.push_back("class_" + std::to_string(c));
    index["class_names"] = names;
    index["config"] = {
        {"scenes", cfg.scenes},       {"height", cfg.height},
        {"width", cfg.width},         {"classes", cfg.classes},
        {"natural_classes", cfg.natural_classes},
        {"natural_threshold", cfg.natural_threshold},
        {"noise_scale", cfg.noise_scale},
        {"seed", cfg.seed},
    };
    std::ofstream f(dir / "index.json", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir / "index.json").string());
    f << index.dump(2) << "\n";
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream f(dir / "index.json");
    if (!f) throw std::runtime_error("dataset: missing " + (dir / "index.json").string());
    nlohmann::json index;
    f >> index;

    Dataset ds;
    const auto& cfg_json = index.at("config");
    ds.config.scenes = cfg_json.at("scenes").get<std::size_t>();
    ds.config.height = cfg_json.at("height").get<std::size_t>();
    ds.config.width = cfg_json.at("width").get<std::size_t>();
    ds.config.classes = cfg_json.at("classes").get<std::size_t>();
    ds.config.natural_classes = cfg_json.at("natural_classes").get<std::vector<std::size_t>>();
    ds.config.natural_threshold = cfg_json.at("natural_threshold").get<double>();
    ds.config.noise_scale = cfg_json.at("noise_scale").get<double>();
    ds.config.seed = cfg_json.at("seed").get<std::uint64_t>();
    if (index.contains("class_names"))
        ds.class_names = index.at("class_names").get<std::vector<std::string>>();

    const auto scene_count = index.at("scenes").get<std::size_t>();
    const auto labels = index.at("labels").get<std::vector<int>>();
    if (labels.size() != scene_count)
        throw std::runtime_error("dataset: label count does not match scene count");
    ds.samples.reserve(scene_count);
    for (std::size_t i = 0; i < scene_count; ++i) {
        SceneSample s;
        s.image = load_tensor(dir / scene_stem(i, "img"));
        s.mask = load_mask(dir / scene_stem(i, "mask"));
        s.label = labels[i];
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace cne
