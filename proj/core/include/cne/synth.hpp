#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cne/tensor.hpp"

namespace cne {

// One generated scene: RGB image in [0,1], its land-cover mask, and a binary
// scene-level naturalness label derived from the mask.
struct SceneSample {
    Tensor image;    // (3, H, W)
    LabelMask mask;  // (H, W)
    int label = 0;   // 1 = natural, 0 = anthropogenic
};

struct SynthConfig {
    std::size_t scenes = 0;
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t classes = 5;
    std::vector<std::size_t> natural_classes;  // sorted, unique
    double natural_threshold = 0.5;
    double noise_scale = 16.0;  // smoothing radius, pixels
    std::uint64_t seed = 0;
};

// Throws std::invalid_argument on out-of-range fields.
void validate(const SynthConfig& cfg);

// Generates scene `index` for the given config. Scenes are independent of
// generation order: each index derives its own RNG sub-stream from the seed.
SceneSample synth_scene(const SynthConfig& cfg, std::size_t index);

std::vector<SceneSample> synth_generate(const SynthConfig& cfg);

// The scene-label rule, recomputable by any reader:
// 1 iff (pixels whose id is in natural_classes) / (H*W) > natural_threshold.
int scene_label(const LabelMask& mask, const SynthConfig& cfg);

// Fraction of all mask pixels per class, pooled over the sample list.
// Entries sum to 1.
std::vector<double> class_distribution(const std::vector<SceneSample>& samples,
                                       std::size_t classes);

// On-disk dataset: scene_<idx>_img.cnet, scene_<idx>_mask.cnet, index.json.
struct Dataset {
    std::vector<SceneSample> samples;
    SynthConfig config;
    std::vector<std::string> class_names;
};

void write_dataset(const std::vector<SceneSample>& samples, const SynthConfig& cfg,
                   const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace cne
