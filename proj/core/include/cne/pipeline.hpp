#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cne/segmenter.hpp"
#include "cne/synth.hpp"

namespace cne {

// Command implementations behind the CLI, exposed so tests can drive them
// directly. Every command is deterministic in its arguments and seeds.

struct SynthCommand {
    SynthConfig config;
    std::filesystem::path out;
};

// Writes scene files and index.json per the dataset layout.
void run_synth(const SynthCommand& cmd);

struct TrainCommand {
    std::filesystem::path data;
    std::filesystem::path out;  // receives model.cnem and seg_metrics.json
    TrainConfig train;
    std::size_t hidden = 16;
    float p_drop = 0.1f;
};

void run_train(const TrainCommand& cmd);

// Per-scene MC sampling uses the sub-seed mix_seed(seed, scene_index), so a
// single scene's outputs are reproducible in isolation.
struct InferCommand {
    std::filesystem::path model;
    std::filesystem::path data;
    std::filesystem::path out;
    std::size_t mc_runs = 25;
    std::uint64_t seed = 0;
    std::vector<std::size_t> scene_ids;  // empty: all scenes
};

// Writes scene_<i>_pred.ppm, scene_<i>_unc.pgm, scene_<i>_mean.cnet and
// scene_<i>_std.cnet per selected scene.
void run_infer(const InferCommand& cmd);

struct ReportCommand {
    std::filesystem::path model;
    std::filesystem::path data;
    std::filesystem::path out;
    std::size_t mc_runs = 25;
    std::uint64_t seed = 0;
    double l2 = 1e-3;
    double epsilon = 1e-9;
    double min_coeff = 0.01;
    std::size_t ece_bins = 15;
};

// Deterministic forwards vectorize every predicted mask, a logistic
// regression is fitted against the scene labels, MC sampling supplies the
// per-class uncertainty, and report.json/csv/txt plus logreg.json land in
// the output directory.
void run_report(const ReportCommand& cmd);

struct PipelineCommand {
    SynthConfig config;
    TrainConfig train;
    std::size_t hidden = 16;
    float p_drop = 0.1f;
    std::size_t mc_runs = 25;
    double l2 = 1e-3;
    double epsilon = 1e-9;
    double min_coeff = 0.01;
    std::size_t ece_bins = 15;
    std::uint64_t seed = 0;
    std::filesystem::path out;
};

// synth -> train-seg -> infer -> report into out/dataset, out/model,
// out/infer, out/report, passing the same seed to each stage; equivalent to
// running the four commands in sequence.
void run_pipeline(const PipelineCommand& cmd);

}  // namespace cne
