#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "cne/synth.hpp"
#include "cne/tensor.hpp"

namespace cne {

// Small fully-convolutional per-pixel classifier: three 3x3 conv layers with
// ReLU (padding preserves H x W), spatial dropout on the final feature maps,
// then a 1x1 classifier with per-pixel softmax. The dropout layer sits
// directly before the classifier and doubles as the stochastic unit for
// MC sampling.
struct SegModel {
    std::size_t in_channels = 3;
    std::size_t hidden = 16;
    std::size_t classes = 0;
    float p_drop = 0.1f;
    std::uint64_t init_seed = 0;
    std::uint64_t train_seed = 0;
    bool trained = false;

    std::vector<float> w1, b1;  // (hidden, in_channels, 3, 3), (hidden)
    std::vector<float> w2, b2;  // (hidden, hidden, 3, 3), (hidden)
    std::vector<float> w3, b3;  // (hidden, hidden, 3, 3), (hidden)
    std::vector<float> wc, bc;  // (classes, hidden), (classes)

    static SegModel init(std::size_t classes, std::size_t hidden, float p_drop,
                         std::uint64_t seed);
    std::size_t parameter_count() const;
};

struct TrainConfig {
    std::size_t epochs = 10;
    double learning_rate = 0.05;
    std::size_t batch_size = 8;
    double split = 0.8;  // train fraction
    std::uint64_t seed = 0;
};

// Per-pixel softmax probabilities, shape (classes, H, W). With dropout_active,
// each hidden feature map is zeroed independently with probability p_drop and
// survivors are scaled by 1/(1-p_drop); rng_seed fully determines the masks.
// With dropout inactive the output is deterministic and rng_seed is unused.
Tensor seg_forward(const SegModel& model, const Tensor& image, bool dropout_active,
                   std::uint64_t rng_seed);

// Post-dropout feature maps (hidden, H, W), the classifier's input. Exposed
// for diagnostics: averaged over many dropout draws they converge to the
// deterministic activations.
Tensor seg_features(const SegModel& model, const Tensor& image, bool dropout_active,
                    std::uint64_t rng_seed);

// J stochastic forwards stacked j-major into a (J, classes, H, W) tensor.
// Run j uses the sub-seed mix_seed(seed, j); dropout is active in every run.
Tensor mc_sample(const SegModel& model, const Tensor& image, std::size_t runs,
                 std::uint64_t seed);

// Gradient container matching SegModel's parameters; accumulated in double so
// batches can be summed without drift.
struct SegGrad {
    std::vector<double> w1, b1, w2, b2, w3, b3, wc, bc;
    explicit SegGrad(const SegModel& m);
    void zero();
};

// Mean per-pixel cross-entropy of one scene; accumulates parameter gradients
// into *grad when non-null. Dropout masks are a function of dropout_seed only,
// so the loss is a deterministic function of the parameters for a fixed seed.
double seg_loss_grad(const SegModel& model, const Tensor& image, const LabelMask& truth,
                     bool dropout_active, std::uint64_t dropout_seed, SegGrad* grad);

// Deterministic (dropout-off) loss, for monitoring and tests.
double seg_loss(const SegModel& model, const Tensor& image, const LabelMask& truth);

struct IouResult {
    std::vector<std::optional<double>> per_class;  // nullopt: absent from both masks
    double mean_iou = 0.0;                         // over classes present in either
};

IouResult iou(const LabelMask& pred, const LabelMask& truth, std::size_t classes);

struct SplitMetrics {
    std::vector<std::optional<double>> per_class;
    std::optional<double> mean_iou;  // nullopt when the split is empty
    std::size_t scene_count = 0;
};

struct TrainResult {
    SplitMetrics train;
    SplitMetrics test;
    double final_loss = 0.0;  // mean train loss over the last epoch
};

// Mini-batch gradient descent on per-pixel cross-entropy, dropout active
// during training. Deterministic for a fixed config seed. The first
// floor(split * N) scenes (at least one) form the train split, the remainder
// the test split; IoU is computed with dropout off, pooling pixel counts per
// class over each split.
TrainResult seg_train(SegModel& model, const std::vector<SceneSample>& data,
                      const TrainConfig& cfg);

// Model container: "CNEM" magic, version byte, u32 manifest length, JSON
// manifest (shapes, p_drop, classes, seed lineage), then the parameter
// tensors as CNET records in fixed order. Round-trips bit-exactly.
void save_model(const SegModel& model, const std::filesystem::path& path);
SegModel load_model(const std::filesystem::path& path);

}  // namespace cne
