#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cne/tensor.hpp"

namespace cne {

// Statistics of a (J, C, H, W) stack of MC forwards.
struct UncertaintyMaps {
    Tensor mean_probs;   // (C, H, W), mean over the run axis
    Tensor std_probs;    // (C, H, W), population std over the run axis
    LabelMask predicted; // argmax of mean_probs
    Tensor pixel_std;    // (H, W): std of the predicted class at each pixel
};

UncertaintyMaps mc_statistics(const Tensor& stack);

// Per-class scalar uncertainty over an evaluation set: for each image the
// spatial sum of std_probs per class, then the mean across images (so the
// value does not grow with the set size).
std::vector<double> class_uncertainty(const std::vector<UncertaintyMaps>& maps);

// Streaming form of class_uncertainty; add() images in a fixed order.
class ClassUncertaintyAccumulator {
public:
    void add(const UncertaintyMaps& maps);
    std::vector<double> mean() const;  // throws if nothing was added
    std::size_t count() const { return count_; }

private:
    std::vector<double> sums_;
    std::size_t count_ = 0;
};

// Standard binned expected calibration error with equal-width bins over
// (0, 1]: sum_b (n_b / N) * |acc_b - conf_b|.
double ece(std::span<const double> confidence, std::span<const std::uint8_t> correct,
           std::size_t bins);

// Appends one (confidence, correctness) pair per pixel: confidence is the
// max channel of mean_probs, correctness compares predicted with truth.
void collect_calibration(const UncertaintyMaps& maps, const LabelMask& truth,
                         std::vector<double>& confidence,
                         std::vector<std::uint8_t>& correct);

}  // namespace cne
