#include "cne/uncertainty.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cne {

UncertaintyMaps mc_statistics(const Tensor& stack) {
    if (stack.rank() != 4)
        throw std::invalid_argument("mc_statistics: expected a (J, C, H, W) tensor, got rank " +
                                    std::to_string(stack.rank()));
    UncertaintyMaps out;
    out.mean_probs = reduce_mean_axis(stack, 0);
    out.std_probs = reduce_std_axis(stack, 0);
    out.predicted = argmax_channel(out.mean_probs);

    const std::size_t H = stack.dims()[2], W = stack.dims()[3];
    const std::size_t plane = H * W;
    Tensor pixel_std({H, W});
    const float* s = out.std_probs.data();
    for (std::size_t i = 0; i < plane; ++i)
        pixel_std[i] = s[out.predicted.ids[i] * plane + i];
    out.pixel_std = std::move(pixel_std);
    return out;
}

void ClassUncertaintyAccumulator::add(const UncertaintyMaps& maps) {
    if (maps.std_probs.rank() != 3)
        throw std::invalid_argument("class_uncertainty: expected (C, H, W) std maps");
    const std::size_t C = maps.std_probs.dims()[0];
    if (sums_.empty()) sums_.assign(C, 0.0);
    if (sums_.size() != C)
        throw std::invalid_argument("class_uncertainty: inconsistent class count");
    const std::size_t plane = maps.std_probs.dims()[1] * maps.std_probs.dims()[2];
    const float* s = maps.std_probs.data();
    for (std::size_t c = 0; c < C; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += s[c * plane + i];
        sums_[c] += sum;
    }
    ++count_;
}

std::vector<double> ClassUncertaintyAccumulator::mean() const {
    if (count_ == 0) throw std::invalid_argument("class_uncertainty: empty map list");
    std::vector<double> u(sums_);
    const double inv = 1.0 / static_cast<double>(count_);
    for (double& v : u) v *= inv;
    return u;
}

std::vector<double> class_uncertainty(const std::vector<UncertaintyMaps>& maps) {
    ClassUncertaintyAccumulator acc;
    for (const auto& m : maps) acc.add(m);
    return acc.mean();
}

double ece(std::span<const double> confidence, std::span<const std::uint8_t> correct,
           std::size_t bins) {
    if (confidence.size() != correct.size())
        throw std::invalid_argument("ece: confidence/correct length mismatch");
    if (confidence.empty()) throw std::invalid_argument("ece: empty input");
    if (bins < 1) throw std::invalid_argument("ece: bins must be >= 1");
    for (double c : confidence)
        if (!(c >= 0.0 && c <= 1.0))
            throw std::invalid_argument("ece: confidence outside [0, 1]");

    std::vector<double> conf_sum(bins, 0.0), acc_sum(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);
    const double b = static_cast<double>(bins);
    for (std::size_t i = 0; i < confidence.size(); ++i) {
        // Bin k covers (k/bins, (k+1)/bins]; confidence 0 lands in bin 0.
        std::size_t k = 0;
        if (confidence[i] > 0.0) {
            k = static_cast<std::size_t>(std::ceil(confidence[i] * b)) - 1;
            if (k >= bins) k = bins - 1;
        }
        conf_sum[k] += confidence[i];
        acc_sum[k] += correct[i] ? 1.0 : 0.0;
        ++count[k];
    }
    double out = 0.0;
    const double n = static_cast<double>(confidence.size());
    for (std::size_t k = 0; k < bins; ++k) {
        if (count[k] == 0) continue;
        const double nk = static_cast<double>(count[k]);
        out += (nk / n) * std::fabs(acc_sum[k] / nk - conf_sum[k] / nk);
    }
    return out;
}

void collect_calibration(const UncertaintyMaps& maps, const LabelMask& truth,
                         std::vector<double>& confidence,
                         std::vector<std::uint8_t>& correct) {
    const std::size_t C = maps.mean_probs.dims()[0];
    const std::size_t plane = maps.mean_probs.dims()[1] * maps.mean_probs.dims()[2];
    if (truth.pixels() != plane)
        throw std::invalid_argument("collect_calibration: truth mask size mismatch");
    const float* a = maps.mean_probs.data();
    for (std::size_t i = 0; i < plane; ++i) {
        float best = a[i];
        for (std::size_t c = 1; c < C; ++c) best = std::max(best, a[c * plane + i]);
        confidence.push_back(std::min(1.0, static_cast<double>(best)));
        correct.push_back(maps.predicted.ids[i] == truth.ids[i] ? 1 : 0);
    }
}

}  // namespace cne
