#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "cne/tensor.hpp"

namespace cne {

// Per-scene class-abundance vector: entry c counts the pixels of class c.
using PatternVector = std::vector<double>;

// Sums each one-hot channel over the spatial dimensions. For a hard mask the
// entries are integers summing to H*W.
PatternVector vectorize(const OneHotMask& mask);

// Binary classifier over pattern vectors: sigmoid(alpha . (feature_scale * z) + bias).
struct LogRegModel {
    std::vector<double> alpha;
    double bias = 0.0;
    double feature_scale = 1.0;
    double l2 = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    double final_grad_norm = 0.0;
};

double logreg_predict(const LogRegModel& model, const PatternVector& z);

struct LogRegOptions {
    double feature_scale = 1.0;  // applied to z before the dot product
    double l2 = 1e-3;            // ridge on alpha; the bias is unregularized
    std::size_t max_iter = 200;
    double tol = 1e-8;  // stop when the gradient max-norm drops below this
};

// Full-batch Newton on mean negative log-likelihood + l2*|alpha|^2, zero
// initialization, step halving whenever a step would increase the objective.
// Throws std::invalid_argument when only one label value is present. A run
// that hits max_iter returns converged = false with final_grad_norm set.
LogRegModel logreg_train(const std::vector<PatternVector>& features,
                         const std::vector<int>& labels, const LogRegOptions& opts = {});

// Regularized mean NLL at the given parameters; exposed for tests.
double logreg_objective(const std::vector<PatternVector>& features,
                        const std::vector<int>& labels, const LogRegOptions& opts,
                        const std::vector<double>& alpha, double bias);

// Gradient of the objective, ordered (alpha..., bias); exposed for tests.
std::vector<double> logreg_gradient(const std::vector<PatternVector>& features,
                                    const std::vector<int>& labels,
                                    const LogRegOptions& opts,
                                    const std::vector<double>& alpha, double bias);

// Elementwise max(alpha_c, 0).
std::vector<double> positive_coeffs(const std::vector<double>& alpha);

std::string logreg_to_json(const LogRegModel& model);
LogRegModel logreg_from_json(const std::string& text);
void save_logreg(const LogRegModel& model, const std::filesystem::path& path);
LogRegModel load_logreg(const std::filesystem::path& path);

}  // namespace cne
