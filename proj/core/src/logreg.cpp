#include "cne/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace cne {

PatternVector vectorize(const OneHotMask& mask) {
    PatternVector z(mask.channels, 0.0);
    const std::size_t plane = mask.height * mask.width;
    for (std::size_t c = 0; c < mask.channels; ++c) {
        std::size_t count = 0;
        const std::uint8_t* p = mask.bits.data() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) count += p[i];
        z[c] = static_cast<double>(count);
    }
    return z;
}

namespace {

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// log(1 + exp(u)) without overflow.
double softplus(double u) {
    if (u > 0.0) return u + std::log1p(std::exp(-u));
    return std::log1p(std::exp(u));
}

void check_problem(const std::vector<PatternVector>& features, const std::vector<int>& labels) {
    if (features.size() != labels.size())
        throw std::invalid_argument("logreg: feature/label counts differ");
    if (features.size() < 2)
        throw std::invalid_argument("logreg: need at least two samples");
    const std::size_t dim = features.front().size();
    for (const auto& z : features)
        if (z.size() != dim)
            throw std::invalid_argument("logreg: inconsistent feature dimension");
    bool has0 = false, has1 = false;
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("logreg: labels must be 0 or 1");
        (y ? has1 : has0) = true;
    }
    if (!has0 || !has1)
        throw std::invalid_argument(
            "logreg: degenerate problem, only one label value present");
}

double dot_scaled(const std::vector<double>& alpha, double bias, double scale,
                  const PatternVector& z) {
    double t = bias;
    for (std::size_t c = 0; c < alpha.size(); ++c) t += alpha[c] * (scale * z[c]);
    return t;
}

// Cholesky solve of the (dim x dim) SPD system a x = b, in place on copies.
// Retries with growing diagonal jitter if the factorization stalls.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b,
                              std::size_t dim) {
    for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-12 : jitter * 100.0) {
        std::vector<double> m = a;
        if (jitter > 0.0)
            for (std::size_t i = 0; i < dim; ++i) m[i * dim + i] += jitter;
        std::vector<double> chol(dim * dim, 0.0);
        bool ok = true;
        for (std::size_t i = 0; i < dim && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = m[i * dim + j];
                for (std::size_t k = 0; k < j; ++k) s -= chol[i * dim + k] * chol[j * dim + k];
                if (i == j) {
                    if (s <= 0.0) { ok = false; break; }
                    chol[i * dim + i] = std::sqrt(s);
                } else {
                    chol[i * dim + j] = s / chol[j * dim + j];
                }
            }
        }
        if (!ok) {
            if (jitter > 1e-3) throw std::runtime_error("logreg: singular hessian");
            continue;
        }
        std::vector<double> y(dim), x(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= chol[i * dim + k] * y[k];
            y[i] = s / chol[i * dim + i];
        }
        for (std::size_t ii = dim; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < dim; ++k) s -= chol[k * dim + ii] * x[k];
            x[ii] = s / chol[ii * dim + ii];
        }
        return x;
    }
}

}  // namespace

double logreg_objective(const std::vector<PatternVector>& features,
                        const std::vector<int>& labels, const LogRegOptions& opts,
                        const std::vector<double>& alpha, double bias) {
    const double n = static_cast<double>(features.size());
    double nll = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double t = dot_scaled(alpha, bias, opts.feature_scale, features[i]);
        nll += labels[i] ? softplus(-t) : softplus(t);
    }
    double ridge = 0.0;
    for (double a : alpha) ridge += a * a;
    return nll / n + opts.l2 * ridge;
}

std::vector<double> logreg_gradient(const std::vector<PatternVector>& features,
                                    const std::vector<int>& labels,
                                    const LogRegOptions& opts,
                                    const std::vector<double>& alpha, double bias) {
    const std::size_t dim = alpha.size();
    const double inv_n = 1.0 / static_cast<double>(features.size());
    std::vector<double> g(dim + 1, 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double t = dot_scaled(alpha, bias, opts.feature_scale, features[i]);
        const double r = sigmoid(t) - static_cast<double>(labels[i]);
        for (std::size_t c = 0; c < dim; ++c)
            g[c] += r * (opts.feature_scale * features[i][c]);
        g[dim] += r;
    }
    for (double& v : g) v *= inv_n;
    for (std::size_t c = 0; c < dim; ++c) g[c] += 2.0 * opts.l2 * alpha[c];
    return g;
}

LogRegModel logreg_train(const std::vector<PatternVector>& features,
                         const std::vector<int>& labels, const LogRegOptions& opts) {
    check_problem(features, labels);
    if (opts.l2 < 0.0) throw std::invalid_argument("logreg: l2 must be >= 0");
    if (!(opts.feature_scale > 0.0))
        throw std::invalid_argument("logreg: feature_scale must be > 0");

    const std::size_t dim = features.front().size();
    const std::size_t ext = dim + 1;  // alpha plus bias
    const double inv_n = 1.0 / static_cast<double>(features.size());

    LogRegModel model;
    model.alpha.assign(dim, 0.0);
    model.feature_scale = opts.feature_scale;
    model.l2 = opts.l2;

    double objective = logreg_objective(features, labels, opts, model.alpha, model.bias);

    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        const auto g = logreg_gradient(features, labels, opts, model.alpha, model.bias);
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::fabs(v));
        model.final_grad_norm = gmax;
        model.iterations = iter;
        if (gmax < opts.tol) {
            model.converged = true;
            return model;
        }

        // Hessian of the mean NLL plus the ridge block.
        std::vector<double> hess(ext * ext, 0.0);
        for (std::size_t i = 0; i < features.size(); ++i) {
            const double t = dot_scaled(model.alpha, model.bias, opts.feature_scale,
                                        features[i]);
            const double p = sigmoid(t);
            const double w = p * (1.0 - p) * inv_n;
            for (std::size_t a = 0; a < ext; ++a) {
                const double xa = a < dim ? opts.feature_scale * features[i][a] : 1.0;
                for (std::size_t b = 0; b <= a; ++b) {
                    const double xb = b < dim ? opts.feature_scale * features[i][b] : 1.0;
                    hess[a * ext + b] += w * xa * xb;
                }
            }
        }
        for (std::size_t a = 0; a < ext; ++a)
            for (std::size_t b = a + 1; b < ext; ++b) hess[a * ext + b] = hess[b * ext + a];
        for (std::size_t c = 0; c < dim; ++c) hess[c * ext + c] += 2.0 * opts.l2;

        std::vector<double> rhs(ext);
        for (std::size_t a = 0; a < ext; ++a) rhs[a] = -g[a];
        const auto step = solve_spd(hess, rhs, ext);

        // Step halving keeps the objective non-increasing.
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            std::vector<double> alpha_try(dim);
            for (std::size_t c = 0; c < dim; ++c)
                alpha_try[c] = model.alpha[c] + scale * step[c];
            const double bias_try = model.bias + scale * step[dim];
            const double obj_try =
                logreg_objective(features, labels, opts, alpha_try, bias_try);
            if (std::isfinite(obj_try) && obj_try <= objective) {
                model.alpha = std::move(alpha_try);
                model.bias = bias_try;
                objective = obj_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            // No descent direction at numerical precision; report as-is.
            model.iterations = iter + 1;
            model.converged = false;
            return model;
        }
    }

    const auto g = logreg_gradient(features, labels, opts, model.alpha, model.bias);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::fabs(v));
    model.final_grad_norm = gmax;
    model.iterations = opts.max_iter;
    model.converged = gmax < opts.tol;
    return model;
}

double logreg_predict(const LogRegModel& model, const PatternVector& z) {
    if (z.size() != model.alpha.size())
        throw std::invalid_argument("logreg: pattern vector length " +
                                    std::to_string(z.size()) + " != coefficient count " +
                                    std::to_string(model.alpha.size()));
    return sigmoid(dot_scaled(model.alpha, model.bias, model.feature_scale, z));
}

std::vector<double> positive_coeffs(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    for (std::size_t c = 0; c < alpha.size(); ++c) out[c] = std::max(alpha[c], 0.0);
    return out;
}

std::string logreg_to_json(const LogRegModel& model) {
    const nlohmann::json j = {
        {"alpha", model.alpha},
        {"bias", model.bias},
        {"feature_scale", model.feature_scale},
        {"l2", model.l2},
        {"converged", model.converged},
        {"iterations", model.iterations},
    };
    return j.dump(2);
}

LogRegModel logreg_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    LogRegModel m;
    m.alpha = j.at("alpha").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.feature_scale = j.at("feature_scale").get<double>();
    m.l2 = j.at("l2").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<std::size_t>();
    return m;
}

void save_logreg(const LogRegModel& model, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("logreg: cannot open " + path.string() + " for writing");
    f << logreg_to_json(model) << "\n";
}

LogRegModel load_logreg(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("logreg: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return logreg_from_json(text);
}

}  // namespace cne
