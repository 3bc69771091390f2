// Acceptance suite. Runs every criterion at its stated tolerance and prints
// one [PASS]/[FAIL] line per criterion; exits non-zero if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cne/logreg.hpp"
#include "cne/pipeline.hpp"
#include "cne/render.hpp"
#include "cne/report.hpp"
#include "cne/rng.hpp"
#include "cne/segmenter.hpp"
#include "cne/synth.hpp"
#include "cne/tensor.hpp"
#include "cne/tensor_io.hpp"
#include "cne/uncertainty.hpp"

using namespace cne;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_errors;

void criterion(int number, const std::string& label, double budget_seconds,
               const std::function<void()>& body) {
    g_errors.clear();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const std::exception& e) {
        g_errors.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_seconds > 0.0 && elapsed > budget_seconds)
        g_errors.push_back("runtime " + std::to_string(elapsed) + "s exceeds budget " +
                           std::to_string(budget_seconds) + "s");
    if (g_errors.empty()) {
        std::printf("[PASS] criterion %d: %s (%.1fs)\n", number, label.c_str(), elapsed);
    } else {
        ++g_failures;
        std::printf("[FAIL] criterion %d: %s (%.1fs)\n", number, label.c_str(), elapsed);
        for (const auto& e : g_errors) std::printf("       %s\n", e.c_str());
    }
    std::fflush(stdout);
}

void expect(bool ok, const std::string& what) {
    if (!ok) g_errors.push_back(what);
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CNE_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "cne_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// ---- criterion 1 ----------------------------------------------------------

void vectorization_oracle() {
    Rng rng(0xACC1);
    const std::size_t class_choices[] = {3, 5, 44};
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t H = 8 + rng.below(57);
        const std::size_t W = 8 + rng.below(57);
        const std::size_t C = class_choices[rng.below(3)];
        LabelMask mask(H, W);
        for (auto& id : mask.ids) id = static_cast<std::uint8_t>(rng.below(C));
        const PatternVector z = vectorize(one_hot_encode(mask, C));
        std::vector<double> recount(C, 0.0);
        for (auto id : mask.ids) recount[id] += 1.0;
        expect(z == recount, "vectorize differs from recount at rep " + std::to_string(rep));
        double total = 0.0;
        for (double v : z) total += v;
        expect(total == static_cast<double>(H * W), "vectorize total != H*W");
    }
}

// ---- criterion 2 ----------------------------------------------------------

void mc_statistics_oracle() {
    Rng rng(0xACC2);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t J = 1 + rng.below(25);
        const std::size_t C = 2 + rng.below(5);
        const std::size_t H = 3 + rng.below(8);
        const std::size_t W = 3 + rng.below(8);
        std::vector<float> vals(J * C * H * W);
        for (auto& v : vals) v = static_cast<float>(rng.uniform());
        const Tensor stack({J, C, H, W}, std::move(vals));
        const UncertaintyMaps maps = mc_statistics(stack);
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t x = 0; x < W; ++x) {
                    double mean = 0.0;
                    for (std::size_t j = 0; j < J; ++j) mean += stack.at({j, c, y, x});
                    mean /= static_cast<double>(J);
                    double ss = 0.0;
                    for (std::size_t j = 0; j < J; ++j) {
                        const double d = stack.at({j, c, y, x}) - mean;
                        ss += d * d;
                    }
                    const double sd = std::sqrt(ss / static_cast<double>(J));
                    if (std::fabs(maps.mean_probs.at({c, y, x}) - mean) > 1e-6)
                        expect(false, "mean off at rep " + std::to_string(rep));
                    if (std::fabs(maps.std_probs.at({c, y, x}) - sd) > 1e-6)
                        expect(false, "std off at rep " + std::to_string(rep));
                }
    }
}

// ---- criterion 3 ----------------------------------------------------------

struct GdOracle {
    std::vector<double> alpha;
    double bias = 0.0;
};

GdOracle gd_oracle(const std::vector<PatternVector>& features, const std::vector<int>& labels,
                   const LogRegOptions& opts, double tol, std::size_t max_iter) {
    GdOracle out;
    out.alpha.assign(features.front().size(), 0.0);
    double objective = logreg_objective(features, labels, opts, out.alpha, out.bias);
    for (std::size_t it = 0; it < max_iter; ++it) {
        const auto g = logreg_gradient(features, labels, opts, out.alpha, out.bias);
        double gmax = 0.0, gsq = 0.0;
        for (double v : g) {
            gmax = std::max(gmax, std::fabs(v));
            gsq += v * v;
        }
        if (gmax < tol) break;
        double step = 8.0;
        bool accepted = false;
        while (step > 1e-18) {
            std::vector<double> a_try(out.alpha);
            for (std::size_t c = 0; c < a_try.size(); ++c) a_try[c] -= step * g[c];
            const double b_try = out.bias - step * g.back();
            const double obj_try = logreg_objective(features, labels, opts, a_try, b_try);
            if (obj_try <= objective - 1e-4 * step * gsq) {
                out.alpha = std::move(a_try);
                out.bias = b_try;
                objective = obj_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // at the numerical floor
    }
    return out;
}

void logreg_correctness() {
    // (a) analytic gradient vs central finite differences, relative < 1e-4.
    Rng rng(0xACC3);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t C = 2 + rng.below(6);
        const std::size_t N = 20 + rng.below(60);
        std::vector<PatternVector> features(N, PatternVector(C));
        std::vector<int> labels(N);
        for (std::size_t i = 0; i < N; ++i) {
            for (auto& v : features[i]) v = rng.uniform(0.0, 100.0);
            labels[i] = static_cast<int>(i % 2);
        }
        LogRegOptions opts;
        opts.feature_scale = 0.01;
        opts.l2 = 1e-3;
        std::vector<double> alpha(C);
        for (auto& a : alpha) a = rng.uniform(-1.0, 1.0);
        const double bias = rng.uniform(-1.0, 1.0);
        const auto g = logreg_gradient(features, labels, opts, alpha, bias);
        const double eps = 1e-6;
        for (std::size_t p = 0; p <= C; ++p) {
            auto ap = alpha, am = alpha;
            double bp = bias, bm = bias;
            if (p < C) {
                ap[p] += eps;
                am[p] -= eps;
            } else {
                bp += eps;
                bm -= eps;
            }
            const double fd = (logreg_objective(features, labels, opts, ap, bp) -
                               logreg_objective(features, labels, opts, am, bm)) /
                              (2 * eps);
            const double rel = std::fabs(g[p] - fd) / std::max(1e-8, std::fabs(fd));
            if (rel >= 1e-4)
                expect(false, "gradient relative error " + std::to_string(rel));
        }
    }

    // (b) 200-sample separable set, l2 = 1e-3: accuracy >= 95%, converged.
    std::vector<PatternVector> features;
    std::vector<int> labels;
    Rng gen(0xACC3B);
    for (int i = 0; i < 200; ++i) {
        const int y = i % 2;
        PatternVector z(5);
        for (auto& v : z) v = gen.uniform(0.0, 30.0);
        z[1] = y ? gen.uniform(55.0, 100.0) : gen.uniform(0.0, 45.0);
        features.push_back(z);
        labels.push_back(y);
    }
    LogRegOptions opts;
    opts.feature_scale = 0.01;
    opts.l2 = 1e-3;  // tol stays at the 1e-8 default
    const LogRegModel model = logreg_train(features, labels, opts);
    expect(model.converged, "separable fit did not converge");
    int hits = 0;
    for (std::size_t i = 0; i < features.size(); ++i)
        hits += (logreg_predict(model, features[i]) > 0.5 ? 1 : 0) == labels[i];
    expect(hits >= 190, "training accuracy " + std::to_string(hits) + "/200 below 95%");

    // (c) fitted coefficients match the independent convex oracle within 1e-4.
    const GdOracle oracle = gd_oracle(features, labels, opts, 1e-9, 100000);
    for (std::size_t c = 0; c < model.alpha.size(); ++c)
        if (std::fabs(model.alpha[c] - oracle.alpha[c]) > 1e-4)
            expect(false, "alpha[" + std::to_string(c) + "] newton " +
                              std::to_string(model.alpha[c]) + " vs oracle " +
                              std::to_string(oracle.alpha[c]));
    expect(std::fabs(model.bias - oracle.bias) <= 1e-4, "bias differs from oracle");
}

// ---- criterion 4 ----------------------------------------------------------

void cne_algebra() {
    Rng rng(0xACC4);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t C = 2 + rng.below(8);
        std::vector<double> ap(C), u(C);
        for (auto& v : ap) v = rng.uniform(0.0, 5.0);
        for (auto& v : u) v = rng.uniform(0.01, 4.0);
        const auto raw = cne_raw(ap, u);
        const auto norm = cne_normalize(raw);

        // Positive-scale invariance, exact for power-of-two factors.
        for (const double k : {0.25, 2.0, 512.0}) {
            std::vector<double> scaled(ap);
            for (auto& v : scaled) v *= k;
            if (cne_normalize(cne_raw(scaled, u)) != norm) {
                expect(false, "scale invariance broken at rep " + std::to_string(rep));
                break;
            }
        }
        // General positive factors to rounding.
        const double k = rng.uniform(0.1, 10.0);
        std::vector<double> scaled(ap);
        for (auto& v : scaled) v *= k;
        const auto norm_k = cne_normalize(cne_raw(scaled, u));
        for (std::size_t c = 0; c < C; ++c)
            if (std::fabs(norm_k[c] - norm[c]) > 1e-12) {
                expect(false, "approximate scale invariance broken");
                break;
            }

        // Ranking preservation raw <-> normalized, exact including ties.
        for (std::size_t a = 0; a < C; ++a)
            for (std::size_t b = 0; b < C; ++b) {
                if ((raw[a] > raw[b]) != (norm[a] > norm[b]) ||
                    (raw[a] == raw[b]) != (norm[a] == norm[b])) {
                    expect(false, "ranking not preserved at rep " + std::to_string(rep));
                    a = b = C;
                }
            }

        // Monotone decrease in u_c for fixed positive alpha_plus.
        const std::size_t c = rng.below(C);
        if (ap[c] > 0.0) {
            std::vector<double> u2(u);
            u2[c] += rng.uniform(0.01, 3.0);
            const auto raw2 = cne_raw(ap, u2);
            if (!(raw2[c] < raw[c]))
                expect(false, "raw cne not decreasing in u at rep " + std::to_string(rep));
        }
    }
}

// ---- criteria 5, 6, 8: the planted end-to-end run --------------------------

const char* kPipelineKnobs =
    "--scenes 200 --size 64 --classes 5 --natural-classes 0,1 --threshold 0.5 "
    "--J 25 --pdrop 0.1 --seed 20240901";

fs::path pipeline_dir_a;
fs::path pipeline_dir_b;

void planted_ordering() {
    pipeline_dir_a = work_dir() / "pipeline_a";
    const int rc = run_cli(std::string("pipeline ") + kPipelineKnobs + " --out " +
                           pipeline_dir_a.string());
    expect(rc == 0, "pipeline exited with code " + std::to_string(rc));
    if (rc != 0) return;

    const CneReport report = load_report(pipeline_dir_a / "report" / "report.json");
    expect(report.rows.size() >= 2, "report holds fewer than two ranked patterns");
    if (report.rows.size() < 2) return;
    const std::set<std::size_t> top = {report.rows[0].class_id, report.rows[1].class_id};
    const std::set<std::size_t> planted = {0, 1};
    expect(top == planted, "top-2 classes are {" + std::to_string(report.rows[0].class_id) +
                               "," + std::to_string(report.rows[1].class_id) +
                               "}, expected {0,1}");
    expect(report.rows[0].normalized_cne == 1.0,
           "top normalized value " + std::to_string(report.rows[0].normalized_cne) +
               " != 1.0");
    expect(report.meta.mc_runs == 25, "report metadata J != 25");
    expect(std::fabs(report.meta.p_drop - 0.1) < 1e-7, "report metadata p_drop != 0.1");
    expect(report.meta.ece_bins == 15, "report metadata bins != 15");
}

void segmenter_quality_gate() {
    const auto metrics_path = pipeline_dir_a / "model" / "seg_metrics.json";
    expect(fs::exists(metrics_path), "seg_metrics.json missing (pipeline failed?)");
    if (!fs::exists(metrics_path)) return;
    const std::string text = slurp(metrics_path);
    const auto pos = text.find("\"test_mean_iou\":");
    expect(pos != std::string::npos, "test_mean_iou missing from seg_metrics.json");
    if (pos == std::string::npos) return;
    const double iou = std::strtod(text.c_str() + pos + 16, nullptr);
    expect(iou >= 0.7, "test mean IoU " + std::to_string(iou) + " below 0.7");
}

void determinism() {
    pipeline_dir_b = work_dir() / "pipeline_b";
    const int rc = run_cli(std::string("pipeline ") + kPipelineKnobs + " --out " +
                           pipeline_dir_b.string());
    expect(rc == 0, "second pipeline run exited with code " + std::to_string(rc));
    if (rc != 0) return;

    const auto compare = [&](const fs::path& rel) {
        const std::string a = slurp(pipeline_dir_a / rel);
        const std::string b = slurp(pipeline_dir_b / rel);
        expect(a == b, rel.string() + " differs between identically seeded runs");
    };
    compare(fs::path("report") / "report.json");
    std::size_t images = 0;
    for (const auto& e : fs::recursive_directory_iterator(pipeline_dir_a)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension();
        if (ext == ".pgm" || ext == ".ppm") {
            compare(fs::relative(e.path(), pipeline_dir_a));
            ++images;
        }
    }
    expect(images == 400, "expected 400 PGM/PPM artifacts, saw " + std::to_string(images));
}

// ---- criterion 7 ----------------------------------------------------------

void calibration() {
    {
        const std::vector<double> conf(100, 1.0);
        const std::vector<std::uint8_t> correct(100, 1);
        expect(ece(conf, correct, 15) == 0.0, "all-correct confidence-1 ECE != 0");
    }
    {
        Rng rng(0xACC7);
        const std::size_t n = 100000;
        std::vector<double> conf(n);
        std::vector<std::uint8_t> correct(n);
        for (std::size_t i = 0; i < n; ++i) {
            conf[i] = rng.uniform(0.5, 1.0);
            correct[i] = rng.uniform() < conf[i] ? 1 : 0;
        }
        const double e = ece(conf, correct, 15);
        expect(e < 0.02, "calibrated sampler ECE " + std::to_string(e) + " >= 0.02");
    }
    {
        const std::vector<double> conf(10, 0.8);
        std::vector<std::uint8_t> correct(10, 0);
        for (int i = 0; i < 6; ++i) correct[i] = 1;
        const double e = ece(conf, correct, 15);
        expect(std::fabs(e - 0.2) <= 1e-15,
               "single-bin case ECE " + std::to_string(e) + " != 0.2");
    }
}

// ---- criterion 9 ----------------------------------------------------------

void degeneracy_suite() {
    Rng rng(0xACC9);
    std::vector<float> img_vals(3 * 16 * 16);
    for (auto& v : img_vals) v = static_cast<float>(rng.uniform());
    const Tensor image({3, 16, 16}, std::move(img_vals));

    {  // p_drop = 0: zero spread, all-black uncertainty map
        const auto model = SegModel::init(4, 8, 0.0f, 1);
        const UncertaintyMaps maps = mc_statistics(mc_sample(model, image, 8, 123));
        bool all_zero = true;
        for (float v : maps.std_probs.values()) all_zero = all_zero && v == 0.0f;
        expect(all_zero, "p_drop=0 produced non-zero std");
        const GrayImage g = render_uncertainty_map(maps.pixel_std);
        bool black = true;
        for (auto p : g.pixels) black = black && p == 0;
        expect(black, "p_drop=0 uncertainty map not all black");
    }
    {  // J = 1: zero spread
        const auto model = SegModel::init(4, 8, 0.3f, 2);
        const UncertaintyMaps maps = mc_statistics(mc_sample(model, image, 1, 9));
        bool all_zero = true;
        for (float v : maps.std_probs.values()) all_zero = all_zero && v == 0.0f;
        expect(all_zero, "J=1 produced non-zero std");
    }
    {  // all-negative alpha: raw 0 everywhere, flat normalization 0.5
        ReportMetadata meta;
        const auto report = build_report({-2.0, -0.1, -5.0}, {1.0, 2.0, 3.0},
                                         {0.3, 0.3, 0.4}, {}, meta);
        for (const auto& row : report.rows) {
            expect(row.raw_cne == 0.0, "negative alpha row has raw != 0");
            expect(row.normalized_cne == 0.5, "flat rule not applied");
        }
    }
    {  // u_c = 0 with positive coefficient: epsilon guard ranks it first
        ReportMetadata meta;
        const auto report = build_report({0.5, 5.0, 1.0}, {0.0, 1.0, 0.7},
                                         {0.2, 0.4, 0.4}, {}, meta);
        expect(report.rows.front().class_id == 0,
               "perfectly certain positive pattern not ranked first");
        expect(report.rows.front().normalized_cne == 1.0, "epsilon-guard row not at 1.0");
    }
}

}  // namespace

int main() {
    std::printf("acceptance suite, artifacts under %s\n", work_dir().string().c_str());
    criterion(1, "vectorization equals per-class recount on 100 random masks", 5.0,
              vectorization_oracle);
    criterion(2, "MC statistics match naive mean/population-std on 50 stacks", 5.0,
              mc_statistics_oracle);
    criterion(3, "logistic regression gradient, accuracy and oracle agreement", 30.0,
              logreg_correctness);
    criterion(4, "CNE scale invariance, ranking preservation, monotonicity", 5.0,
              cne_algebra);
    criterion(5, "planted natural classes occupy the top-2 report ranks", 600.0,
              planted_ordering);
    criterion(6, "segmenter test mean IoU at least 0.7 on the planted dataset", 0.0,
              segmenter_quality_gate);
    criterion(7, "expected calibration error closed-form and sampler checks", 0.0,
              calibration);
    criterion(8, "identically seeded pipelines emit byte-identical artifacts", 700.0,
              determinism);
    criterion(9, "degenerate dropout, run-count, coefficient and u_c cases", 0.0,
              degeneracy_suite);

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
