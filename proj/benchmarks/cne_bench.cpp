#include <benchmark/benchmark.h>

#include "cne/logreg.hpp"
#include "cne/rng.hpp"
#include "cne/segmenter.hpp"
#include "cne/synth.hpp"
#include "cne/tensor.hpp"
#include "cne/uncertainty.hpp"

using namespace cne;

namespace {

Tensor random_image(std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> v(3 * size * size);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    return Tensor({3, size, size}, std::move(v));
}

}  // namespace

static void BM_forward(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    const auto model = SegModel::init(5, 16, 0.1f, 1);
    const Tensor img = random_image(size, 2);
    for (auto _ : state) {
        const Tensor probs = seg_forward(model, img, false, 0);
        benchmark::DoNotOptimize(probs.data());
    }
    state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_forward)->Arg(32)->Arg(64)->Arg(128);

static void BM_mc_sample(benchmark::State& state) {
    const auto runs = static_cast<std::size_t>(state.range(0));
    const auto model = SegModel::init(5, 16, 0.1f, 1);
    const Tensor img = random_image(64, 2);
    for (auto _ : state) {
        const Tensor stack = mc_sample(model, img, runs, 7);
        benchmark::DoNotOptimize(stack.data());
    }
    state.SetItemsProcessed(state.iterations() * runs);
}
BENCHMARK(BM_mc_sample)->Arg(5)->Arg(25);

static void BM_train_step(benchmark::State& state) {
    SynthConfig cfg;
    cfg.scenes = 1;
    cfg.height = cfg.width = 64;
    cfg.classes = 5;
    cfg.natural_classes = {0};
    cfg.seed = 3;
    const auto samples = synth_generate(cfg);
    auto model = SegModel::init(5, 16, 0.1f, 1);
    SegGrad grad(model);
    std::uint64_t tick = 0;
    for (auto _ : state) {
        grad.zero();
        const double loss = seg_loss_grad(model, samples[0].image, samples[0].mask, true,
                                          tick++, &grad);
        benchmark::DoNotOptimize(loss);
    }
}
BENCHMARK(BM_train_step);

static void BM_reduce_std(benchmark::State& state) {
    Rng rng(4);
    std::vector<float> v(25 * 5 * 64 * 64);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    const Tensor stack({25, 5, 64, 64}, std::move(v));
    for (auto _ : state) {
        const Tensor s = reduce_std_axis(stack, 0);
        benchmark::DoNotOptimize(s.data());
    }
}
BENCHMARK(BM_reduce_std);

static void BM_mc_statistics(benchmark::State& state) {
    Rng rng(5);
    std::vector<float> v(25 * 5 * 64 * 64);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    const Tensor stack({25, 5, 64, 64}, std::move(v));
    for (auto _ : state) {
        const UncertaintyMaps maps = mc_statistics(stack);
        benchmark::DoNotOptimize(maps.pixel_std.data());
    }
}
BENCHMARK(BM_mc_statistics);

static void BM_vectorize(benchmark::State& state) {
    Rng rng(6);
    LabelMask mask(64, 64);
    for (auto& id : mask.ids) id = static_cast<std::uint8_t>(rng.below(44));
    const OneHotMask oh = one_hot_encode(mask, 44);
    for (auto _ : state) {
        const PatternVector z = vectorize(oh);
        benchmark::DoNotOptimize(z.data());
    }
}
BENCHMARK(BM_vectorize);

static void BM_logreg_train(benchmark::State& state) {
    Rng rng(7);
    std::vector<PatternVector> features;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        PatternVector z(5);
        for (auto& v : z) v = rng.uniform(0.0, 4096.0);
        features.push_back(z);
        labels.push_back(i % 2);
    }
    LogRegOptions opts;
    opts.feature_scale = 1.0 / 4096.0;
    for (auto _ : state) {
        const LogRegModel model = logreg_train(features, labels, opts);
        benchmark::DoNotOptimize(model.alpha.data());
    }
}
BENCHMARK(BM_logreg_train);

BENCHMARK_MAIN();
