#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "cne/render.hpp"
#include "cne/rng.hpp"
#include "cne/tensor.hpp"
#include "cne/uncertainty.hpp"

using namespace cne;

namespace {

Tensor random_stack(std::size_t J, std::size_t C, std::size_t H, std::size_t W, Rng& rng) {
    std::vector<float> v(J * C * H * W);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    return Tensor({J, C, H, W}, std::move(v));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("mc_statistics on identical slices") {
    const std::vector<float> slice = {0.9f, 0.2f, 0.1f, 0.8f};  // (2,1,2)
    std::vector<float> stacked;
    for (int j = 0; j < 3; ++j) stacked.insert(stacked.end(), slice.begin(), slice.end());
    const auto maps = mc_statistics(Tensor({3, 2, 1, 2}, std::move(stacked)));
    for (std::size_t i = 0; i < slice.size(); ++i) {
        CHECK(maps.mean_probs[i] == doctest::Approx(slice[i]));
        CHECK(maps.std_probs[i] == 0.0f);
    }
    CHECK(maps.predicted.ids[0] == 0);
    CHECK(maps.predicted.ids[1] == 1);
    for (float v : maps.pixel_std.values()) CHECK(v == 0.0f);
}

TEST_CASE("mc_statistics two-run arithmetic") {
    // One class, one pixel, values 0.2 and 0.4 across runs.
    const auto maps = mc_statistics(Tensor({2, 1, 1, 1}, {0.2f, 0.4f}));
    CHECK(maps.mean_probs[0] == doctest::Approx(0.3));
    CHECK(maps.std_probs[0] == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(maps.pixel_std[0] == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("mc_statistics matches a naive loop oracle") {
    Rng rng(19);
    const Tensor stack = random_stack(5, 3, 4, 6, rng);
    const auto maps = mc_statistics(stack);
    const std::size_t C = 3, H = 4, W = 6, J = 5;
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) {
                double mean = 0.0;
                for (std::size_t j = 0; j < J; ++j) mean += stack.at({j, c, y, x});
                mean /= J;
                double ss = 0.0;
                for (std::size_t j = 0; j < J; ++j) {
                    const double d = stack.at({j, c, y, x}) - mean;
                    ss += d * d;
                }
                const double sd = std::sqrt(ss / J);
                CHECK(std::fabs(maps.mean_probs.at({c, y, x}) - mean) < 1e-6);
                CHECK(std::fabs(maps.std_probs.at({c, y, x}) - sd) < 1e-6);
            }
    // pixel_std picks the predicted class's std everywhere.
    const std::size_t plane = H * W;
    for (std::size_t i = 0; i < plane; ++i)
        CHECK(maps.pixel_std[i] ==
              maps.std_probs[maps.predicted.ids[i] * plane + i]);
}

TEST_CASE("mc_statistics rejects non-rank-4 input") {
    CHECK_THROWS_AS(mc_statistics(Tensor({2, 2}, {1, 2, 3, 4})), std::invalid_argument);
}

TEST_CASE("class_uncertainty arithmetic and mean across images") {
    UncertaintyMaps zero;
    zero.std_probs = Tensor({2, 8, 8});
    const auto u0 = class_uncertainty({zero});
    CHECK(u0 == std::vector<double>{0.0, 0.0});

    UncertaintyMaps flat;
    flat.std_probs = Tensor({1, 64, 64}, std::vector<float>(64 * 64, 0.01f));
    const auto u1 = class_uncertainty({flat});
    CHECK(u1[0] == doctest::Approx(40.96).epsilon(1e-4));

    CHECK_THROWS_AS(class_uncertainty({}), std::invalid_argument);
}

TEST_CASE("class_uncertainty equals hand-computed mean of per-image sums") {
    Rng rng(23);
    std::vector<UncertaintyMaps> maps(3);
    std::vector<std::vector<double>> sums(3, std::vector<double>(2, 0.0));
    for (std::size_t img = 0; img < 3; ++img) {
        std::vector<float> v(2 * 5 * 5);
        for (auto& x : v) x = static_cast<float>(rng.uniform());
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t i = 0; i < 25; ++i) sums[img][c] += v[c * 25 + i];
        maps[img].std_probs = Tensor({2, 5, 5}, std::move(v));
    }
    const auto u = class_uncertainty(maps);
    for (std::size_t c = 0; c < 2; ++c) {
        const double expected = (sums[0][c] + sums[1][c] + sums[2][c]) / 3.0;
        CHECK(u[c] == doctest::Approx(expected).epsilon(1e-9));
    }

    // Permutation invariance of the image list.
    std::vector<UncertaintyMaps> shuffled = {maps[2], maps[0], maps[1]};
    const auto u2 = class_uncertainty(shuffled);
    for (std::size_t c = 0; c < 2; ++c)
        CHECK(std::fabs(u[c] - u2[c]) < 1e-12);
}

TEST_CASE("render_uncertainty_map rescales to [0,255]") {
    const GrayImage black = render_uncertainty_map(Tensor({3, 3}));
    for (auto p : black.pixels) CHECK(p == 0);

    Tensor one_peak({2, 2}, {0.0f, 0.01f, 0.02f, 0.04f});
    const GrayImage img = render_uncertainty_map(one_peak);
    CHECK(img.pixels[0] == 0);
    CHECK(img.pixels[3] == 255);

    // Monotone: a larger std never renders darker.
    Rng rng(31);
    std::vector<float> v(36);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    const Tensor t({6, 6}, std::move(v));
    const GrayImage g = render_uncertainty_map(t);
    for (std::size_t a = 0; a < 36; ++a)
        for (std::size_t b = 0; b < 36; ++b)
            if (t[a] > t[b]) CHECK(g.pixels[a] >= g.pixels[b]);
}

TEST_CASE("class palette is distinct and invertible") {
    const auto palette = class_palette(44);
    std::set<Rgb> unique(palette.begin(), palette.end());
    CHECK(unique.size() == 44);
    for (std::size_t id = 0; id < 44; ++id) {
        const auto back = palette_lookup(palette, palette[id]);
        REQUIRE(back.has_value());
        CHECK(*back == id);
    }
}

TEST_CASE("render_class_mask maps equal ids to equal colors") {
    LabelMask m(2, 2, {1, 1, 0, 2});
    const RgbImage img = render_class_mask(m, 3);
    CHECK(img.pixels[0] == img.pixels[3]);
    CHECK(img.pixels[1] == img.pixels[4]);
    CHECK(img.pixels[2] == img.pixels[5]);

    // Round trip through the palette.
    const auto palette = class_palette(3);
    for (std::size_t i = 0; i < 4; ++i) {
        const Rgb c = {img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2]};
        CHECK(palette_lookup(palette, c) == std::size_t{m.ids[i]});
    }

    LabelMask bad(1, 1, {7});
    CHECK_THROWS_AS(render_class_mask(bad, 3), std::out_of_range);
}

TEST_CASE("pgm and ppm writers are deterministic") {
    GrayImage g;
    g.height = 2;
    g.width = 3;
    g.pixels = {0, 64, 128, 192, 255, 32};
    const auto pa = std::filesystem::temp_directory_path() / "cne_test_a.pgm";
    const auto pb = std::filesystem::temp_directory_path() / "cne_test_b.pgm";
    write_pgm(g, pa);
    write_pgm(g, pb);
    const std::string a = slurp(pa), b = slurp(pb);
    CHECK(a == b);
    CHECK(a.substr(0, 2) == "P5");
    CHECK(a.size() == std::string("P5\n3 2\n255\n").size() + 6);

    RgbImage c;
    c.height = 1;
    c.width = 2;
    c.pixels = {255, 0, 0, 0, 255, 0};
    const auto pc = std::filesystem::temp_directory_path() / "cne_test_c.ppm";
    write_ppm(c, pc);
    const std::string cc = slurp(pc);
    CHECK(cc.substr(0, 2) == "P6");
    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
    std::filesystem::remove(pc);
}

TEST_CASE("ece closed-form cases") {
    {
        const std::vector<double> conf(10, 1.0);
        const std::vector<std::uint8_t> correct(10, 1);
        CHECK(ece(conf, correct, 15) == 0.0);
    }
    {
        // Single bin at 0.8 confidence holding 60% accuracy.
        const std::vector<double> conf(10, 0.8);
        std::vector<std::uint8_t> correct(10, 0);
        for (int i = 0; i < 6; ++i) correct[i] = 1;
        CHECK(std::fabs(ece(conf, correct, 15) - 0.2) < 1e-15);
        CHECK(std::fabs(ece(conf, correct, 1) - 0.2) < 1e-15);
    }
}

TEST_CASE("ece validation") {
    const std::vector<double> conf = {0.5};
    const std::vector<std::uint8_t> ok = {1};
    CHECK_THROWS_AS(ece(conf, std::vector<std::uint8_t>{1, 0}, 10), std::invalid_argument);
    CHECK_THROWS_AS(ece(std::vector<double>{}, std::vector<std::uint8_t>{}, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(ece(conf, ok, 0), std::invalid_argument);
    CHECK_THROWS_AS(ece(std::vector<double>{1.5}, ok, 10), std::invalid_argument);
}

TEST_CASE("ece of a perfectly calibrated sampler is small") {
    Rng rng(2024);
    const std::size_t n = 100000;
    std::vector<double> conf(n);
    std::vector<std::uint8_t> correct(n);
    for (std::size_t i = 0; i < n; ++i) {
        conf[i] = rng.uniform(0.5, 1.0);
        correct[i] = rng.uniform() < conf[i] ? 1 : 0;
    }
    const double e = ece(conf, correct, 15);
    CHECK(e >= 0.0);
    CHECK(e < 0.02);
}

TEST_CASE("ece stays within [0,1] on adversarial streams") {
    Rng rng(4040);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rng.below(200);
        std::vector<double> conf(n);
        std::vector<std::uint8_t> correct(n);
        for (std::size_t i = 0; i < n; ++i) {
            conf[i] = rng.uniform();
            correct[i] = rng.below(2) ? 1 : 0;
        }
        const double e = ece(conf, correct, 1 + rng.below(20));
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
}
