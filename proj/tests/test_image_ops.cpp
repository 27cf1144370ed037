#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "doctest.h"
#include "lowlight/errors.hpp"
#include "lowlight/image_ops.hpp"
#include "support.hpp"

using namespace lowlight;
using testing::max_abs_diff;
using testing::naive_local_max;
using testing::naive_mean;
using testing::random_image;

namespace {

// Plain-CDF equalization straight from the definition.
ImageTensor naive_he(const ImageTensor& img, int bins) {
    std::vector<int> q(img.size());
    for (std::size_t k = 0; k < img.size(); ++k) {
        q[k] = static_cast<int>(std::lround(std::clamp(img[k], 0.0, 1.0) * (bins - 1)));
    }
    ImageTensor out(img.shape());
    for (std::size_t k = 0; k < img.size(); ++k) {
        std::size_t below = 0;
        for (int v : q) below += v <= q[k] ? 1 : 0;
        out[k] = static_cast<double>(below) / static_cast<double>(img.size());
    }
    return out;
}

ImageTensor crop(const ImageTensor& img, int y0, int y1, int x0, int x1) {
    ImageTensor out(y1 - y0, x1 - x0, img.channels());
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            for (int c = 0; c < img.channels(); ++c) out.at(y - y0, x - x0, c) = img.at(y, x, c);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("max_channel picks the largest channel") {
    ImageTensor px(1, 1, 3, {0.2, 0.5, 0.3});
    CHECK(max_channel(px).item() == 0.5);

    ImageTensor equal(3, 4, 3);
    std::mt19937_64 rng(1);
    const ImageTensor base = random_image(3, 4, 1, rng);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 4; ++x) {
            for (int c = 0; c < 3; ++c) equal.at(y, x, c) = base.at(y, x);
        }
    }
    CHECK(max_channel(equal) == base);

    const ImageTensor img = random_image(4, 4, 3, rng);
    const ImageTensor m = max_channel(img);
    REQUIRE(m.channels() == 1);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            double best = img.at(y, x, 0);
            for (int c = 1; c < 3; ++c) best = img.at(y, x, c) > best ? img.at(y, x, c) : best;
            CHECK(m.at(y, x) == best);
        }
    }
    CHECK_THROWS_AS(max_channel(ImageTensor(2, 2, 1)), InvalidInput);
}

TEST_CASE("forward differences") {
    const GradientPair flat = gradient(ImageTensor(5, 7, 3, 0.4));
    for (double v : flat.dx.data()) CHECK(v == 0.0);
    for (double v : flat.dy.data()) CHECK(v == 0.0);

    const ImageTensor row(1, 2, 1, {0.0, 1.0});
    const ImageTensor dx = forward_diff_x(row);
    CHECK(dx[0] == 1.0);
    CHECK(dx[1] == 0.0);

    std::mt19937_64 rng(2);
    const ImageTensor img = random_image(5, 5, 2, rng);
    const GradientPair g = gradient(img);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 5; ++x) {
            for (int c = 0; c < 2; ++c) {
                CHECK(g.dx.at(y, x, c) == (x + 1 < 5 ? img.at(y, x + 1, c) - img.at(y, x, c) : 0.0));
                CHECK(g.dy.at(y, x, c) == (y + 1 < 5 ? img.at(y + 1, x, c) - img.at(y, x, c) : 0.0));
            }
        }
    }
    CHECK(g.dx.shape() == img.shape());
    CHECK(g.dy.shape() == img.shape());
}

TEST_CASE("mean_filter") {
    const ImageTensor flat(6, 9, 3, 0.37);
    CHECK(mean_filter(flat, 3) == flat);

    ImageTensor spike(3, 3, 1);
    spike.at(1, 1) = 1.0;
    CHECK(mean_filter(spike, 3).at(1, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));

    std::mt19937_64 rng(3);
    for (int k : {3, 5, 7}) {
        const ImageTensor img = random_image(6, 6, 2, rng);
        CHECK(max_abs_diff(mean_filter(img, k), naive_mean(img, k)) < 1e-12);
    }
    const ImageTensor wide = random_image(9, 23, 3, rng);
    CHECK(max_abs_diff(mean_filter(wide, 11), naive_mean(wide, 11)) < 1e-12);
    CHECK_THROWS_AS(mean_filter(flat, 4), InvalidInput);
}

TEST_CASE("local_max and local_normalize") {
    std::mt19937_64 rng(4);
    for (int k : {3, 5, 11, 41}) {
        const ImageTensor img = random_image(13, 17, 3, rng);
        CHECK(local_max(img, k) == naive_local_max(img, k));
    }

    const ImageTensor flat(5, 5, 1, 0.6);
    const ImageTensor nf = local_normalize(flat, 5);
    for (double v : nf.data()) CHECK(v == doctest::Approx(0.6 / (0.6 + kNormEps)));

    const ImageTensor zeros(5, 5, 1);
    CHECK(local_normalize(zeros, 5) == zeros);

    const ImageTensor img = random_image(5, 5, 1, rng);
    const ImageTensor lm = naive_local_max(img, 5);
    const ImageTensor n = local_normalize(img, 5);
    for (std::size_t k = 0; k < img.size(); ++k) CHECK(n[k] == img[k] / (lm[k] + kNormEps));

    CHECK_THROWS_AS(local_normalize(ImageTensor(3, 3, 1, -0.1), 3), InvalidInput);
}

TEST_CASE("hist_equalize") {
    const ImageTensor flat(4, 4, 1, 0.3);
    const ImageTensor he_flat = hist_equalize(flat);
    for (double v : he_flat.data()) CHECK(v == 1.0);

    const ImageTensor four(2, 2, 1, {0.0, 85.0 / 255, 170.0 / 255, 1.0});
    const ImageTensor he = hist_equalize(four);
    CHECK(he[0] == 0.25);
    CHECK(he[1] == 0.5);
    CHECK(he[2] == 0.75);
    CHECK(he[3] == 1.0);

    std::mt19937_64 rng(5);
    const ImageTensor img = random_image(9, 11, 1, rng, 0.0, 0.3);
    CHECK(hist_equalize(img) == naive_he(img, 256));
}

TEST_CASE("adaptive_hist_equalize") {
    std::mt19937_64 rng(6);
    const ImageTensor img = random_image(20, 30, 1, rng);
    CHECK(adaptive_hist_equalize(img, 1, std::numeric_limits<double>::infinity()) ==
          hist_equalize(img));

    const ImageTensor flat(16, 16, 1, 0.7);
    const ImageTensor af = adaptive_hist_equalize(flat, 4, 4.0);
    for (double v : af.data()) CHECK(v == doctest::Approx(af[0]));

    // 3x3 tiles of 15x15: each tile centre falls on a pixel and reads one table.
    ImageTensor tex(45, 45, 1);
    for (int y = 0; y < 45; ++y) {
        for (int x = 0; x < 45; ++x) {
            tex.at(y, x) = 0.5 + 0.3 * std::sin(0.4 * x + 0.1 * y * y / 45.0) * (y + 10) / 55.0;
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    const AheMapping m = compute_ahe_mapping(tex, 3, inf);
    const ImageTensor out = adaptive_hist_equalize(tex, 3, inf);
    for (int tr = 0; tr < 3; ++tr) {
        for (int tc = 0; tc < 3; ++tc) {
            const ImageTensor tile = crop(tex, 15 * tr, 15 * tr + 15, 15 * tc, 15 * tc + 15);
            const ImageTensor oracle = naive_he(tile, 256);
            const auto& lut = m.lut(tr, tc);
            for (std::size_t k = 0; k < tile.size(); ++k) CHECK(lut[quantize(tile[k], 256)] == oracle[k]);
            CHECK(out.at(15 * tr + 7, 15 * tc + 7) == oracle.at(7, 7));
        }
    }
    CHECK_THROWS_AS(adaptive_hist_equalize(img, 40, 4.0), InvalidInput);
}

TEST_CASE("shannon_entropy") {
    CHECK(shannon_entropy(ImageTensor(8, 8, 1, 0.5)) == 0.0);
    ImageTensor ramp(16, 16, 1);
    for (int k = 0; k < 256; ++k) ramp[static_cast<std::size_t>(k)] = k / 255.0;
    CHECK(shannon_entropy(ramp) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("property: constant images have zero gradient and are fixed by the mean filter") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> dim(2, 20);
    for (int trial = 0; trial < 50; ++trial) {
        const ImageTensor img(dim(rng), dim(rng), 3, u(rng));
        const GradientPair g = gradient(img);
        for (double v : g.dx.data()) REQUIRE(v == 0.0);
        for (double v : g.dy.data()) REQUIRE(v == 0.0);
        const int k = 2 * std::uniform_int_distribution<int>(1, 6)(rng) + 1;
        REQUIRE(mean_filter(img, k) == img);
    }
}

TEST_CASE("property: equalization is monotone and its output CDF is near uniform") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> dim(1, 24);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double lo = 0.5 * u(rng), span = 0.5 * u(rng) + 0.01;
        const ImageTensor img = random_image(dim(rng), dim(rng), 1, rng, lo, lo + span);
        const ImageTensor out = hist_equalize(img);
        for (std::size_t p = 0; p < img.size(); ++p) {
            for (std::size_t q = 0; q < img.size(); ++q) {
                if (img[p] <= img[q]) REQUIRE(out[p] <= out[q]);
            }
        }
        // Fraction of output values <= v, at every occupied level v.
        std::map<double, std::size_t> counts;
        for (double v : out.data()) ++counts[v];
        std::size_t running = 0;
        for (const auto& [level, n] : counts) {
            running += n;
            const double cdf = static_cast<double>(running) / static_cast<double>(out.size());
            REQUIRE(std::abs(cdf - level) <= 1.0 / 256.0);
        }
    }
}

TEST_CASE("property: local_normalize stays in [0, 1]") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> dim(1, 30);
    for (int trial = 0; trial < 50; ++trial) {
        const ImageTensor img = random_image(dim(rng), dim(rng), 3, rng, 0.0, 3.0);
        const int k = 2 * std::uniform_int_distribution<int>(0, 10)(rng) + 1;
        const ImageTensor n = local_normalize(img, k);
        for (double v : n.data()) REQUIRE((v >= 0.0 && v <= 1.0));
    }
}

TEST_CASE("property: mean filter preserves the global mean") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const ImageTensor img = random_image(64, 64, 1, rng);
        const ImageTensor out = mean_filter(img, 3);
        double a = 0.0, b = 0.0;
        for (std::size_t k = 0; k < img.size(); ++k) {
            a += img[k];
            b += out[k];
        }
        REQUIRE(std::abs(a - b) / static_cast<double>(img.size()) < 1e-3);
    }
}

TEST_CASE("property: single-tile adaptive equalization equals global equalization") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int trial = 0; trial < 30; ++trial) {
        const ImageTensor img = random_image(dim(rng), dim(rng), 1, rng);
        REQUIRE(adaptive_hist_equalize(img, 1, std::numeric_limits<double>::infinity()) ==
                hist_equalize(img));
    }
}
