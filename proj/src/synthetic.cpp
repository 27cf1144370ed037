#include "lowlight/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lowlight/errors.hpp"

namespace lowlight::synthetic {

namespace {

constexpr double kPi = std::numbers::pi;

void set_rgb(ImageTensor& img, int y, int x, double r, double g, double b) {
    img.at(y, x, 0) = std::clamp(r, 0.0, 1.0);
    img.at(y, x, 1) = std::clamp(g, 0.0, 1.0);
    img.at(y, x, 2) = std::clamp(b, 0.0, 1.0);
}

// Smooth random field in [0, 1]: a few random Gaussian bumps.
ImageTensor bump_field(int h, int w, int bumps, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageTensor out(h, w, 1);
    for (int b = 0; b < bumps; ++b) {
        const double cy = u(rng) * h, cx = u(rng) * w;
        const double radius = (0.1 + 0.3 * u(rng)) * std::min(h, w);
        const double amp = u(rng) * 2.0 - 1.0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
                out.at(y, x) += amp * std::exp(-d2 / (2.0 * radius * radius));
            }
        }
    }
    double lo = out[0], hi = out[0];
    for (double v : out.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double& v : out.data()) v = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    return out;
}

ImageTensor room_scene(int h, int w, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageTensor img(h, w, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) set_rgb(img, y, x, 0.55, 0.5, 0.45);
    }
    for (int k = 0; k < 7; ++k) {
        const int y0 = static_cast<int>(u(rng) * h * 0.8), x0 = static_cast<int>(u(rng) * w * 0.8);
        const int y1 = std::min(h, y0 + 4 + static_cast<int>(u(rng) * h * 0.4));
        const int x1 = std::min(w, x0 + 4 + static_cast<int>(u(rng) * w * 0.4));
        const double r = 0.1 + 0.85 * u(rng), g = 0.1 + 0.85 * u(rng), b = 0.1 + 0.85 * u(rng);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) set_rgb(img, y, x, r, g, b);
        }
    }
    return img;
}

ImageTensor texture_scene(int h, int w) {
    ImageTensor img(h, w, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double a = std::sin(2.0 * kPi * x / 9.0) * std::cos(2.0 * kPi * y / 13.0);
            const double b = std::sin(2.0 * kPi * (x + y) / 23.0);
            const double v = 0.5 + 0.3 * a + 0.15 * b;
            set_rgb(img, y, x, v, 0.9 * v + 0.05, 0.6 * v + 0.2 * (1.0 - v));
        }
    }
    return img;
}

ImageTensor blob_scene(int h, int w, std::mt19937_64& rng) {
    const ImageTensor r = bump_field(h, w, 6, rng);
    const ImageTensor g = bump_field(h, w, 6, rng);
    const ImageTensor b = bump_field(h, w, 6, rng);
    ImageTensor img(h, w, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            set_rgb(img, y, x, 0.05 + 0.9 * r.at(y, x), 0.05 + 0.9 * g.at(y, x), 0.05 + 0.9 * b.at(y, x));
        }
    }
    return img;
}

ImageTensor text_scene(int h, int w, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageTensor img(h, w, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) set_rgb(img, y, x, 0.9, 0.88, 0.82);
    }
    // Short dark strokes arranged in lines, like print on paper.
    for (int line = 4; line + 6 < h; line += 10) {
        for (int x = 3; x + 3 < w; x += 4) {
            if (u(rng) < 0.3) continue;
            const bool vertical = u(rng) < 0.6;
            const int len = 3 + static_cast<int>(u(rng) * 4);
            for (int k = 0; k < len; ++k) {
                const int yy = vertical ? line + k : line + static_cast<int>(u(rng) * 6);
                const int xx = vertical ? x : std::min(w - 1, x + k);
                if (yy < h) set_rgb(img, yy, xx, 0.15, 0.12, 0.1);
            }
        }
    }
    return img;
}

ImageTensor natural_scene(int h, int w, std::mt19937_64& rng) {
    // Octaves of bump fields: coarse shapes plus finer detail.
    const ImageTensor coarse = bump_field(h, w, 5, rng);
    const ImageTensor mid = bump_field(h, w, 20, rng);
    const ImageTensor fine = bump_field(h, w, 60, rng);
    ImageTensor img(h, w, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = 0.55 * coarse.at(y, x) + 0.3 * mid.at(y, x) + 0.15 * fine.at(y, x);
            set_rgb(img, y, x, v * 1.05, v * 0.95 + 0.03, v * 0.8 + 0.05);
        }
    }
    return img;
}

// Spatially varying exposure: darker towards one corner.
ImageTensor apply_vignette(const ImageTensor& img, double strength) {
    ImageTensor out(img);
    const int h = img.height(), w = img.width();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = std::hypot((y - 0.3 * h) / h, (x - 0.3 * w) / w);
            const double gain = std::max(0.2, 1.0 - strength * d);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) *= gain;
        }
    }
    return out;
}

}  // namespace

ChartRegions chart_regions(int height, int width) {
    ChartRegions r;
    r.edge_row_begin = height / 2;
    r.edge_row_end = 3 * height / 4;
    r.texture_row_begin = 3 * height / 4;
    r.texture_row_end = height;
    const int block = std::max(4, width / 8);
    for (int x = block; x < width; x += block) r.edge_cols.push_back(x - 1);
    return r;
}

ImageTensor test_chart(int height, int width) {
    if (height < 16 || width < 16) throw InvalidInput("test_chart: minimum size is 16x16");
    ImageTensor img(height, width, 3);
    const ChartRegions reg = chart_regions(height, width);
    const int quarter = height / 4;
    const int block = std::max(4, width / 8);

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (y < quarter) {
                // Horizontal ramp with a slight vertical tint change.
                const double v = 0.05 + 0.9 * x / (width - 1);
                const double t = static_cast<double>(y) / quarter;
                set_rgb(img, y, x, v, v * (0.9 + 0.1 * t), v * (1.0 - 0.2 * t));
            } else if (y < reg.edge_row_begin) {
                // Flat patches on spread-out levels.
                const int k = x / block;
                const double v = 0.1 + 0.8 * ((k * 5) % 8) / 7.0;
                const double tint = (k % 3) * 0.05;
                set_rgb(img, y, x, v, v - tint, v - 0.1 + tint);
            } else if (y < reg.edge_row_end) {
                // Alternating dark/bright blocks: strong step edges.
                const double v = (x / block) % 2 == 0 ? 0.2 : 0.8;
                set_rgb(img, y, x, v, v, v);
            } else {
                // Fine texture: small-amplitude stripes with a 6 pixel period.
                const double v = 0.5 + 0.2 * std::sin(2.0 * kPi * (x + 0.5 * y) / 6.0);
                set_rgb(img, y, x, v, v * 0.95, v * 0.9);
            }
        }
    }
    return img;
}

ImageTensor simulate_low_light(const ImageTensor& clean, double scale, double peak_events,
                               std::uint64_t seed) {
    if (!(scale > 0.0) || !(peak_events > 0.0)) {
        throw InvalidInput("simulate_low_light: scale and peak_events must be positive");
    }
    std::mt19937_64 rng(seed);
    ImageTensor out(clean.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double mean_events = std::max(0.0, clean[i]) * peak_events;
        double events = 0.0;
        if (mean_events > 0.0) {
            std::poisson_distribution<long> poisson(mean_events);
            events = static_cast<double>(poisson(rng));
        }
        out[i] = std::clamp(events / peak_events * scale, 0.0, 1.0);
    }
    return out;
}

std::vector<Scene> fixture_scenes(int height, int width, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Scene> scenes;
    scenes.push_back({"chart", test_chart(height, width), {}});
    scenes.push_back({"room", apply_vignette(room_scene(height, width, rng), 0.9), {}});
    scenes.push_back({"texture", texture_scene(height, width), {}});
    scenes.push_back({"blobs", blob_scene(height, width, rng), {}});
    scenes.push_back({"text", text_scene(height, width, rng), {}});
    scenes.push_back({"natural", apply_vignette(natural_scene(height, width, rng), 0.6), {}});
    const double scales[] = {0.1, 0.15, 0.08, 0.12, 0.1, 0.2};
    for (std::size_t k = 0; k < scenes.size(); ++k) {
        scenes[k].low = simulate_low_light(scenes[k].clean, scales[k], 30.0, seed + 1000 + k);
    }
    return scenes;
}

ImageTensor oscillating_texture(int height, int width, double base, double amplitude) {
    ImageTensor img(height, width, 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) img.at(y, x) = base + (x % 2 == 0 ? amplitude : -amplitude);
    }
    return img;
}

ImageTensor step_edge(int height, int width, double base, double amplitude) {
    ImageTensor img(height, width, 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) img.at(y, x) = base + (x >= width / 2 ? amplitude : 0.0);
    }
    return img;
}

}  // namespace lowlight::synthetic
