#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "lowlight/image.hpp"

namespace testing {

inline lowlight::ImageTensor random_image(int h, int w, int c, std::mt19937_64& rng,
                                          double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    lowlight::ImageTensor img(h, w, c);
    for (double& v : img.data()) v = u(rng);
    return img;
}

inline double max_abs_diff(const lowlight::ImageTensor& a, const lowlight::ImageTensor& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

// Box average with replicate padding, one window at a time.
inline lowlight::ImageTensor naive_mean(const lowlight::ImageTensor& img, int k) {
    const int r = k / 2;
    lowlight::ImageTensor out(img.shape());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                double acc = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    for (int dx = -r; dx <= r; ++dx) {
                        const int yy = std::clamp(y + dy, 0, img.height() - 1);
                        const int xx = std::clamp(x + dx, 0, img.width() - 1);
                        acc += img.at(yy, xx, c);
                    }
                }
                out.at(y, x, c) = acc / (k * k);
            }
        }
    }
    return out;
}

// Windowed maximum clipped at the border.
inline lowlight::ImageTensor naive_local_max(const lowlight::ImageTensor& img, int k) {
    const int r = k / 2;
    lowlight::ImageTensor out(img.shape());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                double m = -std::numeric_limits<double>::infinity();
                for (int yy = std::max(0, y - r); yy <= std::min(img.height() - 1, y + r); ++yy) {
                    for (int xx = std::max(0, x - r); xx <= std::min(img.width() - 1, x + r); ++xx) {
                        m = std::max(m, img.at(yy, xx, c));
                    }
                }
                out.at(y, x, c) = m;
            }
        }
    }
    return out;
}

// Forward difference along x (dir 0) or y (dir 1), zero on the far border.
inline lowlight::ImageTensor naive_diff(const lowlight::ImageTensor& img, int dir) {
    lowlight::ImageTensor out(img.shape());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const int yy = dir == 1 ? y + 1 : y, xx = dir == 0 ? x + 1 : x;
            if (yy >= img.height() || xx >= img.width()) continue;
            for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(yy, xx, c) - img.at(y, x, c);
        }
    }
    return out;
}

inline double oracle_mse(const lowlight::ImageTensor& a, const lowlight::ImageTensor& b) {
    double acc = 0.0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            for (int c = 0; c < a.channels(); ++c) {
                const double d = a.at(y, x, c) - b.at(y, x, c);
                acc += d * d;
            }
        }
    }
    return acc / static_cast<double>(a.size());
}

// Direct per-window SSIM with a full 2-D Gaussian kernel.
inline double oracle_ssim(const lowlight::ImageTensor& a, const lowlight::ImageTensor& b) {
    double kernel[11][11];
    double total = 0.0;
    for (int i = 0; i < 11; ++i) {
        for (int j = 0; j < 11; ++j) {
            kernel[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
            total += kernel[i][j];
        }
    }
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double score = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        double sum = 0.0;
        int windows = 0;
        for (int y = 0; y + 11 <= a.height(); ++y) {
            for (int x = 0; x + 11 <= a.width(); ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < 11; ++i) {
                    for (int j = 0; j < 11; ++j) {
                        const double w = kernel[i][j] / total;
                        const double u = a.at(y + i, x + j, c), v = b.at(y + i, x + j, c);
                        ma += w * u;
                        mb += w * v;
                        saa += w * u * u;
                        sbb += w * v * v;
                        sab += w * u * v;
                    }
                }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++windows;
            }
        }
        score += sum / windows;
    }
    return score / a.channels();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lowlight_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
