#include "lowlight/metrics.hpp"

#include <array>
#include <cmath>

#include "lowlight/errors.hpp"
#include "lowlight/image_ops.hpp"

namespace lowlight {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> taps{};
    double total = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        taps[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
        total += taps[i];
    }
    for (double& t : taps) t /= total;
    return taps;
}

// Separable Gaussian over every fully covered window of channel `c`;
// `f` maps the pair of samples to the filtered quantity.
template <class F>
std::vector<double> filter_valid(const ImageTensor& a, const ImageTensor& b, int c, F f) {
    static const auto taps = gaussian_taps();
    const int h = a.height(), w = a.width();
    const int oh = h - kWindow + 1, ow = w - kWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(h) * ow);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) acc += taps[k] * f(a.at(y, x + k, c), b.at(y, x + k, c));
            rows[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[static_cast<std::size_t>(y + k) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* op) {
    if (a.empty() || a.shape() != b.shape()) {
        throw InvalidInput(std::string(op) + ": images must have the same non-empty shape");
    }
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b, double peak) {
    require_same_shape(a, b, "psnr");
    if (!(peak > 0.0)) throw InvalidInput("psnr: peak must be positive");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ImageTensor& a, const ImageTensor& b, double data_range) {
    require_same_shape(a, b, "ssim");
    if (a.height() < kWindow || a.width() < kWindow) {
        throw InvalidInput("ssim: image is smaller than the 11x11 window");
    }
    const double c1 = (kK1 * data_range) * (kK1 * data_range);
    const double c2 = (kK2 * data_range) * (kK2 * data_range);

    double total = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        const auto mu_a = filter_valid(a, b, c, [](double x, double) { return x; });
        const auto mu_b = filter_valid(a, b, c, [](double, double y) { return y; });
        const auto aa = filter_valid(a, b, c, [](double x, double) { return x * x; });
        const auto bb = filter_valid(a, b, c, [](double, double y) { return y * y; });
        const auto ab = filter_valid(a, b, c, [](double x, double y) { return x * y; });
        double acc = 0.0;
        for (std::size_t k = 0; k < mu_a.size(); ++k) {
            const double va = aa[k] - mu_a[k] * mu_a[k];
            const double vb = bb[k] - mu_b[k] * mu_b[k];
            const double cov = ab[k] - mu_a[k] * mu_b[k];
            acc += ((2.0 * mu_a[k] * mu_b[k] + c1) * (2.0 * cov + c2)) /
                   ((mu_a[k] * mu_a[k] + mu_b[k] * mu_b[k] + c1) * (va + vb + c2));
        }
        total += acc / static_cast<double>(mu_a.size());
    }
    return total / a.channels();
}

MetricsReport compare(const ImageTensor& reference, const ImageTensor& test) {
    MetricsReport r;
    r.psnr_db = psnr(test, reference);
    r.ssim = ssim(test, reference);
    r.entropy_bits = shannon_entropy(test.channels() == 3 ? max_channel(test) : test);
    return r;
}

}  // namespace lowlight
