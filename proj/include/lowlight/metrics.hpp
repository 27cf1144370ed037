#pragma once

#include <limits>
#include <map>
#include <string>

#include "lowlight/image.hpp"

namespace lowlight {

struct MetricsReport {
    double psnr_db = std::numeric_limits<double>::infinity();
    double ssim = 1.0;
    double entropy_bits = 0.0;
    std::map<std::string, double> per_term_losses;
};

/// 10 log10(peak^2 / MSE); +inf when the images are identical.
double psnr(const ImageTensor& a, const ImageTensor& b, double peak = 1.0);

/// Mean SSIM over all fully covered 11x11 Gaussian (sigma 1.5) windows,
/// K1 = 0.01, K2 = 0.03. Multi-channel inputs average the per-channel scores.
double ssim(const ImageTensor& a, const ImageTensor& b, double data_range = 1.0);

/// PSNR and SSIM of `test` against `reference`; entropy of test's max channel.
MetricsReport compare(const ImageTensor& reference, const ImageTensor& test);

}  // namespace lowlight
