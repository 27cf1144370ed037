#include "lowlight/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

void require_channels(const ImageTensor& img, int channels, const char* op) {
    if (img.empty()) throw InvalidInput(std::string(op) + ": empty image");
    if (img.channels() != channels) {
        throw InvalidInput(std::string(op) + ": expected " + std::to_string(channels) +
                           " channel(s), got " + std::to_string(img.channels()));
    }
}

void require_odd_kernel(int k, const char* op) {
    if (k < 3 || k % 2 == 0) {
        throw InvalidInput(std::string(op) + ": kernel size must be odd and >= 3, got " +
                           std::to_string(k));
    }
}

std::vector<double> cdf_lut(const std::vector<double>& counts, double total) {
    std::vector<double> lut(counts.size());
    double cumulative = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b) {
        cumulative += counts[b];
        lut[b] = cumulative / total;
    }
    return lut;
}

std::vector<double> histogram(const ImageTensor& img, int bins) {
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double v : img.data()) counts[static_cast<std::size_t>(quantize(v, bins))] += 1.0;
    return counts;
}

}  // namespace

ImageTensor max_channel(const ImageTensor& img) {
    require_channels(img, 3, "max_channel");
    auto out = ImageTensor::uninitialized({img.height(), img.width(), 1});
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t p = 0; p < dst.size(); ++p) {
        dst[p] = std::max(std::max(src[3 * p], src[3 * p + 1]), src[3 * p + 2]);
    }
    return out;
}

ImageTensor forward_diff_x(const ImageTensor& img) {
    if (img.width() < 2) throw InvalidInput("forward_diff_x: width must be >= 2");
    const int h = img.height(), w = img.width(), c = img.channels();
    auto out = ImageTensor::uninitialized(img.shape());
    auto src = img.data();
    auto dst = out.data();
    const std::size_t row = static_cast<std::size_t>(w) * c;
    for (int y = 0; y < h; ++y) {
        const std::size_t base = y * row;
        for (std::size_t i = 0; i + c < row; ++i) dst[base + i] = src[base + i + c] - src[base + i];
        for (std::size_t i = row - c; i < row; ++i) dst[base + i] = 0.0;
    }
    return out;
}

ImageTensor forward_diff_y(const ImageTensor& img) {
    if (img.height() < 2) throw InvalidInput("forward_diff_y: height must be >= 2");
    auto out = ImageTensor::uninitialized(img.shape());
    auto src = img.data();
    auto dst = out.data();
    const std::size_t row = static_cast<std::size_t>(img.width()) * img.channels();
    for (std::size_t i = 0; i + row < src.size(); ++i) dst[i] = src[i + row] - src[i];
    for (std::size_t i = src.size() - row; i < src.size(); ++i) dst[i] = 0.0;
    return out;
}

GradientPair gradient(const ImageTensor& img) {
    if (img.height() < 2 || img.width() < 2) {
        throw InvalidInput("gradient: image must be at least 2x2");
    }
    return {forward_diff_x(img), forward_diff_y(img)};
}

namespace {

// Sliding-window reduction along rows then columns. Windows are clipped at the
// border: `replicate` repeats the edge sample, otherwise the window shrinks.
template <class Op>
ImageTensor separable_window(const ImageTensor& img, int r, bool replicate, Op op) {
    const int h = img.height(), w = img.width(), c = img.channels();
    const std::size_t row = static_cast<std::size_t>(w) * c;
    auto src = img.data();

    // Horizontal pass on a padded copy of each row. Shrinking windows pad with
    // the row's own edge sample too, which leaves the max unchanged.
    auto tmp = ImageTensor::uninitialized(img.shape());
    auto mid = tmp.data();
    std::vector<double> padded((static_cast<std::size_t>(w) + 2 * r) * c);
    for (int y = 0; y < h; ++y) {
        const double* in = src.data() + y * row;
        for (int x = -r; x < w + r; ++x) {
            const double* px = in + static_cast<std::size_t>(std::clamp(x, 0, w - 1)) * c;
            double* slot = padded.data() + static_cast<std::size_t>(x + r) * c;
            for (int ch = 0; ch < c; ++ch) slot[ch] = px[ch];
        }
        double* acc = mid.data() + y * row;
        std::copy(padded.data(), padded.data() + row, acc);
        for (int o = 1; o <= 2 * r; ++o) {
            const double* shifted = padded.data() + static_cast<std::size_t>(o) * c;
            for (std::size_t i = 0; i < row; ++i) acc[i] = op(acc[i], shifted[i]);
        }
    }

    auto out = ImageTensor::uninitialized(img.shape());
    auto dst = out.data();
    for (int y = 0; y < h; ++y) {
        const int y0 = replicate ? y - r : std::max(0, y - r);
        const int y1 = replicate ? y + r : std::min(h - 1, y + r);
        double* acc = dst.data() + y * row;
        const double* first = mid.data() + std::clamp(y0, 0, h - 1) * row;
        std::copy(first, first + row, acc);
        for (int yy = y0 + 1; yy <= y1; ++yy) {
            const double* in = mid.data() + std::clamp(yy, 0, h - 1) * row;
            for (std::size_t i = 0; i < row; ++i) acc[i] = op(acc[i], in[i]);
        }
    }
    return out;
}

// In-place running maximum over windows of k consecutive items of a padded
// sequence (items are `unit` contiguous values). Doubling builds the maximum
// over P = 2^p <= k items; two overlapping P-windows then cover k items.
void window_max_inplace(std::vector<double>& buf, std::size_t unit, int k, int n, double* out,
                        std::size_t out_stride) {
    int span = 1;
    for (; span * 2 <= k; span *= 2) {
        const std::size_t shift = static_cast<std::size_t>(span) * unit;
        const std::size_t end = buf.size() - shift;
        double* b = buf.data();
        for (std::size_t j = 0; j < end; ++j) b[j] = std::max(b[j], b[j + shift]);
    }
    const std::size_t tail = static_cast<std::size_t>(k - span) * unit;
    for (int i = 0; i < n; ++i) {
        const double* a = buf.data() + static_cast<std::size_t>(i) * unit;
        double* o = out + static_cast<std::size_t>(i) * out_stride;
        for (std::size_t l = 0; l < unit; ++l) o[l] = std::max(a[l], a[l + tail]);
    }
}

}  // namespace

ImageTensor mean_filter(const ImageTensor& img, int k) {
    require_odd_kernel(k, "mean_filter");
    if (img.empty()) return img;
    // Averaging offsets from the first pixel keeps constant images exact.
    const auto c = static_cast<std::size_t>(img.channels());
    auto shifted = ImageTensor::uninitialized(img.shape());
    auto src = img.data();
    auto sh = shifted.data();
    for (std::size_t i = 0; i < sh.size(); i += c) {
        for (std::size_t ch = 0; ch < c; ++ch) sh[i + ch] = src[i + ch] - src[ch];
    }
    ImageTensor out = separable_window(shifted, k / 2, true, std::plus<double>());
    const double norm = 1.0 / (static_cast<double>(k) * k);
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); i += c) {
        for (std::size_t ch = 0; ch < c; ++ch) dst[i + ch] = src[ch] + dst[i + ch] * norm;
    }
    return out;
}

ImageTensor local_max(const ImageTensor& img, int k) {
    if (k < 1 || k % 2 == 0) throw InvalidInput("local_max: window must be odd");
    const int h = img.height(), w = img.width(), c = img.channels();
    const int r = k / 2;
    const std::size_t unit = static_cast<std::size_t>(c);
    const std::size_t row = static_cast<std::size_t>(w) * unit;
    const double lowest = -std::numeric_limits<double>::infinity();
    auto src = img.data();

    auto tmp = ImageTensor::uninitialized(img.shape());
    std::vector<double> buf;
    for (int y = 0; y < h; ++y) {
        buf.assign((static_cast<std::size_t>(w) + 2 * r) * unit, lowest);
        std::copy(src.begin() + y * row, src.begin() + (y + 1) * row, buf.begin() + r * unit);
        window_max_inplace(buf, unit, k, w, tmp.data().data() + y * row, unit);
    }
    // Vertical pass in column blocks so the padded buffer stays cache-sized.
    constexpr std::size_t kBlock = 64;
    auto out = ImageTensor::uninitialized(img.shape());
    const double* t = tmp.data().data();
    for (std::size_t j0 = 0; j0 < row; j0 += kBlock) {
        const std::size_t bw = std::min(kBlock, row - j0);
        buf.assign((static_cast<std::size_t>(h) + 2 * r) * bw, lowest);
        for (int y = 0; y < h; ++y) {
            std::copy(t + y * row + j0, t + y * row + j0 + bw, buf.begin() + (y + r) * bw);
        }
        window_max_inplace(buf, bw, k, h, out.data().data() + j0, row);
    }
    return out;
}

ImageTensor local_normalize(const ImageTensor& img, int k, double eps) {
    if (k < 1 || k % 2 == 0) throw InvalidInput("local_normalize: window must be odd");
    if (!(eps > 0.0)) throw InvalidInput("local_normalize: eps must be positive");
    for (double v : img.data()) {
        if (v < 0.0) throw InvalidInput("local_normalize: input must be non-negative");
    }
    ImageTensor out = local_max(img, k);
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] / (dst[i] + eps);
    return out;
}

ImageTensor abs(const ImageTensor& img) {
    ImageTensor out(img);
    for (double& v : out.data()) v = std::fabs(v);
    return out;
}

int quantize(double v, int bins) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<int>(std::lround(clamped * (bins - 1)));
}

ImageTensor hist_equalize(const ImageTensor& img, int bins) {
    require_channels(img, 1, "hist_equalize");
    if (bins < 2) throw InvalidInput("hist_equalize: bins must be >= 2");
    const auto lut = cdf_lut(histogram(img, bins), static_cast<double>(img.size()));
    auto out = ImageTensor::uninitialized(img.shape());
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = lut[static_cast<std::size_t>(quantize(src[i], bins))];
    }
    return out;
}

AheMapping compute_ahe_mapping(const ImageTensor& img, int tiles, double clip, int bins) {
    require_channels(img, 1, "adaptive_hist_equalize");
    if (tiles < 1) throw InvalidInput("adaptive_hist_equalize: tiles must be >= 1");
    if (tiles > img.height() || tiles > img.width()) {
        throw InvalidInput("adaptive_hist_equalize: " + std::to_string(tiles) +
                           " tiles do not fit a " + std::to_string(img.height()) + "x" +
                           std::to_string(img.width()) + " image");
    }
    if (!(clip > 0.0)) throw InvalidInput("adaptive_hist_equalize: clip must be positive");
    if (bins < 2) throw InvalidInput("adaptive_hist_equalize: bins must be >= 2");

    AheMapping m;
    m.tiles = tiles;
    m.bins = bins;
    for (int t = 0; t <= tiles; ++t) {
        m.row_edges.push_back(t * img.height() / tiles);
        m.col_edges.push_back(t * img.width() / tiles);
    }
    m.luts.reserve(static_cast<std::size_t>(tiles * tiles));
    for (int tr = 0; tr < tiles; ++tr) {
        for (int tc = 0; tc < tiles; ++tc) {
            std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
            for (int y = m.row_edges[tr]; y < m.row_edges[tr + 1]; ++y) {
                for (int x = m.col_edges[tc]; x < m.col_edges[tc + 1]; ++x) {
                    counts[static_cast<std::size_t>(quantize(img.at(y, x), bins))] += 1.0;
                }
            }
            const double total = static_cast<double>(m.row_edges[tr + 1] - m.row_edges[tr]) *
                                 (m.col_edges[tc + 1] - m.col_edges[tc]);
            if (std::isfinite(clip)) {
                const double limit = clip * total / bins;
                double excess = 0.0;
                for (double& n : counts) {
                    if (n > limit) {
                        excess += n - limit;
                        n = limit;
                    }
                }
                const double share = excess / bins;
                for (double& n : counts) n += share;
            }
            m.luts.push_back(cdf_lut(counts, total));
        }
    }
    return m;
}

namespace {

// Lower tile index, upper tile index and blend weight along one axis.
struct AxisBlend {
    int lo, hi;
    double t;
};

AxisBlend blend_along(int pos, const std::vector<int>& edges) {
    const int tiles = static_cast<int>(edges.size()) - 1;
    auto centre = [&](int t) { return 0.5 * (edges[t] + edges[t + 1] - 1); };
    if (pos <= centre(0)) return {0, 0, 0.0};
    if (pos >= centre(tiles - 1)) return {tiles - 1, tiles - 1, 0.0};
    int lo = 0;
    while (lo + 1 < tiles && centre(lo + 1) <= pos) ++lo;
    const int hi = lo + 1;
    return {lo, hi, (pos - centre(lo)) / (centre(hi) - centre(lo))};
}

}  // namespace

ImageTensor adaptive_hist_equalize(const ImageTensor& img, int tiles, double clip, int bins) {
    const AheMapping m = compute_ahe_mapping(img, tiles, clip, bins);
    std::vector<AxisBlend> cols(static_cast<std::size_t>(img.width()));
    for (int x = 0; x < img.width(); ++x) cols[x] = blend_along(x, m.col_edges);

    ImageTensor out(img.shape());
    for (int y = 0; y < img.height(); ++y) {
        const AxisBlend row = blend_along(y, m.row_edges);
        for (int x = 0; x < img.width(); ++x) {
            const AxisBlend& col = cols[x];
            const auto q = static_cast<std::size_t>(quantize(img.at(y, x), bins));
            const double a = m.lut(row.lo, col.lo)[q];
            const double b = m.lut(row.lo, col.hi)[q];
            const double c = m.lut(row.hi, col.lo)[q];
            const double d = m.lut(row.hi, col.hi)[q];
            const double top = a + col.t * (b - a);
            const double bottom = c + col.t * (d - c);
            out.at(y, x) = top + row.t * (bottom - top);
        }
    }
    return out;
}

double shannon_entropy(const ImageTensor& img, int bins) {
    require_channels(img, 1, "shannon_entropy");
    if (bins < 2) throw InvalidInput("shannon_entropy: bins must be >= 2");
    const auto counts = histogram(img, bins);
    const double total = static_cast<double>(img.size());
    double h = 0.0;
    for (double n : counts) {
        if (n > 0.0) {
            const double p = n / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

}  // namespace lowlight
