#pragma once

#include <limits>
#include <vector>

#include "lowlight/image.hpp"

// Classical pixel operators shared by the objectives, the pipeline and the
// metrics. Every function here is pure and throws InvalidInput on a violated
// precondition.

namespace lowlight {

inline constexpr int kDefaultBins = 256;
inline constexpr int kDefaultMeanK = 5;
inline constexpr int kDefaultNormK = 11;
inline constexpr double kNormEps = 1e-4;

/// Horizontal and vertical forward differences; zero on the trailing column/row.
struct GradientPair {
    ImageTensor dx;
    ImageTensor dy;
};

/// Per-pixel maximum over the three colour channels.
ImageTensor max_channel(const ImageTensor& img);

/// dx(y,x) = img(y,x+1) - img(y,x), 0 on the last column.
ImageTensor forward_diff_x(const ImageTensor& img);
/// dy(y,x) = img(y+1,x) - img(y,x), 0 on the last row.
ImageTensor forward_diff_y(const ImageTensor& img);

/// Both forward differences. Requires height >= 2 and width >= 2.
GradientPair gradient(const ImageTensor& img);

/// k x k box average with replicate padding, computed separably.
ImageTensor mean_filter(const ImageTensor& img, int k = kDefaultMeanK);

/// k x k windowed maximum; the window is clipped at the border, which is the
/// same as replicate padding for a max.
ImageTensor local_max(const ImageTensor& img, int k);

/// img / (local_max(img, k) + eps). Input must be non-negative.
ImageTensor local_normalize(const ImageTensor& img, int k = kDefaultNormK, double eps = kNormEps);

ImageTensor abs(const ImageTensor& img);

/// Histogram bin of an intensity: round(clamp(v, 0, 1) * (bins - 1)).
int quantize(double v, int bins);

/// Plain-CDF histogram equalization of a single-channel image: each pixel maps
/// to the fraction of pixels whose bin is <= its own bin.
ImageTensor hist_equalize(const ImageTensor& img, int bins = kDefaultBins);

/// Tile layout and per-tile lookup tables of adaptive equalization.
struct AheMapping {
    int tiles = 1;
    int bins = kDefaultBins;
    std::vector<int> row_edges;  ///< tiles + 1 entries, tile r spans [row_edges[r], row_edges[r+1])
    std::vector<int> col_edges;
    std::vector<std::vector<double>> luts;  ///< tiles * tiles tables, row-major over the tile grid

    const std::vector<double>& lut(int tile_row, int tile_col) const {
        return luts[static_cast<std::size_t>(tile_row * tiles + tile_col)];
    }
};

/// Builds the tile grid and clip-limited CDF tables. `clip` is a multiple of
/// the mean bin count (as in CLAHE); infinity disables clipping.
AheMapping compute_ahe_mapping(const ImageTensor& img, int tiles, double clip,
                               int bins = kDefaultBins);

/// Tile-wise equalization with bilinear blending between tile centres.
ImageTensor adaptive_hist_equalize(const ImageTensor& img, int tiles = 8, double clip = 4.0,
                                   int bins = kDefaultBins);

/// Shannon entropy (bits) of the quantized histogram of a single-channel image.
double shannon_entropy(const ImageTensor& img, int bins = kDefaultBins);

}  // namespace lowlight
