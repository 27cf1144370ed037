#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowlight/image.hpp"

// Deterministic synthetic scenes standing in for a low-light corpus.

namespace lowlight::synthetic {

/// Clean RGB test chart: ramps, flat patches of spread-out levels, a step
/// edge band and a fine-texture band.
ImageTensor test_chart(int height, int width);

/// Rows of the test chart holding the fine texture and the step edges.
struct ChartRegions {
    int texture_row_begin, texture_row_end;
    int edge_row_begin, edge_row_end;
    std::vector<int> edge_cols;  ///< columns x with a strong edge between x and x+1
};
ChartRegions chart_regions(int height, int width);

/// clean * scale, then Poisson shot noise with `peak_events` expected counts
/// at an input intensity of 1.
ImageTensor simulate_low_light(const ImageTensor& clean, double scale, double peak_events,
                               std::uint64_t seed);

struct Scene {
    std::string name;
    ImageTensor clean;
    ImageTensor low;
};

/// At least five distinct low-light scenes of the given size.
std::vector<Scene> fixture_scenes(int height, int width, std::uint64_t seed);

/// Single-channel image alternating base +/- amplitude between neighbouring columns.
ImageTensor oscillating_texture(int height, int width, double base, double amplitude);

/// Single-channel vertical step of height `amplitude` at column width / 2.
ImageTensor step_edge(int height, int width, double base, double amplitude);

}  // namespace lowlight::synthetic
