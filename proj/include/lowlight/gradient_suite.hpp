#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowlight/image.hpp"

// Finite-difference checks of every taped primitive and of both objectives,
// evaluated at points kept away from the abs/max kinks.

namespace lowlight {

/// Inputs whose abs/max arguments all stay at least `margin` away from a kink:
/// checkerboard R and I with banded channel values, S offset from R o I, and
/// an HE target offset from max_c R.
struct KinkFreePoint {
    ImageTensor s;           ///< H x W x 3
    ImageTensor r;           ///< H x W x 3
    ImageTensor i;           ///< H x W x 1
    ImageTensor he_target;   ///< H x W x 1
    ImageTensor target_max;  ///< H x W x 1, in [0.1, 0.9]
};

KinkFreePoint kink_free_point(int height, int width, std::uint64_t seed, double margin = 0.05);

struct GradCheckResult {
    std::string name;
    double max_rel_error = 0.0;
};

/// One result per primitive (when `primitives`) and per objective.
std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed, int height = 8, int width = 8,
                                                bool primitives = true, double h = 1e-4);

}  // namespace lowlight
