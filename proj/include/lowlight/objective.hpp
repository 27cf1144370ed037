#pragma once

#include <functional>

#include "lowlight/autodiff.hpp"

namespace lowlight {

/// Loss nodes of one objective evaluation: total = recon + l1*reflectance + l2*illumination.
struct ObjectiveTerms {
    Var total;
    Var recon;
    Var reflectance;
    Var illumination;
};

/// Builds an objective over reflectance R (H x W x 3) and illumination I (H x W x 1).
using ObjectiveFn = std::function<ObjectiveTerms(Tape&, Var r, Var i)>;

/// x * exp(-lambda3 * x): shrinks responses below 1/lambda3, grows those above.
Var sharpening_penalty(Var x, double lambda3);

}  // namespace lowlight
