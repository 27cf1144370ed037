#pragma once

#include "lowlight/image.hpp"
#include "lowlight/image_ops.hpp"
#include "lowlight/objective.hpp"

// Maximum-entropy Retinex objective: L1 reconstruction, a reflectance term
// anchored to the histogram-equalized max channel of the input, and a
// structure-aware smoothness term on the illumination.

namespace lowlight {

struct IceConfig {
    double lambda1 = 1.0;   ///< weight of the reflectance loss
    double lambda2 = 0.1;   ///< weight of the illumination loss
    double lambda = 0.1;    ///< total-variation weight inside the reflectance loss
    double lambda3 = 10.0;  ///< structure awareness of the illumination smoothness
    int he_bins = kDefaultBins;

    /// Throws InvalidInput on negative/non-finite weights or he_bins < 2.
    void validate() const;
};

struct IceProblem {
    ImageTensor s;
    ImageTensor he_target;  ///< hist_equalize(max_channel(s)); fixed
    IceConfig config;

    static IceProblem make(ImageTensor s, const IceConfig& config = {});
};

/// exp(-lambda3 * mean_c |d R|) for each direction; single channel, detached.
struct StructureWeights {
    ImageTensor x;
    ImageTensor y;
};

StructureWeights ice_structure_weights(const ImageTensor& r, double lambda3);

/// mean |S - R o I| over pixels and channels.
Var ice_recon_loss(Var r, Var i, const ImageTensor& s);

/// mean |max_c R - he_target| + lambda * mean(|dx R| + |dy R|).
Var ice_reflectance_loss(Var r, const ImageTensor& he_target, double lambda);

/// Sum over directions of mean(|d I| o w_d) with precomputed weights.
Var ice_illumination_loss(Var i, const StructureWeights& weights);

/// Same, with weights taken from the current value of R (no gradient reaches R).
Var ice_illumination_loss(Var i, Var r, double lambda3);

/// Weights recomputed from r.value().
ObjectiveTerms ice_total(Var r, Var i, const IceProblem& problem);
/// Weights supplied by the caller, e.g. frozen for a finite-difference check.
ObjectiveTerms ice_total(Var r, Var i, const IceProblem& problem, const StructureWeights& weights);

ObjectiveFn ice_objective(const IceProblem& problem);

}  // namespace lowlight
