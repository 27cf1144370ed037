#pragma once

#include <memory>

#include "lowlight/image.hpp"
#include "lowlight/image_ops.hpp"
#include "lowlight/objective.hpp"

// Re-enhancement and denoising objective. Reconstruction and reflectance
// fidelity are Poisson negative log-likelihoods; the smoothness terms use the
// x*exp(-lambda3*x) shape gated by detached weight maps built from smoothed
// gradients. All gradient quantities are evaluated per direction and summed.

namespace lowlight {

inline constexpr double kLogEps = 1e-4;

struct RedConfig {
    double lambda1 = 1.0;
    double lambda2 = 0.1;
    double lambda = 0.5;    ///< weight of the gated smoothness term of the reflectance loss
    double lambda3 = 2.0;  ///< exponent scale of the sharpening penalty
    int mean_k = kDefaultMeanK;
    int norm_k = 41;

    void validate() const;
};

/// Switches that remove one factor of the objective.
struct Ablations {
    bool drop_w = false;            ///< W := 1 in the reflectance loss
    bool drop_wi_wr = false;        ///< W_I := W_R := 1 in the illumination loss
    bool drop_exp_wi_term = false;  ///< remove exp(-lambda3 W_I o N(|dI'|))
    bool drop_exp_wr_term = false;  ///< remove exp(-lambda3 W_R o N(|dR'|))

    int count() const noexcept {
        return int(drop_w) + int(drop_wi_wr) + int(drop_exp_wi_term) + int(drop_exp_wr_term);
    }
};

struct RedProblem {
    ImageTensor s;
    ImageTensor target_max;  ///< max channel of the first-stage reflectance; fixed
    RedConfig config;
    Ablations ablations;

    static RedProblem make(ImageTensor s, ImageTensor target_max, const RedConfig& config = {},
                           const Ablations& ablations = {});
};

/// One map per gradient direction.
struct WeightPair {
    ImageTensor x;
    ImageTensor y;
};

/// W = N(|d G(R')|): smooth, then differentiate.
WeightPair compute_weight_w(const ImageTensor& r, const RedConfig& config);
/// W_I / W_R = N(|G(d X)|): differentiate, then smooth.
WeightPair compute_weight_wi(const ImageTensor& i, const RedConfig& config);
WeightPair compute_weight_wr(const ImageTensor& r, const RedConfig& config);

struct WeightMaps {
    WeightPair w;
    WeightPair wi;
    WeightPair wr;
};

/// Everything the RED losses hold constant during one evaluation: the weight
/// maps, the local-maximum denominators of N(|dR'|) and N(|dI'|), and the
/// detached factor exp(-lambda3 * mean_c(W_R o N(|dR'|))).
struct RedFrozen {
    WeightMaps weights;
    WeightPair r_norm;  ///< local_max(|d R'|) + eps
    WeightPair i_norm;  ///< local_max(|d I'|) + eps
    WeightPair wr_factor;
};

RedFrozen red_freeze(const ImageTensor& r, const ImageTensor& i, const RedConfig& config,
                     const Ablations& ablations = {});

/// mean(R'oI' - S o log(R'oI' + eps)).
Var red_recon_loss(Var r, Var i, const ImageTensor& s);

/// mean(M - T o log(M + eps)) + lambda * sum_d mean(X o exp(-lambda3 X)),
/// M = max_c R', X = W_d o |d R'| / r_norm_d.
Var red_reflectance_loss(Var r, const ImageTensor& target_max, const RedFrozen& frozen,
                         const RedConfig& config);

/// sum_d mean(A o exp(-lambda3 A) o wr_factor_d), A = W_I,d o |d I'| / i_norm_d.
Var red_illumination_loss(Var i, const RedFrozen& frozen, const RedConfig& config,
                          const Ablations& ablations = {});

ObjectiveTerms red_total(Var r, Var i, const RedProblem& problem);
ObjectiveTerms red_total(Var r, Var i, const RedProblem& problem, const RedFrozen& frozen);

/// Objective for the optimizer. Frozen quantities are refreshed from the
/// current values every `refresh_stride` evaluations.
ObjectiveFn red_objective(const RedProblem& problem, int refresh_stride = 1);

}  // namespace lowlight
