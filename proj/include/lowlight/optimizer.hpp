#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lowlight/image.hpp"
#include "lowlight/objective.hpp"

namespace lowlight {

inline constexpr double kIllumFloor = 1e-3;   ///< realized I lives in (kIllumFloor, 1)
inline constexpr double kInitMargin = 1e-3;   ///< clamp margin used when inverting the range maps

double sigmoid(double t) noexcept;
double logit(double p) noexcept;

/// Unconstrained latents. R = sigmoid(theta_r), I = kIllumFloor + (1 - kIllumFloor) * sigmoid(theta_i).
struct DecompositionState {
    ImageTensor theta_r;  ///< H x W x 3
    ImageTensor theta_i;  ///< H x W x 1

    ImageTensor reflectance() const;
    ImageTensor illumination() const;
};

/// I from the max channel of S, R = S / (max_c S + eps).
DecompositionState init_state(const ImageTensor& s);

/// Latents that realize the given (R, I), after clamping into the open ranges.
DecompositionState state_from_values(const ImageTensor& r, const ImageTensor& i);

struct RunParams {
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int max_steps = 800;
    double tol = 1e-5;  ///< relative loss change over `patience` steps that counts as converged
    int patience = 50;

    void validate() const;
};

struct LossTerms {
    double total = 0.0;
    double recon = 0.0;
    double reflectance = 0.0;
    double illumination = 0.0;
};

struct OptimRun {
    int step_count = 0;
    RunParams params;
    std::vector<double> loss_trace;  ///< step_count + 1 entries, initial loss first
    std::vector<LossTerms> term_trace;
    bool converged = false;
};

struct Evaluation {
    LossTerms terms;
    ImageTensor grad_theta_r;
    ImageTensor grad_theta_i;
};

/// Loss and latent gradients at `state`; chains through the range maps.
Evaluation evaluate(const ObjectiveFn& objective, const DecompositionState& state);

/// Adam on the latents. Stops after max_steps, or early once the relative loss
/// change across the last `patience` steps is below tol. Throws DivergedError
/// (tagged with `stage`) on a non-finite loss.
std::pair<DecompositionState, OptimRun> minimize(const ObjectiveFn& objective,
                                                 DecompositionState state,
                                                 const RunParams& params,
                                                 const std::string& stage = {});

}  // namespace lowlight
