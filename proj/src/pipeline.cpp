#include "lowlight/pipeline.hpp"

#include <algorithm>

#include "lowlight/errors.hpp"
#include "lowlight/image_ops.hpp"

namespace lowlight {

namespace {

void check_input(const ImageTensor& s) {
    if (s.channels() != 3) throw InvalidInput("enhance: input must have 3 channels");
    if (std::min(s.height(), s.width()) < 16) {
        throw InvalidInput("enhance: minimum image dimension is 16 pixels");
    }
    for (double v : s.data()) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("enhance: input must lie in [0, 1]");
    }
}

// Illumination implied by S = R o I for an externally enhanced max channel.
ImageTensor implied_illumination(const ImageTensor& s, const ImageTensor& enhanced_max) {
    const ImageTensor m = max_channel(s);
    ImageTensor out(m.shape());
    for (std::size_t p = 0; p < m.size(); ++p) {
        out[p] = std::clamp(m[p] / std::max(enhanced_max[p], kLogEps), kIllumFloor, 1.0);
    }
    return out;
}

}  // namespace

ImageTensor rescale_by_max_channel(const ImageTensor& s, const ImageTensor& enhanced_max) {
    const ImageTensor m = max_channel(s);
    if (enhanced_max.shape() != m.shape()) {
        throw InvalidInput("rescale_by_max_channel: enhanced map does not match the input size");
    }
    ImageTensor out(s.shape());
    for (std::size_t p = 0; p < m.size(); ++p) {
        const double target = enhanced_max[p];
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t k = 3 * p + c;
            out[k] = m[p] > 0.0 ? std::clamp(s[k] * (target / m[p]), 0.0, 1.0) : target;
        }
    }
    return out;
}

StageOne run_first_stage(const ImageTensor& s, const PipelineConfig& config) {
    StageOne out;
    switch (config.first_stage) {
        case FirstStage::MeRetinex: {
            const IceProblem problem = IceProblem::make(s, config.ice);
            auto [state, run] = minimize(ice_objective(problem), init_state(s), config.ice_run, "ice");
            out.r = state.reflectance();
            out.i = state.illumination();
            out.run = std::move(run);
            return out;
        }
        case FirstStage::ExternalHe:
        case FirstStage::ExternalAhe: {
            const ImageTensor m = max_channel(s);
            const ImageTensor enhanced = config.first_stage == FirstStage::ExternalHe
                                             ? hist_equalize(m, config.ice.he_bins)
                                             : adaptive_hist_equalize(m, config.ahe_tiles,
                                                                      config.ahe_clip,
                                                                      config.ice.he_bins);
            out.r = rescale_by_max_channel(s, enhanced);
            out.i = implied_illumination(s, enhanced);
            return out;
        }
        case FirstStage::ExternalFile: {
            const ImageTensor& ext = config.external_stage1;
            if (ext.empty() || ext.height() != s.height() || ext.width() != s.width()) {
                throw InvalidInput("external first-stage image does not match the input dimensions");
            }
            if (ext.channels() == 3) {
                out.r = ext;
                out.i = implied_illumination(s, max_channel(ext));
            } else if (ext.channels() == 1) {
                out.r = rescale_by_max_channel(s, ext);
                out.i = implied_illumination(s, ext);
            } else {
                throw InvalidInput("external first-stage image must have 1 or 3 channels");
            }
            return out;
        }
    }
    throw InvalidInput("unknown first-stage mode");
}

StageTwo run_red_stage(const ImageTensor& s, const StageOne& stage1, const PipelineConfig& config) {
    ImageTensor target = max_channel(stage1.r);
    for (double& v : target.data()) v = std::clamp(v, 0.0, 1.0);
    const RedProblem problem = RedProblem::make(s, std::move(target), config.red, config.ablations);
    DecompositionState start =
        config.red_warm_start ? state_from_values(stage1.r, stage1.i) : init_state(s);
    auto [state, run] = minimize(red_objective(problem, config.weight_refresh_stride),
                                 std::move(start), config.red_run, "red");
    StageTwo out;
    out.r = state.reflectance();
    out.i = state.illumination();
    out.weights = red_freeze(out.r, out.i, config.red, config.ablations).weights;
    out.run = std::move(run);
    return out;
}

EnhancementResult enhance(const ImageTensor& s, const PipelineConfig& config) {
    check_input(s);
    if (config.ablations.count() > 1) throw InvalidInput("at most one ablation may be active");
    StageOne one = run_first_stage(s, config);
    StageTwo two = run_red_stage(s, one, config);
    EnhancementResult res;
    res.r_stage1 = std::move(one.r);
    res.i_stage1 = std::move(one.i);
    res.ice_run = std::move(one.run);
    res.r_final = std::move(two.r);
    res.i_final = std::move(two.i);
    res.weights_final = std::move(two.weights);
    res.red_run = std::move(two.run);
    return res;
}

EnhancementResult ablate(const ImageTensor& s, const PipelineConfig& config) {
    if (config.ablations.count() > 1) {
        throw InvalidInput("ablate: exactly one ablation switch may be set");
    }
    return enhance(s, config);
}

}  // namespace lowlight
