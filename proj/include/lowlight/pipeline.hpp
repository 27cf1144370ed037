#pragma once

#include <limits>

#include "lowlight/ice_objective.hpp"
#include "lowlight/image.hpp"
#include "lowlight/optimizer.hpp"
#include "lowlight/red_objective.hpp"

namespace lowlight {

enum class FirstStage {
    MeRetinex,    ///< minimize the ICE objective
    ExternalHe,   ///< global HE on the max channel
    ExternalAhe,  ///< adaptive HE on the max channel
    ExternalFile, ///< caller-supplied enhanced image
};

struct PipelineConfig {
    IceConfig ice;
    RedConfig red;
    RunParams ice_run{.max_steps = 800};
    RunParams red_run{.max_steps = 1200};
    FirstStage first_stage = FirstStage::MeRetinex;
    ImageTensor external_stage1;  ///< used by ExternalFile; 1 or 3 channels
    int ahe_tiles = 8;
    double ahe_clip = 4.0;
    Ablations ablations;
    bool red_warm_start = false;  ///< start RED from the stage-1 decomposition instead of init_state(S)
    int weight_refresh_stride = 1;
};

struct EnhancementResult {
    ImageTensor r_stage1;
    ImageTensor i_stage1;
    ImageTensor r_final;  ///< the enhanced image
    ImageTensor i_final;
    WeightMaps weights_final;
    OptimRun ice_run;  ///< empty for external first stages
    OptimRun red_run;
};

/// Scales the three channels of S so that the max channel becomes `enhanced_max`.
/// Pixels with a zero max channel become grey at the enhanced level.
ImageTensor rescale_by_max_channel(const ImageTensor& s, const ImageTensor& enhanced_max);

/// Stage one only: (R, I) for the configured first-stage mode.
struct StageOne {
    ImageTensor r;
    ImageTensor i;
    OptimRun run;
};
StageOne run_first_stage(const ImageTensor& s, const PipelineConfig& config);

/// Stage two given a stage-one result. Only max_channel(stage1.r) enters the
/// objective unless warm start is enabled.
struct StageTwo {
    ImageTensor r;
    ImageTensor i;
    WeightMaps weights;
    OptimRun run;
};
StageTwo run_red_stage(const ImageTensor& s, const StageOne& stage1, const PipelineConfig& config);

/// Two-stage enhancement. Requires a 3-channel input with min dimension >= 16.
EnhancementResult enhance(const ImageTensor& s, const PipelineConfig& config);

/// enhance() with at most one ablation switch set.
EnhancementResult ablate(const ImageTensor& s, const PipelineConfig& config);

}  // namespace lowlight
