#include "lowlight/ice_objective.hpp"

#include <cmath>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

void require_weight(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInput(std::string(name) + " must be finite and non-negative");
    }
}

// exp(-lambda3 * mean_c |d|) from one directional difference of R.
ImageTensor structure_weight(const ImageTensor& d, double lambda3) {
    auto out = ImageTensor::uninitialized({d.height(), d.width(), 1});
    const auto c = static_cast<std::size_t>(d.channels());
    auto src = d.data();
    auto dst = out.data();
    for (std::size_t p = 0; p < dst.size(); ++p) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < c; ++ch) acc += std::fabs(src[p * c + ch]);
        dst[p] = std::exp(-lambda3 * acc / static_cast<double>(c));
    }
    return out;
}

}  // namespace

void IceConfig::validate() const {
    require_weight(lambda1, "ice.lambda1");
    require_weight(lambda2, "ice.lambda2");
    require_weight(lambda, "ice.lambda");
    require_weight(lambda3, "ice.lambda3");
    if (he_bins < 2) throw InvalidInput("ice.he_bins must be >= 2");
}

IceProblem IceProblem::make(ImageTensor s, const IceConfig& config) {
    config.validate();
    if (s.channels() != 3) throw InvalidInput("ICE problem needs a 3-channel image");
    IceProblem p;
    p.he_target = hist_equalize(max_channel(s), config.he_bins);
    p.s = std::move(s);
    p.config = config;
    return p;
}

StructureWeights ice_structure_weights(const ImageTensor& r, double lambda3) {
    const GradientPair g = gradient(r);
    return {structure_weight(g.dx, lambda3), structure_weight(g.dy, lambda3)};
}

Var ice_recon_loss(Var r, Var i, const ImageTensor& s) {
    Tape& tape = *r.tape();
    Var product = mul(r, broadcast_channels(i, r.shape().channels));
    return mean(abs(sub(tape.constant(s), product)));
}

Var ice_reflectance_loss(Var r, const ImageTensor& he_target, double lambda) {
    Tape& tape = *r.tape();
    Var fidelity = mean(abs(sub(channel_max(r), tape.constant(he_target))));
    Var tv = mean(add(abs(diff_x(r)), abs(diff_y(r))));
    return add(fidelity, scale(tv, lambda));
}

Var ice_illumination_loss(Var i, const StructureWeights& weights) {
    Tape& tape = *i.tape();
    Var x = mean(mul(abs(diff_x(i)), tape.constant(weights.x)));
    Var y = mean(mul(abs(diff_y(i)), tape.constant(weights.y)));
    return add(x, y);
}

Var ice_illumination_loss(Var i, Var r, double lambda3) {
    return ice_illumination_loss(i, ice_structure_weights(r.value(), lambda3));
}

ObjectiveTerms ice_total(Var r, Var i, const IceProblem& problem, const StructureWeights& weights) {
    const IceConfig& cfg = problem.config;
    ObjectiveTerms t;
    t.recon = ice_recon_loss(r, i, problem.s);
    t.reflectance = ice_reflectance_loss(r, problem.he_target, cfg.lambda);
    t.illumination = ice_illumination_loss(i, weights);
    t.total = add(add(t.recon, scale(t.reflectance, cfg.lambda1)),
                  scale(t.illumination, cfg.lambda2));
    return t;
}

ObjectiveTerms ice_total(Var r, Var i, const IceProblem& problem) {
    return ice_total(r, i, problem, ice_structure_weights(r.value(), problem.config.lambda3));
}

ObjectiveFn ice_objective(const IceProblem& problem) {
    return [&problem](Tape&, Var r, Var i) { return ice_total(r, i, problem); };
}

}  // namespace lowlight
