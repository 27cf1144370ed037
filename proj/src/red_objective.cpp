#include "lowlight/red_objective.hpp"

#include <cmath>

#include "lowlight/errors.hpp"

namespace lowlight {

namespace {

void require_weight(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInput(std::string(name) + " must be finite and non-negative");
    }
}

void require_odd(int k, const char* name) {
    if (k < 3 || k % 2 == 0) throw InvalidInput(std::string(name) + " must be odd and >= 3");
}

ImageTensor plus(ImageTensor a, double eps) {
    for (double& v : a.data()) v += eps;
    return a;
}

ImageTensor ones_like(const ImageTensor& a) { return ImageTensor(a.shape(), 1.0); }

// exp(-lambda3 * mean_c(wr o |d| / norm)), one channel.
ImageTensor wr_exp_factor(const ImageTensor& wr, const ImageTensor& d, const ImageTensor& norm,
                          double lambda3) {
    auto out = ImageTensor::uninitialized({d.height(), d.width(), 1});
    const auto c = static_cast<std::size_t>(d.channels());
    auto pw = wr.data();
    auto pd = d.data();
    auto pn = norm.data();
    auto dst = out.data();
    for (std::size_t p = 0; p < dst.size(); ++p) {
        double acc = 0.0;
        for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t i = p * c + ch;
            acc += pw[i] * (std::fabs(pd[i]) / pn[i]);
        }
        dst[p] = std::exp(-lambda3 * acc / static_cast<double>(c));
    }
    return out;
}

Var normalized_abs(Var d, const ImageTensor& norm) {
    Tape& tape = *d.tape();
    return div(abs(d), tape.constant(norm));
}

WeightPair smoothed_gradient_weight(const GradientPair& g, const RedConfig& config) {
    return {local_normalize(abs(mean_filter(g.dx, config.mean_k)), config.norm_k),
            local_normalize(abs(mean_filter(g.dy, config.mean_k)), config.norm_k)};
}

}  // namespace

void RedConfig::validate() const {
    require_weight(lambda1, "red.lambda1");
    require_weight(lambda2, "red.lambda2");
    require_weight(lambda, "red.lambda");
    require_weight(lambda3, "red.lambda3");
    require_odd(mean_k, "red.mean_k");
    require_odd(norm_k, "red.norm_k");
}

RedProblem RedProblem::make(ImageTensor s, ImageTensor target_max, const RedConfig& config,
                            const Ablations& ablations) {
    config.validate();
    if (s.channels() != 3) throw InvalidInput("RED problem needs a 3-channel image");
    if (target_max.channels() != 1 || target_max.height() != s.height() ||
        target_max.width() != s.width()) {
        throw InvalidInput("RED target must be a single-channel map of the input size");
    }
    for (double v : target_max.data()) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("RED target must lie in [0, 1]");
    }
    return RedProblem{std::move(s), std::move(target_max), config, ablations};
}

WeightPair compute_weight_w(const ImageTensor& r, const RedConfig& config) {
    const GradientPair g = gradient(mean_filter(r, config.mean_k));
    return {local_normalize(abs(g.dx), config.norm_k), local_normalize(abs(g.dy), config.norm_k)};
}

WeightPair compute_weight_wi(const ImageTensor& i, const RedConfig& config) {
    return smoothed_gradient_weight(gradient(i), config);
}

WeightPair compute_weight_wr(const ImageTensor& r, const RedConfig& config) {
    return compute_weight_wi(r, config);
}

RedFrozen red_freeze(const ImageTensor& r, const ImageTensor& i, const RedConfig& config,
                     const Ablations& ablations) {
    const GradientPair gr = gradient(r);
    const GradientPair gi = gradient(i);
    RedFrozen f;
    f.r_norm = {plus(local_max(abs(gr.dx), config.norm_k), kNormEps),
                plus(local_max(abs(gr.dy), config.norm_k), kNormEps)};
    f.i_norm = {plus(local_max(abs(gi.dx), config.norm_k), kNormEps),
                plus(local_max(abs(gi.dy), config.norm_k), kNormEps)};

    f.weights.w = ablations.drop_w ? WeightPair{ones_like(r), ones_like(r)}
                                   : compute_weight_w(r, config);
    if (ablations.drop_wi_wr) {
        f.weights.wi = {ones_like(i), ones_like(i)};
        f.weights.wr = {ones_like(r), ones_like(r)};
    } else {
        f.weights.wi = smoothed_gradient_weight(gi, config);
        f.weights.wr = smoothed_gradient_weight(gr, config);
    }

    if (ablations.drop_exp_wr_term) {
        f.wr_factor = {ones_like(i), ones_like(i)};
    } else {
        f.wr_factor = {wr_exp_factor(f.weights.wr.x, gr.dx, f.r_norm.x, config.lambda3),
                       wr_exp_factor(f.weights.wr.y, gr.dy, f.r_norm.y, config.lambda3)};
    }
    return f;
}

Var red_recon_loss(Var r, Var i, const ImageTensor& s) {
    Tape& tape = *r.tape();
    Var product = mul(r, broadcast_channels(i, r.shape().channels));
    return mean(sub(product, mul(tape.constant(s), log(product, kLogEps))));
}

Var red_reflectance_loss(Var r, const ImageTensor& target_max, const RedFrozen& frozen,
                         const RedConfig& config) {
    Tape& tape = *r.tape();
    Var m = channel_max(r);
    Var fidelity = mean(sub(m, mul(tape.constant(target_max), log(m, kLogEps))));

    Var x = mul(tape.constant(frozen.weights.w.x), normalized_abs(diff_x(r), frozen.r_norm.x));
    Var y = mul(tape.constant(frozen.weights.w.y), normalized_abs(diff_y(r), frozen.r_norm.y));
    Var smooth = add(mean(sharpening_penalty(x, config.lambda3)),
                     mean(sharpening_penalty(y, config.lambda3)));
    return add(fidelity, scale(smooth, config.lambda));
}

Var red_illumination_loss(Var i, const RedFrozen& frozen, const RedConfig& config,
                          const Ablations& ablations) {
    Tape& tape = *i.tape();
    auto direction = [&](Var d, const ImageTensor& wi, const ImageTensor& norm,
                         const ImageTensor& wr_factor) {
        Var a = mul(tape.constant(wi), normalized_abs(d, norm));
        Var core = ablations.drop_exp_wi_term ? a : sharpening_penalty(a, config.lambda3);
        return mean(mul(core, tape.constant(wr_factor)));
    };
    return add(direction(diff_x(i), frozen.weights.wi.x, frozen.i_norm.x, frozen.wr_factor.x),
               direction(diff_y(i), frozen.weights.wi.y, frozen.i_norm.y, frozen.wr_factor.y));
}

ObjectiveTerms red_total(Var r, Var i, const RedProblem& problem, const RedFrozen& frozen) {
    const RedConfig& cfg = problem.config;
    ObjectiveTerms t;
    t.recon = red_recon_loss(r, i, problem.s);
    t.reflectance = red_reflectance_loss(r, problem.target_max, frozen, cfg);
    t.illumination = red_illumination_loss(i, frozen, cfg, problem.ablations);
    t.total = add(add(t.recon, scale(t.reflectance, cfg.lambda1)),
                  scale(t.illumination, cfg.lambda2));
    return t;
}

ObjectiveTerms red_total(Var r, Var i, const RedProblem& problem) {
    return red_total(r, i, problem,
                     red_freeze(r.value(), i.value(), problem.config, problem.ablations));
}

ObjectiveFn red_objective(const RedProblem& problem, int refresh_stride) {
    if (refresh_stride < 1) throw InvalidInput("weight refresh stride must be >= 1");
    struct Cache {
        long calls = 0;
        RedFrozen frozen;
    };
    auto cache = std::make_shared<Cache>();
    return [&problem, refresh_stride, cache](Tape&, Var r, Var i) {
        if (cache->calls % refresh_stride == 0) {
            cache->frozen = red_freeze(r.value(), i.value(), problem.config, problem.ablations);
        }
        ++cache->calls;
        return red_total(r, i, problem, cache->frozen);
    };
}

}  // namespace lowlight
