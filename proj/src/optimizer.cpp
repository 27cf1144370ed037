#include "lowlight/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lowlight/errors.hpp"
#include "lowlight/image_ops.hpp"
#include "lowlight/red_objective.hpp"

namespace lowlight {

// Clamped so that extreme latents still land strictly inside (0, 1).
double sigmoid(double t) noexcept {
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (t >= 0.0) return std::min(1.0 / (1.0 + std::exp(-t)), hi);
    const double e = std::exp(t);
    return std::max(e / (1.0 + e), lo);
}

double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

namespace {

constexpr double kIllumSpan = 1.0 - kIllumFloor;

double illum_from_latent(double t) noexcept {
    static const double lowest = std::nextafter(kIllumFloor, 1.0);
    return std::max(kIllumFloor + kIllumSpan * sigmoid(t), lowest);
}

double latent_from_illum(double i) noexcept {
    const double clamped = std::clamp(i, kIllumFloor + kInitMargin, 1.0 - kInitMargin);
    return logit((clamped - kIllumFloor) / kIllumSpan);
}

double latent_from_reflectance(double r) noexcept {
    return logit(std::clamp(r, kInitMargin, 1.0 - kInitMargin));
}

}  // namespace

ImageTensor DecompositionState::reflectance() const {
    auto out = ImageTensor::uninitialized(theta_r.shape());
    auto src = theta_r.data();
    auto dst = out.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = sigmoid(src[k]);
    return out;
}

ImageTensor DecompositionState::illumination() const {
    auto out = ImageTensor::uninitialized(theta_i.shape());
    auto src = theta_i.data();
    auto dst = out.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = illum_from_latent(src[k]);
    return out;
}

DecompositionState init_state(const ImageTensor& s) {
    const ImageTensor m = max_channel(s);
    DecompositionState st{ImageTensor(s.shape()), ImageTensor(m.shape())};
    for (std::size_t p = 0; p < m.size(); ++p) {
        st.theta_i[p] = latent_from_illum(m[p]);
        for (std::size_t c = 0; c < 3; ++c) {
            st.theta_r[3 * p + c] = latent_from_reflectance(s[3 * p + c] / (m[p] + kLogEps));
        }
    }
    return st;
}

DecompositionState state_from_values(const ImageTensor& r, const ImageTensor& i) {
    if (r.channels() != 3 || i.channels() != 1 || r.height() != i.height() ||
        r.width() != i.width()) {
        throw InvalidInput("state_from_values: expected H x W x 3 reflectance and H x W x 1 illumination");
    }
    DecompositionState st{ImageTensor(r.shape()), ImageTensor(i.shape())};
    for (std::size_t k = 0; k < r.size(); ++k) st.theta_r[k] = latent_from_reflectance(r[k]);
    for (std::size_t k = 0; k < i.size(); ++k) st.theta_i[k] = latent_from_illum(i[k]);
    return st;
}

void RunParams::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidInput("learning rate must be finite and non-negative");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw InvalidInput("moment decay rates must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw InvalidInput("adam eps must be positive");
    if (max_steps < 1) throw InvalidInput("max_steps must be >= 1");
    if (!(tol >= 0.0)) throw InvalidInput("tol must be non-negative");
    if (patience < 1) throw InvalidInput("patience must be >= 1");
}

Evaluation evaluate(const ObjectiveFn& objective, const DecompositionState& state) {
    Tape tape;
    Var r = tape.leaf(state.reflectance());
    Var i = tape.leaf(state.illumination());
    const ObjectiveTerms terms = objective(tape, r, i);
    tape.backward(terms.total);

    Evaluation ev;
    ev.terms = {terms.total.value().item(), terms.recon.value().item(),
                terms.reflectance.value().item(), terms.illumination.value().item()};

    // Chain through R = sigmoid(theta_r) and I = floor + span * sigmoid(theta_i).
    ev.grad_theta_r = r.grad();
    const auto rv = r.value().data();
    for (std::size_t k = 0; k < rv.size(); ++k) ev.grad_theta_r[k] *= rv[k] * (1.0 - rv[k]);

    ev.grad_theta_i = i.grad();
    const auto iv = i.value().data();
    for (std::size_t k = 0; k < iv.size(); ++k) {
        const double s = (iv[k] - kIllumFloor) / kIllumSpan;
        ev.grad_theta_i[k] *= kIllumSpan * s * (1.0 - s);
    }
    return ev;
}

namespace {

struct Moments {
    ImageTensor m;
    ImageTensor v;
};

void adam_step(ImageTensor& theta, const ImageTensor& grad, Moments& mo, const RunParams& p,
               double bias1, double bias2) {
    auto th = theta.data();
    auto g = grad.data();
    auto m = mo.m.data();
    auto v = mo.v.data();
    for (std::size_t k = 0; k < th.size(); ++k) {
        m[k] = p.beta1 * m[k] + (1.0 - p.beta1) * g[k];
        v[k] = p.beta2 * v[k] + (1.0 - p.beta2) * g[k] * g[k];
        const double mhat = m[k] / bias1;
        const double vhat = v[k] / bias2;
        th[k] -= p.learning_rate * mhat / (std::sqrt(vhat) + p.eps);
    }
}

}  // namespace

std::pair<DecompositionState, OptimRun> minimize(const ObjectiveFn& objective,
                                                 DecompositionState state,
                                                 const RunParams& params,
                                                 const std::string& stage) {
    params.validate();
    OptimRun run;
    run.params = params;
    Moments mr{ImageTensor(state.theta_r.shape()), ImageTensor(state.theta_r.shape())};
    Moments mi{ImageTensor(state.theta_i.shape()), ImageTensor(state.theta_i.shape())};

    for (int step = 0;; ++step) {
        const Evaluation ev = evaluate(objective, state);
        if (!std::isfinite(ev.terms.total)) {
            run.loss_trace.push_back(ev.terms.total);
            throw DivergedError("loss became non-finite at step " + std::to_string(step),
                                run.loss_trace, stage);
        }
        run.loss_trace.push_back(ev.terms.total);
        run.term_trace.push_back(ev.terms);
        if (step == params.max_steps) break;

        if (step >= params.patience) {
            const double before = run.loss_trace[static_cast<std::size_t>(step - params.patience)];
            const double change = std::fabs(ev.terms.total - before) / std::max(std::fabs(before), 1e-12);
            if (change < params.tol) {
                run.converged = true;
                break;
            }
        }

        const double t = static_cast<double>(step + 1);
        const double bias1 = 1.0 - std::pow(params.beta1, t);
        const double bias2 = 1.0 - std::pow(params.beta2, t);
        adam_step(state.theta_r, ev.grad_theta_r, mr, params, bias1, bias2);
        adam_step(state.theta_i, ev.grad_theta_i, mi, params, bias1, bias2);
    }
    run.step_count = static_cast<int>(run.loss_trace.size()) - 1;
    return {std::move(state), std::move(run)};
}

}  // namespace lowlight
