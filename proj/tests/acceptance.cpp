// Acceptance checks. Usage: acceptance [criterion...]; no argument runs all.
// Prints one "criterion N: PASS|FAIL ..." line each and exits 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lowlight/allocator.hpp"
#include "lowlight/gradient_suite.hpp"
#include "lowlight/ice_objective.hpp"
#include "lowlight/image_ops.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/optimizer.hpp"
#include "lowlight/pipeline.hpp"
#include "lowlight/red_objective.hpp"
#include "lowlight/synthetic.hpp"
#include "support.hpp"

using namespace lowlight;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double mean_abs(const ImageTensor& a, const ImageTensor& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
    return acc / static_cast<double>(a.size());
}

ImageTensor product(const ImageTensor& r, const ImageTensor& i) {
    ImageTensor out(r.shape());
    for (std::size_t p = 0; p < i.size(); ++p) {
        for (std::size_t c = 0; c < 3; ++c) out[3 * p + c] = r[3 * p + c] * i[p];
    }
    return out;
}

ImageTensor equalized(const ImageTensor& s) {
    return rescale_by_max_channel(s, hist_equalize(max_channel(s)));
}

// --- 1 ---------------------------------------------------------------------

Verdict gradient_correctness() {
    const auto start = Clock::now();
    double worst = 0.0;
    std::string worst_name;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        for (const auto& r : run_gradient_suite(seed, 8, 8)) {
            if (r.max_rel_error > worst) {
                worst = r.max_rel_error;
                worst_name = r.name;
            }
        }
    }
    const double t = seconds_since(start);
    return {worst < 1e-3 && t < 30.0,
            fmt("max relative error %.3g (%s) over 5 seeds, %.1f s", worst, worst_name.c_str(), t)};
}

// --- 2 ---------------------------------------------------------------------

ImageTensor clone(const ImageTensor& a) {
    return ImageTensor(a.height(), a.width(), a.channels(),
                       std::vector<double>(a.data().begin(), a.data().end()));
}

// N(|x|) on the tape with the local maximum taken from the current value.
Var normalized(Var x, int k) {
    Tape& t = *x.tape();
    Var a = abs(x);
    ImageTensor denom = local_max(a.value(), k);
    for (double& v : denom.data()) v += kNormEps;
    return div(a, t.constant(std::move(denom)));
}

// RED total with W and W_I built live on the tape from R and I. The W_R
// factor is frozen as in the library since the tape has no channel mean.
Var red_total_live(Var r, Var i, const RedProblem& p, bool detach_weights) {
    Tape& t = *r.tape();
    const RedConfig& cfg = p.config;
    const RedFrozen frozen = red_freeze(r.value(), i.value(), cfg);
    auto gate = [&](Var w) { return detach_weights ? detach(w) : w; };

    Var prod = mul(r, broadcast_channels(i, 3));
    Var recon = mean(sub(prod, mul(t.constant(p.s), log(prod, kLogEps))));

    Var smoothed = mean_filter(r, cfg.mean_k);
    Var m = channel_max(r);
    Var refl = mean(sub(m, mul(t.constant(p.target_max), log(m, kLogEps))));
    Var wx = gate(normalized(diff_x(smoothed), cfg.norm_k));
    Var wy = gate(normalized(diff_y(smoothed), cfg.norm_k));
    Var xr = mul(wx, div(abs(diff_x(r)), t.constant(frozen.r_norm.x)));
    Var yr = mul(wy, div(abs(diff_y(r)), t.constant(frozen.r_norm.y)));
    Var smooth = add(mean(sharpening_penalty(xr, cfg.lambda3)), mean(sharpening_penalty(yr, cfg.lambda3)));
    refl = add(refl, scale(smooth, cfg.lambda));

    auto direction = [&](Var d, const ImageTensor& norm, const ImageTensor& wr_factor) {
        Var wi = gate(normalized(mean_filter(d, cfg.mean_k), cfg.norm_k));
        Var a = mul(wi, div(abs(d), t.constant(norm)));
        return mean(mul(sharpening_penalty(a, cfg.lambda3), t.constant(wr_factor)));
    };
    Var illum = add(direction(diff_x(i), frozen.i_norm.x, frozen.wr_factor.x),
                    direction(diff_y(i), frozen.i_norm.y, frozen.wr_factor.y));
    return add(add(recon, scale(refl, cfg.lambda1)), scale(illum, cfg.lambda2));
}

Verdict stop_gradient_audit() {
    const auto start = Clock::now();
    bool copies_identical = true, live_identical = true, live_differs = true;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto scene = synthetic::fixture_scenes(24, 32, seed)[seed + 1];
        const ImageTensor target = max_channel(equalized(scene.low));
        const RedProblem p = RedProblem::make(scene.low, target);
        std::mt19937_64 rng(seed);
        const DecompositionState st{testing::random_image(24, 32, 3, rng, -2.0, 2.0),
                                    testing::random_image(24, 32, 1, rng, -2.0, 2.0)};

        // Library objective against the same objective fed value copies of every map.
        const Evaluation lib = evaluate(red_objective(p), st);
        const ObjectiveFn copied = [&](Tape&, Var r, Var i) {
            RedFrozen f = red_freeze(r.value(), i.value(), p.config);
            for (WeightPair* w : {&f.weights.w, &f.weights.wi, &f.weights.wr}) {
                w->x = clone(w->x);
                w->y = clone(w->y);
            }
            f.wr_factor = {clone(f.wr_factor.x), clone(f.wr_factor.y)};
            return red_total(r, i, p, f);
        };
        const Evaluation cp = evaluate(copied, st);
        copies_identical = copies_identical && lib.grad_theta_r == cp.grad_theta_r &&
                           lib.grad_theta_i == cp.grad_theta_i;

        auto live = [&](bool detached) {
            return [&p, detached](Tape& t, Var r, Var i) {
                ObjectiveTerms terms;
                terms.total = terms.recon = red_total_live(r, i, p, detached);
                terms.reflectance = terms.illumination = t.constant(ImageTensor::scalar(0.0));
                return terms;
            };
        };
        const Evaluation detached = evaluate(live(true), st);
        const Evaluation attached = evaluate(live(false), st);
        live_identical = live_identical && detached.grad_theta_r == lib.grad_theta_r &&
                         detached.grad_theta_i == lib.grad_theta_i;
        live_differs = live_differs && testing::max_abs_diff(attached.grad_theta_r, lib.grad_theta_r) > 0.0 &&
                       testing::max_abs_diff(attached.grad_theta_i, lib.grad_theta_i) > 0.0;
    }
    const double t = seconds_since(start);
    return {copies_identical && live_identical && live_differs && t < 10.0,
            fmt("value copies identical: %s; detached live W/W_I identical: %s; undetached live differ: %s; %.1f s",
                copies_identical ? "yes" : "no", live_identical ? "yes" : "no", live_differs ? "yes" : "no", t)};
}

// --- 3, 4, 5 ---------------------------------------------------------------

std::vector<synthetic::Scene> fixtures() { return synthetic::fixture_scenes(64, 96, 2024); }

bool finite_trace(const OptimRun& run) {
    for (double v : run.loss_trace) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Verdict loss_descent() {
    const auto start = Clock::now();
    bool ok = true;
    std::ostringstream os;
    for (const auto& scene : fixtures()) {
        const EnhancementResult res = enhance(scene.low, PipelineConfig{});
        const double ice = res.ice_run.loss_trace.back() / res.ice_run.loss_trace.front();
        const double red = res.red_run.loss_trace.back() / res.red_run.loss_trace.front();
        // The RED loss can be negative; compare in the direction of descent.
        const bool ice_ok = res.ice_run.loss_trace.back() <= 0.999 * res.ice_run.loss_trace.front();
        const bool red_ok = res.red_run.loss_trace.back() <=
                            res.red_run.loss_trace.front() - 0.001 * std::abs(res.red_run.loss_trace.front());
        ok = ok && ice_ok && red_ok && finite_trace(res.ice_run) && finite_trace(res.red_run);
        os << ' ' << scene.name << fmt("(ice %.3f, red %.3f)", ice, red);
    }
    const double t = seconds_since(start);
    return {ok && t < 120.0, fmt("final/initial loss:%s; %.1f s", os.str().c_str(), t)};
}

Verdict entropy_anchor() {
    bool ok = true;
    std::ostringstream os;
    for (const auto& scene : fixtures()) {
        const StageOne one = run_first_stage(scene.low, PipelineConfig{});
        const ImageTensor ms = max_channel(scene.low);
        const double gain = shannon_entropy(max_channel(one.r)) - shannon_entropy(ms);
        const double fidelity = mean_abs(max_channel(one.r), hist_equalize(ms));
        ok = ok && gain >= -0.05 && fidelity < 0.08;
        os << ' ' << scene.name << fmt("(dH %+.3f, fid %.4f)", gain, fidelity);
    }
    return {ok, "entropy change and HE fidelity:" + os.str()};
}

Verdict reconstruction() {
    bool ok = true;
    std::ostringstream os;
    for (const auto& scene : fixtures()) {
        const StageOne one = run_first_stage(scene.low, PipelineConfig{});
        const double err = mean_abs(scene.low, product(one.r, one.i));
        ok = ok && err < 0.05;
        os << ' ' << scene.name << fmt("(%.4f)", err);
    }
    return {ok, "mean|S - R o I|:" + os.str()};
}

// --- 6, 8 ------------------------------------------------------------------

struct Chart {
    ImageTensor clean, low;
    synthetic::ChartRegions regions;
};

Chart noisy_chart() {
    Chart c;
    c.clean = synthetic::test_chart(128, 192);
    c.low = synthetic::simulate_low_light(c.clean, 0.1, 30.0, 7);
    c.regions = synthetic::chart_regions(128, 192);
    return c;
}

Verdict denoising_gain() {
    const auto start = Clock::now();
    const Chart c = noisy_chart();
    const EnhancementResult res = enhance(c.low, PipelineConfig{});
    const ImageTensor he = equalized(c.low);
    const double gain = psnr(res.r_final, c.clean) - psnr(he, c.clean);
    const double ssim_final = ssim(res.r_final, c.clean), ssim_he = ssim(he, c.clean);
    const double t = seconds_since(start);
    return {gain >= 2.0 && ssim_final > ssim_he && t < 180.0,
            fmt("PSNR %.2f vs HE %.2f (gain %.2f dB), SSIM %.3f vs HE %.3f, %.1f s",
                psnr(res.r_final, c.clean), psnr(he, c.clean), gain, ssim_final, ssim_he, t)};
}

// Mean squared gradient of the max channel over the texture band.
double texture_energy(const ImageTensor& r, const synthetic::ChartRegions& g) {
    const GradientPair d = gradient(max_channel(r));
    double e = 0.0;
    int n = 0;
    for (int y = g.texture_row_begin; y < g.texture_row_end - 1; ++y) {
        for (int x = 0; x < r.width() - 1; ++x) {
            e += d.dx.at(y, x) * d.dx.at(y, x) + d.dy.at(y, x) * d.dy.at(y, x);
            ++n;
        }
    }
    return e / n;
}

// Mean step height of the max channel across the true edges of the edge band.
double edge_magnitude(const ImageTensor& r, const synthetic::ChartRegions& g) {
    const ImageTensor m = max_channel(r);
    double e = 0.0;
    int n = 0;
    for (int y = g.edge_row_begin; y < g.edge_row_end; ++y) {
        for (int x : g.edge_cols) {
            e += std::abs(m.at(y, x + 1) - m.at(y, x));
            ++n;
        }
    }
    return e / n;
}

Verdict ablation_direction() {
    const auto start = Clock::now();
    const Chart c = noisy_chart();
    const EnhancementResult base = enhance(c.low, PipelineConfig{});
    PipelineConfig no_w;
    no_w.ablations.drop_w = true;
    const EnhancementResult a = ablate(c.low, no_w);
    PipelineConfig no_wr;
    no_wr.ablations.drop_exp_wr_term = true;
    const EnhancementResult b = ablate(c.low, no_wr);

    const double tex_drop = 1.0 - texture_energy(a.r_final, c.regions) / texture_energy(base.r_final, c.regions);
    const double edge_base = edge_magnitude(base.r_final, c.regions);
    const double edge_ablated = edge_magnitude(b.r_final, c.regions);
    const double t = seconds_since(start);
    return {tex_drop >= 0.2 && edge_ablated < edge_base && t < 300.0,
            fmt("drop_W texture energy -%.1f%%; drop_exp_WR edge magnitude %.5f vs %.5f; %.1f s",
                100.0 * tex_drop, edge_ablated, edge_base, t)};
}

// --- 7 ---------------------------------------------------------------------

Verdict weight_separation() {
    const RedConfig cfg;
    const int h = 64, w = 64;
    const ImageTensor texture = synthetic::oscillating_texture(h, w, 0.5, 0.2);
    const ImageTensor step = synthetic::step_edge(h, w, 0.3, 0.4);

    auto interior_mean = [&](const ImageTensor& m) {
        double acc = 0.0;
        int n = 0;
        for (int y = 8; y < h - 8; ++y) {
            for (int x = 8; x < w - 8; ++x) {
                acc += m.at(y, x);
                ++n;
            }
        }
        return acc / n;
    };
    auto edge_mean = [&](const ImageTensor& m) {
        double acc = 0.0;
        for (int y = 0; y < h; ++y) acc += m.at(y, w / 2 - 1);
        return acc / h;
    };
    const double wi_tex = interior_mean(compute_weight_wi(texture, cfg).x);
    const double w_tex = interior_mean(compute_weight_w(texture, cfg).x);
    const double wi_edge = edge_mean(compute_weight_wi(step, cfg).x);
    const double w_edge = edge_mean(compute_weight_w(step, cfg).x);
    return {wi_tex < 0.3 * w_tex && wi_edge >= 0.5 && w_edge >= 0.5,
            fmt("texture: W_I %.3f vs W %.3f (ratio %.3f, need < 0.3); edge: W_I %.3f, W %.3f", wi_tex,
                w_tex, wi_tex / w_tex, wi_edge, w_edge)};
}

// --- 9 ---------------------------------------------------------------------

Verdict metric_oracles() {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> dim(11, 40);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int h = dim(rng), w = dim(rng), c = trial % 2 == 0 ? 3 : 1;
        const ImageTensor a = testing::random_image(h, w, c, rng);
        ImageTensor b = a;
        std::normal_distribution<double> noise(0.0, 0.02 * (trial % 5 + 1));
        for (double& v : b.data()) v += noise(rng);
        worst = std::max(worst, std::abs(ssim(a, b) - testing::oracle_ssim(a, b)));
        worst = std::max(worst, std::abs(psnr(a, b) - 10.0 * std::log10(1.0 / testing::oracle_mse(a, b))));
    }
    bool curve = true;
    for (double lambda3 : {1.0, 10.0, 100.0}) {
        auto slope = [&](double x) {
            Tape t;
            Var v = t.leaf(ImageTensor::scalar(x));
            t.backward(sum(sharpening_penalty(v, lambda3)));
            return v.grad().item();
        };
        const double x0 = 1.0 / lambda3;
        curve = curve && slope(0.5 * x0) > 0.0 && slope(0.99 * x0) > 0.0 && slope(1.01 * x0) < 0.0 &&
                slope(2.0 * x0) < 0.0 && std::abs(slope(x0)) < 1e-12;
    }
    return {worst < 1e-10 && curve,
            fmt("max deviation from naive oracles %.3g over 20 pairs; slope sign change at 1/lambda3: %s", worst,
                curve ? "yes" : "no")};
}

// --- 10 --------------------------------------------------------------------

Verdict desk_scale() {
    const ImageTensor s = synthetic::fixture_scenes(400, 600, 10)[5].low;
    auto start = Clock::now();
    const EnhancementResult a = enhance(s, PipelineConfig{});
    const double t = seconds_since(start);
    const EnhancementResult b = enhance(s, PipelineConfig{});
    const bool same = a.r_final == b.r_final && a.red_run.loss_trace == b.red_run.loss_trace &&
                      a.ice_run.loss_trace == b.ice_run.loss_trace;
    return {t <= 120.0 && same,
            fmt("400x600 in %.1f s (ice %d steps, red %d steps); repeat run bit-identical: %s", t,
                a.ice_run.step_count, a.red_run.step_count, same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    configure_allocator();
    const std::vector<std::function<Verdict()>> criteria = {
        gradient_correctness, stop_gradient_audit, loss_descent, entropy_anchor, reconstruction,
        denoising_gain,       weight_separation,   ablation_direction, metric_oracles, desk_scale};
    std::vector<int> selected;
    for (int a = 1; a < argc; ++a) selected.push_back(std::stoi(argv[a]));
    if (selected.empty()) {
        for (int k = 1; k <= 10; ++k) selected.push_back(k);
    }
    bool all = true;
    for (int k : selected) {
        if (k < 1 || k > 10) {
            std::cerr << "unknown criterion " << k << '\n';
            return 2;
        }
        const Verdict v = criteria[static_cast<std::size_t>(k - 1)]();
        std::cout << "criterion " << k << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
        all = all && v.pass;
    }
    return all ? 0 : 1;
}
