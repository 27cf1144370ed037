#include "lowlight/gradient_suite.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "lowlight/autodiff.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/ice_objective.hpp"
#include "lowlight/red_objective.hpp"

namespace lowlight {

namespace {

// Channel values drawn from three disjoint bands in a random order, so the
// per-pixel maximum is separated from the runner-up by at least the band gap.
void banded_pixel(ImageTensor& img, int y, int x, double lo, double margin, std::mt19937_64& rng) {
    std::array<int, 3> order{0, 1, 2};
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> u(0.0, margin);
    for (int c = 0; c < 3; ++c) img.at(y, x, order[c]) = lo + 2.0 * margin * c + u(rng);
}

double offset_away(double v, double margin, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double delta = margin + 2.0 * margin * u(rng);
    return (u(rng) < 0.5 && v - delta >= 0.0) ? v - delta : v + delta;
}

ImageTensor random_tensor(int h, int w, int c, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    ImageTensor t(h, w, c);
    for (double& v : t.data()) v = u(rng);
    return t;
}

// Random values with a random sign, bounded away from zero.
ImageTensor signed_tensor(int h, int w, int c, double margin, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ImageTensor t(h, w, c);
    for (double& v : t.data()) v = (u(rng) < 0.5 ? -1.0 : 1.0) * (margin + u(rng));
    return t;
}

}  // namespace

KinkFreePoint kink_free_point(int height, int width, std::uint64_t seed, double margin) {
    if (height < 2 || width < 2) throw InvalidInput("kink_free_point: need at least 2x2");
    if (!(margin > 0.0 && margin <= 0.05)) throw InvalidInput("kink_free_point: margin must be in (0, 0.05]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    KinkFreePoint p;
    p.r = ImageTensor(height, width, 3);
    p.i = ImageTensor(height, width, 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const bool high = (x + y) % 2 == 0;
            // Bands span [lo, lo + 5 * margin]; low and high pixels are 0.2+ apart.
            banded_pixel(p.r, y, x, high ? 0.55 : 0.1, margin, rng);
            p.i.at(y, x) = (high ? 0.2 : 0.6) + 0.2 * u(rng);
        }
    }
    p.s = ImageTensor(p.r.shape());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) p.s.at(y, x, c) = offset_away(p.r.at(y, x, c) * p.i.at(y, x), margin, rng);
        }
    }
    p.he_target = ImageTensor(height, width, 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double m = std::max({p.r.at(y, x, 0), p.r.at(y, x, 1), p.r.at(y, x, 2)});
            p.he_target.at(y, x) = offset_away(m, margin, rng);
        }
    }
    p.target_max = random_tensor(height, width, 1, 0.1, 0.9, rng);
    return p;
}

std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed, int height, int width,
                                                bool primitives, double h) {
    std::mt19937_64 rng(seed);
    std::vector<GradCheckResult> out;
    const int H = height, W = width;

    if (primitives) {
        // Each primitive feeds a weighted sum so the upstream gradient is not uniform.
        const ImageTensor weights3 = random_tensor(H, W, 3, -1.0, 1.0, rng);
        const ImageTensor weights1 = random_tensor(H, W, 1, -1.0, 1.0, rng);
        auto weighted = [&](Var v) {
            if (v.value().is_scalar()) return v;
            Tape& t = *v.tape();
            return sum(mul(v, t.constant(v.shape().channels == 3 ? weights3 : weights1)));
        };
        const ImageTensor a = random_tensor(H, W, 3, 0.2, 0.9, rng);
        const ImageTensor b = random_tensor(H, W, 3, 0.5, 1.5, rng);
        const ImageTensor sgn = signed_tensor(H, W, 3, 0.05, rng);
        const ImageTensor gray = random_tensor(H, W, 1, 0.1, 0.9, rng);
        KinkFreePoint kp = kink_free_point(H, W, seed ^ 0x5bd1e995ULL);

        auto unary = [&](const char* name, const ImageTensor& x, auto op) {
            out.push_back({name, grad_check([&](Tape&, std::span<const Var> v) { return weighted(op(v[0])); },
                                            {x}, h)});
        };
        auto binary = [&](const char* name, auto op) {
            out.push_back({name, grad_check([&](Tape&, std::span<const Var> v) { return weighted(op(v[0], v[1])); },
                                            {a, b}, h)});
        };
        binary("add", [](Var x, Var y) { return add(x, y); });
        binary("sub", [](Var x, Var y) { return sub(x, y); });
        binary("mul", [](Var x, Var y) { return mul(x, y); });
        binary("div", [](Var x, Var y) { return div(x, y); });
        unary("exp", a, [](Var x) { return exp(x); });
        unary("log", a, [](Var x) { return log(x, 1e-4); });
        unary("abs", sgn, [](Var x) { return abs(x); });
        unary("scale", a, [](Var x) { return scale(x, -2.5); });
        unary("channel_max", kp.r, [](Var x) { return channel_max(x); });
        unary("broadcast_channels", gray, [](Var x) { return broadcast_channels(x, 3); });
        unary("diff_x", a, [](Var x) { return diff_x(x); });
        unary("diff_y", a, [](Var x) { return diff_y(x); });
        unary("mean_filter", a, [](Var x) { return mean_filter(x, 3); });
        unary("mean", a, [](Var x) { return mul(mean(x), mean(x)); });
        unary("sum", a, [](Var x) { return mul(sum(x), sum(x)); });
        unary("sharpening_penalty", a, [](Var x) { return sharpening_penalty(x, 3.0); });
        unary("exp_log_chain", a, [](Var x) { return exp(scale(log(x, 0.0), 0.5)); });
    }

    const KinkFreePoint p = kink_free_point(H, W, seed);

    IceProblem ice;
    ice.s = p.s;
    ice.he_target = p.he_target;
    ice.config = IceConfig{};
    const StructureWeights sw = ice_structure_weights(p.r, ice.config.lambda3);
    out.push_back({"ice_total", grad_check([&](Tape&, std::span<const Var> v) {
                       return ice_total(v[0], v[1], ice, sw).total;
                   }, {p.r, p.i}, h)});

    const RedProblem red = RedProblem::make(p.s, p.target_max);
    const RedFrozen frozen = red_freeze(p.r, p.i, red.config, red.ablations);
    out.push_back({"red_total", grad_check([&](Tape&, std::span<const Var> v) {
                       return red_total(v[0], v[1], red, frozen).total;
                   }, {p.r, p.i}, h)});
    return out;
}

}  // namespace lowlight
