#include "lowlight/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowlight/errors.hpp"
#include "lowlight/image_ops.hpp"

namespace lowlight {

const ImageTensor& Var::value() const {
    if (!tape_) throw InvalidInput("use of an unbound Var");
    return tape_->node(*this).value;
}

const ImageTensor& Var::grad() const {
    if (!tape_) throw InvalidInput("use of an unbound Var");
    auto& n = tape_->nodes_.at(id_);
    if (n.grad.empty()) n.grad = ImageTensor(n.value.shape());
    return n.grad;
}

bool Var::requires_grad() const {
    if (!tape_) throw InvalidInput("use of an unbound Var");
    return tape_->node(*this).requires_grad;
}

const Tape::Node& Tape::node(Var v) const {
    if (v.tape_ != this || v.id_ >= nodes_.size()) throw InvalidInput("Var does not belong to this tape");
    return nodes_[v.id_];
}

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(ImageTensor value) {
    Node n;
    n.op = OpKind::Leaf;
    n.requires_grad = true;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::constant(ImageTensor value) {
    Node n;
    n.op = OpKind::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

void Tape::clear() { nodes_.clear(); }

// Forward construction and backward rules for the op set.
struct TapeOps {
    static Tape& tape_of(Var a) {
        if (!a.tape_) throw InvalidInput("use of an unbound Var");
        return *a.tape_;
    }

    static Tape& tape_of(Var a, Var b, const char* op) {
        if (!a.tape_ || a.tape_ != b.tape_) {
            throw InvalidInput(std::string(op) + ": operands live on different tapes");
        }
        if (a.shape() != b.shape()) {
            const auto& sa = a.shape();
            const auto& sb = b.shape();
            throw InvalidInput(std::string(op) + ": shape mismatch " + std::to_string(sa.height) +
                               "x" + std::to_string(sa.width) + "x" + std::to_string(sa.channels) +
                               " vs " + std::to_string(sb.height) + "x" +
                               std::to_string(sb.width) + "x" + std::to_string(sb.channels));
        }
        return *a.tape_;
    }

    static Var record(Tape& t, OpKind op, ImageTensor value, Var a, Var b, bool binary,
                      double param = 0.0, int iparam = 0) {
        Tape::Node n;
        n.op = op;
        n.a = a.id_;
        n.b = binary ? b.id_ : a.id_;
        n.param = param;
        n.iparam = iparam;
        n.requires_grad = t.nodes_[a.id_].requires_grad ||
                          (binary && t.nodes_[b.id_].requires_grad);
        n.value = std::move(value);
        return t.push(std::move(n));
    }

    static Tape::Node& node(Tape& t, Var v) { return t.nodes_[v.id_]; }

    template <class F>
    static Var elementwise(Var a, Var b, OpKind op, const char* name, F f) {
        Tape& t = tape_of(a, b, name);
        const auto& va = t.nodes_[a.id_].value;
        const auto& vb = t.nodes_[b.id_].value;
        auto out = ImageTensor::uninitialized(va.shape());
        auto pa = va.data();
        auto pb = vb.data();
        auto po = out.data();
        for (std::size_t i = 0; i < po.size(); ++i) po[i] = f(pa[i], pb[i]);
        return record(t, op, std::move(out), a, b, true);
    }

    template <class F>
    static Var unary(Var a, OpKind op, F f, double param = 0.0) {
        Tape& t = tape_of(a);
        const auto& va = t.nodes_[a.id_].value;
        auto out = ImageTensor::uninitialized(va.shape());
        auto pa = va.data();
        auto po = out.data();
        for (std::size_t i = 0; i < po.size(); ++i) po[i] = f(pa[i]);
        return record(t, op, std::move(out), a, a, false, param);
    }

    static ImageTensor& grad_of(Tape& t, std::size_t id) {
        auto& n = t.nodes_[id];
        if (n.grad.empty()) n.grad = ImageTensor(n.value.shape());
        return n.grad;
    }

    // Adds contribution(i) to the gradient of node `id`, writing it directly
    // when this is the first contribution.
    template <class F>
    static void accumulate(Tape& t, std::size_t id, F contribution) {
        auto& n = t.nodes_[id];
        if (n.grad.empty()) {
            n.grad = ImageTensor::uninitialized(n.value.shape());
            auto dst = n.grad.data();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = contribution(i);
        } else {
            auto dst = n.grad.data();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += contribution(i);
        }
    }

    static void backward(Tape& t, std::size_t id) {
        // Copy what we need: growing parent grads never reallocates nodes_, but
        // keep references short-lived anyway.
        Tape::Node& n = t.nodes_[id];
        const auto g = n.grad.data();
        auto& na = t.nodes_[n.a];
        auto& nb = t.nodes_[n.b];
        const bool ga_on = na.requires_grad;
        const bool gb_on = nb.requires_grad;

        switch (n.op) {
            case OpKind::Leaf:
            case OpKind::Constant:
            case OpKind::Detach:
                return;
            case OpKind::Add: {
                if (ga_on) accumulate(t, n.a, [&](std::size_t i) { return g[i]; });
                if (gb_on) accumulate(t, n.b, [&](std::size_t i) { return g[i]; });
                return;
            }
            case OpKind::Sub: {
                if (ga_on) accumulate(t, n.a, [&](std::size_t i) { return g[i]; });
                if (gb_on) accumulate(t, n.b, [&](std::size_t i) { return -g[i]; });
                return;
            }
            case OpKind::Mul: {
                const auto va = na.value.data();
                const auto vb = nb.value.data();
                if (ga_on) accumulate(t, n.a, [&](std::size_t i) { return g[i] * vb[i]; });
                if (gb_on) accumulate(t, n.b, [&](std::size_t i) { return g[i] * va[i]; });
                return;
            }
            case OpKind::Div: {
                const auto vb = nb.value.data();
                const auto out = n.value.data();
                if (ga_on) accumulate(t, n.a, [&](std::size_t i) { return g[i] / vb[i]; });
                if (gb_on) {
                    accumulate(t, n.b, [&](std::size_t i) { return -g[i] * out[i] / vb[i]; });
                }
                return;
            }
            case OpKind::Exp: {
                if (!ga_on) return;
                const auto out = n.value.data();
                accumulate(t, n.a, [&](std::size_t i) { return g[i] * out[i]; });
                return;
            }
            case OpKind::Log: {
                if (!ga_on) return;
                const auto va = na.value.data();
                const double eps = n.param;
                accumulate(t, n.a, [&](std::size_t i) { return g[i] / (va[i] + eps); });
                return;
            }
            case OpKind::Abs: {
                if (!ga_on) return;
                const auto va = na.value.data();
                accumulate(t, n.a, [&](std::size_t i) {
                    return va[i] > 0.0 ? g[i] : (va[i] < 0.0 ? -g[i] : 0.0);
                });
                return;
            }
            case OpKind::Scale: {
                if (!ga_on) return;
                const double factor = n.param;
                accumulate(t, n.a, [&](std::size_t i) { return factor * g[i]; });
                return;
            }
            case OpKind::ChannelMax: {
                if (!ga_on) return;
                auto ga = grad_of(t, n.a).data();
                for (std::size_t p = 0; p < g.size(); ++p) ga[3 * p + n.argmax[p]] += g[p];
                return;
            }
            case OpKind::Broadcast: {
                if (!ga_on) return;
                const auto c = static_cast<std::size_t>(n.iparam);
                accumulate(t, n.a, [&](std::size_t p) {
                    double acc = 0.0;
                    for (std::size_t ch = 0; ch < c; ++ch) acc += g[p * c + ch];
                    return acc;
                });
                return;
            }
            case OpKind::DiffX: {
                if (!ga_on) return;
                const auto& shape = n.value.shape();
                auto ga = grad_of(t, n.a).data();
                const std::size_t c = shape.channels;
                const std::size_t row = static_cast<std::size_t>(shape.width) * c;
                for (int y = 0; y < shape.height; ++y) {
                    const std::size_t base = y * row;
                    for (std::size_t i = 0; i + c < row; ++i) {
                        ga[base + i + c] += g[base + i];
                        ga[base + i] -= g[base + i];
                    }
                }
                return;
            }
            case OpKind::DiffY: {
                if (!ga_on) return;
                const auto& shape = n.value.shape();
                auto ga = grad_of(t, n.a).data();
                const std::size_t row = static_cast<std::size_t>(shape.width) * shape.channels;
                for (std::size_t i = 0; i + row < g.size(); ++i) {
                    ga[i + row] += g[i];
                    ga[i] -= g[i];
                }
                return;
            }
            case OpKind::MeanFilter: {
                if (!ga_on) return;
                mean_filter_adjoint(n.grad, n.iparam, grad_of(t, n.a));
                return;
            }
            case OpKind::Sum: {
                if (!ga_on) return;
                const double share = g[0];
                accumulate(t, n.a, [&](std::size_t) { return share; });
                return;
            }
            case OpKind::Mean: {
                if (!ga_on) return;
                const double share = g[0] / static_cast<double>(na.value.size());
                accumulate(t, n.a, [&](std::size_t) { return share; });
                return;
            }
        }
    }

    // Transpose of the separable replicate-padded box filter: scatter each
    // output gradient back onto the clamped source positions.
    static void mean_filter_adjoint(const ImageTensor& g, int k, ImageTensor& ga) {
        const int h = g.height(), w = g.width(), c = g.channels();
        const int r = k / 2;
        const double norm = 1.0 / (static_cast<double>(k) * k);
        ImageTensor tmp(g.shape());
        for (int y = 0; y < h; ++y) {
            for (int o = -r; o <= r; ++o) {
                const int src = std::clamp(y + o, 0, h - 1);
                for (int x = 0; x < w; ++x) {
                    for (int ch = 0; ch < c; ++ch) tmp.at(src, x, ch) += g.at(y, x, ch) * norm;
                }
            }
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int o = -r; o <= r; ++o) {
                    const int src = std::clamp(x + o, 0, w - 1);
                    for (int ch = 0; ch < c; ++ch) ga.at(y, src, ch) += tmp.at(y, x, ch);
                }
            }
        }
    }
};

void Tape::backward(Var loss) {
    if (loss.tape_ != this || loss.id_ >= nodes_.size()) {
        throw InvalidInput("backward: loss does not belong to this tape");
    }
    if (!nodes_[loss.id_].value.is_scalar()) {
        throw InvalidInput("backward: loss must be a 1x1x1 scalar");
    }
    for (auto& n : nodes_) n.grad = ImageTensor();
    if (!nodes_[loss.id_].requires_grad) return;
    nodes_[loss.id_].grad = ImageTensor::scalar(1.0);
    for (std::size_t id = loss.id_ + 1; id-- > 0;) {
        const auto& n = nodes_[id];
        if (!n.requires_grad || n.grad.empty()) continue;
        TapeOps::backward(*this, id);
    }
}

Var add(Var a, Var b) {
    return TapeOps::elementwise(a, b, OpKind::Add, "add", [](double x, double y) { return x + y; });
}

Var sub(Var a, Var b) {
    return TapeOps::elementwise(a, b, OpKind::Sub, "sub", [](double x, double y) { return x - y; });
}

Var mul(Var a, Var b) {
    return TapeOps::elementwise(a, b, OpKind::Mul, "mul", [](double x, double y) { return x * y; });
}

Var div(Var a, Var b) {
    for (double v : b.value().data()) {
        if (v == 0.0) throw NumericDomainError("div: zero denominator");
    }
    return TapeOps::elementwise(a, b, OpKind::Div, "div", [](double x, double y) { return x / y; });
}

Var exp(Var a) {
    return TapeOps::unary(a, OpKind::Exp, [](double x) { return std::exp(x); });
}

Var log(Var a, double eps) {
    for (double v : a.value().data()) {
        if (!(v + eps > 0.0)) {
            throw NumericDomainError("log: argument " + std::to_string(v + eps) +
                                     " is not positive after stabilization");
        }
    }
    return TapeOps::unary(a, OpKind::Log, [eps](double x) { return std::log(x + eps); }, eps);
}

Var abs(Var a) {
    return TapeOps::unary(a, OpKind::Abs, [](double x) { return std::fabs(x); });
}

Var scale(Var a, double s) {
    return TapeOps::unary(a, OpKind::Scale, [s](double x) { return s * x; }, s);
}

Var channel_max(Var a) {
    Tape& t = TapeOps::tape_of(a);
    const ImageTensor& v = a.value();
    ImageTensor out = max_channel(v);
    std::vector<std::uint8_t> arg(out.size());
    auto src = v.data();
    for (std::size_t p = 0; p < arg.size(); ++p) {
        std::uint8_t best = 0;
        if (src[3 * p + 1] > src[3 * p + best]) best = 1;
        if (src[3 * p + 2] > src[3 * p + best]) best = 2;
        arg[p] = best;
    }
    Var r = TapeOps::record(t, OpKind::ChannelMax, std::move(out), a, a, false);
    TapeOps::node(t, r).argmax = std::move(arg);
    return r;
}

Var broadcast_channels(Var a, int channels) {
    Tape& t = TapeOps::tape_of(a);
    const ImageTensor& v = a.value();
    if (v.channels() != 1) throw InvalidInput("broadcast_channels: input must have one channel");
    if (channels < 1) throw InvalidInput("broadcast_channels: channels must be >= 1");
    auto out = ImageTensor::uninitialized({v.height(), v.width(), channels});
    auto src = v.data();
    auto dst = out.data();
    const auto c = static_cast<std::size_t>(channels);
    for (std::size_t p = 0; p < src.size(); ++p) {
        for (std::size_t ch = 0; ch < c; ++ch) dst[p * c + ch] = src[p];
    }
    return TapeOps::record(t, OpKind::Broadcast, std::move(out), a, a, false, 0.0, channels);
}

Var diff_x(Var a) {
    Tape& t = TapeOps::tape_of(a);
    return TapeOps::record(t, OpKind::DiffX, forward_diff_x(a.value()), a, a, false);
}

Var diff_y(Var a) {
    Tape& t = TapeOps::tape_of(a);
    return TapeOps::record(t, OpKind::DiffY, forward_diff_y(a.value()), a, a, false);
}

Var mean_filter(Var a, int k) {
    Tape& t = TapeOps::tape_of(a);
    return TapeOps::record(t, OpKind::MeanFilter, lowlight::mean_filter(a.value(), k), a, a, false,
                           0.0, k);
}

Var sum(Var a) {
    Tape& t = TapeOps::tape_of(a);
    double acc = 0.0;
    for (double v : a.value().data()) acc += v;
    return TapeOps::record(t, OpKind::Sum, ImageTensor::scalar(acc), a, a, false);
}

Var mean(Var a) {
    Tape& t = TapeOps::tape_of(a);
    double acc = 0.0;
    for (double v : a.value().data()) acc += v;
    return TapeOps::record(t, OpKind::Mean,
                           ImageTensor::scalar(acc / static_cast<double>(a.value().size())), a, a,
                           false);
}

Var detach(Var a) {
    Tape& t = TapeOps::tape_of(a);
    Var r = TapeOps::record(t, OpKind::Detach, a.value(), a, a, false);
    TapeOps::node(t, r).requires_grad = false;
    return r;
}

double grad_check(const ExprBuilder& build, const std::vector<ImageTensor>& points, double h) {
    if (!(h > 0.0)) throw InvalidInput("grad_check: step must be positive");
    std::vector<ImageTensor> analytic;
    {
        Tape tape;
        std::vector<Var> leaves;
        for (const auto& p : points) leaves.push_back(tape.leaf(p));
        Var loss = build(tape, leaves);
        tape.backward(loss);
        for (const auto& l : leaves) analytic.push_back(l.grad());
    }

    auto evaluate = [&](std::size_t which, std::size_t index, double value) {
        Tape tape;
        std::vector<Var> leaves;
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == which) {
                ImageTensor moved = points[j];
                moved[index] = value;
                leaves.push_back(tape.leaf(std::move(moved)));
            } else {
                leaves.push_back(tape.leaf(points[j]));
            }
        }
        return build(tape, leaves).value().item();
    };

    double worst = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        for (std::size_t i = 0; i < points[k].size(); ++i) {
            const double x = points[k][i];
            const double up = x + h;
            const double down = x - h;
            const double fd = (evaluate(k, i, up) - evaluate(k, i, down)) / (up - down);
            const double a = analytic[k][i];
            worst = std::max(worst, std::fabs(a - fd) / (std::fabs(a) + 1e-8));
        }
    }
    return worst;
}

}  // namespace lowlight
