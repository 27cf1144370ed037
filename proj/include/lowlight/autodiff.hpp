#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lowlight/image.hpp"

// Reverse-mode differentiation over image-shaped tensors.
//
// A Tape records nodes in creation order; backward() walks them in reverse
// exactly once. Constants and detached nodes take part in the forward values
// but never receive or propagate gradient. Forward values are produced by the
// same image_ops functions the rest of the library uses, so a taped
// expression and its plain counterpart agree bit for bit.

namespace lowlight {

class Tape;
struct TapeOps;

/// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives
/// and has not been cleared.
class Var {
public:
    Var() = default;

    const ImageTensor& value() const;
    /// Accumulated gradient after Tape::backward (zeros if unreached).
    const ImageTensor& grad() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;

    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    friend struct TapeOps;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

enum class OpKind : std::uint8_t {
    Leaf,
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    Exp,
    Log,
    Abs,
    Scale,
    ChannelMax,
    Broadcast,
    DiffX,
    DiffY,
    MeanFilter,
    Sum,
    Mean,
    Detach,
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Differentiable input.
    Var leaf(ImageTensor value);
    /// Fixed input; never receives gradient.
    Var constant(ImageTensor value);

    /// Propagates d(loss)/d(node) to every node that requires gradient.
    /// Gradients from a previous call are discarded. Throws InvalidInput
    /// unless loss is a 1x1x1 node on this tape.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }
    OpKind op(Var v) const { return nodes_.at(v.id_).op; }

    /// Drops every node. Outstanding Vars become dangling.
    void clear();

private:
    friend class Var;
    friend struct TapeOps;

    struct Node {
        OpKind op = OpKind::Leaf;
        bool requires_grad = false;
        std::size_t a = 0;
        std::size_t b = 0;
        double param = 0.0;
        int iparam = 0;
        ImageTensor value;
        ImageTensor grad;
        std::vector<std::uint8_t> argmax;
    };

    Var push(Node node);
    const Node& node(Var v) const;

    std::vector<Node> nodes_;
};

// --- op set -----------------------------------------------------------------
// Binary ops require identical shapes (no broadcasting) and the same tape.

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var exp(Var a);
/// log(a + eps). Throws NumericDomainError if any a + eps <= 0.
Var log(Var a, double eps = 0.0);
/// Subgradient 0 at 0.
Var abs(Var a);
Var scale(Var a, double s);
/// 3 -> 1 channel maximum; gradient goes to the lowest-index maximal channel.
Var channel_max(Var a);
/// Repeats a single-channel tensor over `channels` channels.
Var broadcast_channels(Var a, int channels);
Var diff_x(Var a);
Var diff_y(Var a);
Var mean_filter(Var a, int k);
Var sum(Var a);
Var mean(Var a);
/// Same value, zero gradient.
Var detach(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

// --- finite-difference checking --------------------------------------------

/// Builds a scalar expression from leaves created for each point.
using ExprBuilder = std::function<Var(Tape&, std::span<const Var>)>;

/// Max over all coordinates of every point of
/// |analytic - central_difference| / (|analytic| + 1e-8).
double grad_check(const ExprBuilder& build, const std::vector<ImageTensor>& points,
                  double h = 1e-4);

}  // namespace lowlight
