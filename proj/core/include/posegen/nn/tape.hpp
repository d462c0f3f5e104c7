#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "posegen/mat.hpp"

namespace posegen::nn {

using Mat = MatD;

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid until Tape::clear().
struct Var {
    Tape* tape = nullptr;
    int idx = -1;

    const Mat& val() const;
    int rows() const { return static_cast<int>(val().rows()); }
    int cols() const { return static_cast<int>(val().cols()); }
};

/// Reverse-mode autodiff over matrices. Single-threaded; nodes are recorded
/// in execution order and backward() replays them in reverse, which keeps
/// every reduction order fixed and training bit-deterministic.
class Tape {
public:
    /// Constant input; never receives gradient.
    Var leaf(Mat value);

    /// Trainable leaf: value is copied onto the tape, and backward()
    /// accumulates the node gradient into `grad_sink` (+=).
    Var param(const Mat& value, Mat& grad_sink);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double s);
    Var hadamard(Var a, Var b);
    Var matmul(Var a, Var b);
    Var transpose(Var a);
    /// a (R x C) plus a 1 x C bias row broadcast over rows.
    Var add_row_broadcast(Var a, Var bias_row);
    Var slice_rows(Var a, int start, int count);
    Var slice_cols(Var a, int start, int count);
    /// Vertically repeats the whole block `count` times; backward sums over
    /// the repeats.
    Var tile_rows(Var a, int count);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    /// Row-wise layer norm with affine gain/bias (both 1 x C).
    Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
    Var softmax_rows(Var a);
    /// Fused scaled dot-product attention. q is (batch*Nq) x dim, k and v are
    /// (batch*Nk) x dim, dim divisible by heads; attention runs per batch
    /// block and head with scores scaled by 1/sqrt(dim/heads). One tape node
    /// for the whole thing; the composed-primitive equivalent exists only in
    /// tests as its oracle.
    Var attention_heads(Var q, Var k, Var v, int heads, int batch);
    Var gelu(Var a);
    Var exp(Var a);
    /// Pass-through gradient inside [lo, hi], zero outside.
    Var clamp(Var a, double lo, double hi);
    Var mean_all(Var a); // 1 x 1

    /// Mean elementwise Huber loss of (pred - target). 1 x 1.
    Var huber_against(Var pred, const Mat& target, double delta);
    /// Mean squared error against a constant target. 1 x 1.
    Var mse_against(Var pred, const Mat& target);
    /// KL(N(mu, exp(logvar)) || N(0, I)) averaged per element:
    /// 0.5 * sum(exp(lv) + mu^2 - 1 - lv) / numel. 1 x 1.
    Var kl_standard_normal(Var mu, Var logvar);

    /// Runs reverse accumulation from `loss` (must be 1 x 1).
    void backward(Var loss);

    void clear();
    size_t size() const { return nodes_.size(); }

    const Mat& val(Var v) const { return nodes_[v.idx].val; }
    const Mat& grad(Var v) const { return nodes_[v.idx].grad; }

private:
    struct Node {
        Mat val;
        Mat grad;
        std::function<void(Tape&)> back; // empty for constants
        bool needs_grad = false;
    };

    friend struct Var;

    Var push(Mat value, bool needs_grad, std::function<void(Tape&)> back);
    Mat& grad_ref(int idx) { return nodes_[idx].grad; }
    bool needs(Var v) const { return nodes_[v.idx].needs_grad; }

    std::deque<Node> nodes_;
};

} // namespace posegen::nn
