#pragma once

#include <string>
#include <unordered_map>

#include "posegen/nn/params.hpp"
#include "posegen/nn/tape.hpp"

namespace posegen::nn {

/// Puts parameters onto a tape on first use: as trainable leaves (gradients
/// flow back into the store) or as constants (pure evaluation). One code path
/// serves both training and inference.
class Binder {
public:
    Binder(Tape& tape, bool trainable) : tape_(tape), trainable_(trainable) {}

    Var operator()(Param& p) {
        auto it = cache_.find(&p);
        if (it != cache_.end()) return it->second;
        Var v = trainable_ ? tape_.param(p.value, p.grad) : tape_.leaf(p.value);
        cache_.emplace(&p, v);
        return v;
    }

    Tape& tape() { return tape_; }

private:
    Tape& tape_;
    bool trainable_;
    std::unordered_map<const Param*, Var> cache_;
};

struct Linear {
    Param* w = nullptr; // in x out
    Param* b = nullptr; // 1 x out

    static Linear create(ParamStore& store, const std::string& name, long in, long out,
                         CounterRng& rng, bool zero_init = false);

    Var apply(Binder& bind, Var x) const {
        Tape& t = bind.tape();
        return t.add_row_broadcast(t.matmul(x, bind(*w)), bind(*b));
    }
};

struct LayerNorm {
    Param* gain = nullptr;
    Param* bias = nullptr;

    static LayerNorm create(ParamStore& store, const std::string& name, long dim);

    Var apply(Binder& bind, Var x) const {
        return bind.tape().layer_norm(x, bind(*gain), bind(*bias));
    }
};

/// Multi-head scaled dot-product attention over stacked sequences: inputs
/// hold `batch` blocks of rows and attention runs within each block.
struct MultiHeadAttention {
    Linear wq, wk, wv, wo;
    int heads = 1;

    static MultiHeadAttention create(ParamStore& store, const std::string& name, long dim,
                                     int heads, CounterRng& rng);

    /// q_in: (batch*Nq) x dim, kv_in: (batch*Nk) x dim.
    Var apply(Binder& bind, Var q_in, Var kv_in, int batch) const;
};

/// Pre-norm transformer block: x += attn(ln1(x)); x += mlp(ln2(x)).
struct TransformerBlock {
    LayerNorm ln1, ln2;
    MultiHeadAttention attn;
    Linear fc1, fc2; // mlp with gelu

    static TransformerBlock create(ParamStore& store, const std::string& name, long dim,
                                   int heads, long mlp_hidden, CounterRng& rng);

    Var apply(Binder& bind, Var x, int batch) const;
};

/// Pre-norm cross-attention block: q += attn(ln_q(q), ln_kv(kv)); q += mlp(ln2(q)).
struct CrossAttentionBlock {
    LayerNorm ln_q, ln_kv, ln2;
    MultiHeadAttention attn;
    Linear fc1, fc2;

    static CrossAttentionBlock create(ParamStore& store, const std::string& name, long dim,
                                      int heads, long mlp_hidden, CounterRng& rng);

    Var apply(Binder& bind, Var q, Var kv, int batch) const;
};

/// Sinusoidal embedding of an integer timestep, 1 x dim.
Mat timestep_embedding(int t, int dim);

} // namespace posegen::nn
