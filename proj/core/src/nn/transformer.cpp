#include "posegen/nn/transformer.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen::nn {

Linear Linear::create(ParamStore& store, const std::string& name, long in, long out,
                      CounterRng& rng, bool zero_init) {
    Linear l;
    if (zero_init)
        l.w = &store.add_zeros(name + ".w", in, out);
    else
        l.w = &store.add_xavier(name + ".w", in, out, rng);
    l.b = &store.add_zeros(name + ".b", 1, out);
    return l;
}

LayerNorm LayerNorm::create(ParamStore& store, const std::string& name, long dim) {
    LayerNorm ln;
    ln.gain = &store.add(name + ".gain", 1, dim);
    ln.gain->value.setOnes();
    ln.bias = &store.add_zeros(name + ".bias", 1, dim);
    return ln;
}

MultiHeadAttention MultiHeadAttention::create(ParamStore& store, const std::string& name,
                                              long dim, int heads, CounterRng& rng) {
    if (heads <= 0 || dim % heads != 0)
        throw ValidationError("attention: dim must be divisible by heads");
    MultiHeadAttention a;
    a.heads = heads;
    a.wq = Linear::create(store, name + ".wq", dim, dim, rng);
    a.wk = Linear::create(store, name + ".wk", dim, dim, rng);
    a.wv = Linear::create(store, name + ".wv", dim, dim, rng);
    a.wo = Linear::create(store, name + ".wo", dim, dim, rng);
    return a;
}

Var MultiHeadAttention::apply(Binder& bind, Var q_in, Var kv_in, int batch) const {
    Tape& t = bind.tape();
    Var q = wq.apply(bind, q_in);
    Var k = wk.apply(bind, kv_in);
    Var v = wv.apply(bind, kv_in);
    return wo.apply(bind, t.attention_heads(q, k, v, heads, batch));
}

TransformerBlock TransformerBlock::create(ParamStore& store, const std::string& name,
                                          long dim, int heads, long mlp_hidden,
                                          CounterRng& rng) {
    TransformerBlock blk;
    blk.ln1 = LayerNorm::create(store, name + ".ln1", dim);
    blk.ln2 = LayerNorm::create(store, name + ".ln2", dim);
    blk.attn = MultiHeadAttention::create(store, name + ".attn", dim, heads, rng);
    blk.fc1 = Linear::create(store, name + ".fc1", dim, mlp_hidden, rng);
    blk.fc2 = Linear::create(store, name + ".fc2", mlp_hidden, dim, rng);
    return blk;
}

Var TransformerBlock::apply(Binder& bind, Var x, int batch) const {
    Tape& t = bind.tape();
    Var n1 = ln1.apply(bind, x);
    Var h = t.add(x, attn.apply(bind, n1, n1, batch));
    Var m = fc2.apply(bind, t.gelu(fc1.apply(bind, ln2.apply(bind, h))));
    return t.add(h, m);
}

CrossAttentionBlock CrossAttentionBlock::create(ParamStore& store, const std::string& name,
                                                long dim, int heads, long mlp_hidden,
                                                CounterRng& rng) {
    CrossAttentionBlock blk;
    blk.ln_q = LayerNorm::create(store, name + ".lnq", dim);
    blk.ln_kv = LayerNorm::create(store, name + ".lnkv", dim);
    blk.ln2 = LayerNorm::create(store, name + ".ln2", dim);
    blk.attn = MultiHeadAttention::create(store, name + ".attn", dim, heads, rng);
    blk.fc1 = Linear::create(store, name + ".fc1", dim, mlp_hidden, rng);
    blk.fc2 = Linear::create(store, name + ".fc2", mlp_hidden, dim, rng);
    return blk;
}

Var CrossAttentionBlock::apply(Binder& bind, Var q, Var kv, int batch) const {
    Tape& t = bind.tape();
    Var h = t.add(q, attn.apply(bind, ln_q.apply(bind, q), ln_kv.apply(bind, kv), batch));
    Var m = fc2.apply(bind, t.gelu(fc1.apply(bind, ln2.apply(bind, h))));
    return t.add(h, m);
}

Mat timestep_embedding(int t, int dim) {
    if (dim % 2 != 0) throw ValidationError("timestep embedding dim must be even");
    Mat e(1, dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / half);
        e(0, 2 * i) = std::sin(t * freq);
        e(0, 2 * i + 1) = std::cos(t * freq);
    }
    return e;
}

} // namespace posegen::nn
