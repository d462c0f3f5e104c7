#include "posegen/vae.hpp"

#include <cmath>

#include "posegen/errors.hpp"
#include "posegen/normalize.hpp"

namespace posegen::vae {

void VaeConfig::validate() const {
    if (data_dim <= 0 || seq_len < 2 || latent_tokens <= 0 || latent_dim <= 0 ||
        width <= 0 || blocks <= 0 || heads <= 0)
        throw ValidationError("vae config: all sizes must be positive (and T >= 2)");
    if (latent_tokens * latent_dim >= seq_len * data_dim)
        throw ValidationError("vae config: n*d must be smaller than T*D (got " +
                              std::to_string(latent_tokens * latent_dim) + " vs " +
                              std::to_string(seq_len * data_dim) + ")");
    if (width % heads != 0) throw ValidationError("vae config: width must divide by heads");
    if (!(huber_delta > 0)) throw ValidationError("vae config: huber delta must be > 0");
    if (kl_weight < 0) throw ValidationError("vae config: kl weight must be >= 0");
    if (lr < 0) throw ValidationError("vae config: learning rate must be >= 0");
    if (batch_size <= 0 || steps < 0)
        throw ValidationError("vae config: batch/steps out of range");
}

Mat reparameterize(const LatentDistribution& dist, const Mat& noise) {
    if (dist.mu.rows() != noise.rows() || dist.mu.cols() != noise.cols() ||
        dist.logvar.rows() != noise.rows() || dist.logvar.cols() != noise.cols())
        throw ValidationError("reparameterize: shape mismatch");
    return dist.mu.array() + (0.5 * dist.logvar.array()).exp() * noise.array();
}

double huber_loss(const Mat& a, const Mat& b, double delta) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("huber_loss: shape mismatch");
    if (!(delta > 0)) throw ValidationError("huber_loss: delta must be > 0");
    double acc = 0;
    for (long i = 0; i < a.size(); ++i) {
        const double e = std::abs(a.data()[i] - b.data()[i]);
        acc += e <= delta ? 0.5 * e * e : delta * (e - 0.5 * delta);
    }
    return acc / static_cast<double>(a.size());
}

VaeLossParts vae_loss(const Mat& seq, const Mat& recon, const LatentDistribution& dist,
                      double beta, double delta) {
    VaeLossParts parts;
    parts.recon = huber_loss(seq, recon, delta);
    parts.kl = 0.5 *
               (dist.logvar.array().exp() + dist.mu.array().square() - 1.0 -
                dist.logvar.array())
                   .sum() /
               static_cast<double>(dist.mu.size());
    parts.total = parts.recon + beta * parts.kl;
    return parts;
}

int center_crop_start(int length, int target_len) {
    return length <= target_len ? 0 : (length - target_len) / 2;
}

Mat fit_length(const Mat& x, int target_len, int start) {
    const int len = static_cast<int>(x.rows());
    if (len == target_len) return x;
    if (len > target_len) {
        if (start < 0 || start + target_len > len)
            throw ValidationError("fit_length: crop window out of range");
        return x.middleRows(start, target_len);
    }
    Mat out(target_len, x.cols());
    out.topRows(len) = x;
    for (int i = len; i < target_len; ++i) out.row(i) = x.row(len - 1); // edge pad
    return out;
}

SequenceVae::SequenceVae(const VaeConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    CounterRng rng = CounterRng::derive(cfg_.seed, "vae_init");
    const long w = cfg_.width;
    const long hidden = 2 * w;

    embed_ = nn::Linear::create(store_, "enc.embed", cfg_.data_dim, w, rng);
    pos_enc_ = &store_.add_gaussian("enc.pos", cfg_.seq_len, w, rng, 0.02);
    for (int i = 0; i < cfg_.blocks; ++i)
        enc_blocks_.push_back(nn::TransformerBlock::create(
            store_, "enc.block" + std::to_string(i), w, cfg_.heads, hidden, rng));
    latent_queries_ = &store_.add_gaussian("enc.queries", cfg_.latent_tokens, w, rng, 0.02);
    enc_cross_ = nn::CrossAttentionBlock::create(store_, "enc.cross", w, cfg_.heads, hidden, rng);
    // zero-init heads: a fresh model reports mu = logvar = 0 for any input
    head_mu_ = nn::Linear::create(store_, "enc.mu", w, cfg_.latent_dim, rng, true);
    head_logvar_ = nn::Linear::create(store_, "enc.logvar", w, cfg_.latent_dim, rng, true);

    z_embed_ = nn::Linear::create(store_, "dec.embed", cfg_.latent_dim, w, rng);
    dec_queries_ = &store_.add_gaussian("dec.queries", cfg_.seq_len, w, rng, 0.02);
    dec_cross_ = nn::CrossAttentionBlock::create(store_, "dec.cross", w, cfg_.heads, hidden, rng);
    for (int i = 0; i < cfg_.blocks; ++i)
        dec_blocks_.push_back(nn::TransformerBlock::create(
            store_, "dec.block" + std::to_string(i), w, cfg_.heads, hidden, rng));
    out_proj_ = nn::Linear::create(store_, "dec.out", w, cfg_.data_dim, rng, true);
}

SequenceVae::EncodeVars SequenceVae::encode_on(nn::Binder& bind, nn::Var x, int batch) const {
    nn::Tape& t = bind.tape();
    if (x.cols() != cfg_.data_dim || x.rows() != batch * cfg_.seq_len)
        throw ValidationError("vae encode: expected (batch*T) x D input, got " +
                              std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    nn::Var h = embed_.apply(bind, x);
    h = t.add(h, t.tile_rows(bind(*pos_enc_), batch));
    for (const auto& blk : enc_blocks_) h = blk.apply(bind, h, batch);
    nn::Var q = t.tile_rows(bind(*latent_queries_), batch);
    q = enc_cross_.apply(bind, q, h, batch);
    EncodeVars out;
    out.mu = head_mu_.apply(bind, q);
    out.logvar = t.clamp(head_logvar_.apply(bind, q), -10.0, 10.0);
    return out;
}

nn::Var SequenceVae::decode_on(nn::Binder& bind, nn::Var z, int batch) const {
    nn::Tape& t = bind.tape();
    if (z.cols() != cfg_.latent_dim || z.rows() != batch * cfg_.latent_tokens)
        throw ValidationError("vae decode: expected (batch*n) x d input, got " +
                              std::to_string(z.rows()) + "x" + std::to_string(z.cols()));
    nn::Var kv = z_embed_.apply(bind, z);
    nn::Var h = t.tile_rows(bind(*dec_queries_), batch);
    h = dec_cross_.apply(bind, h, kv, batch);
    for (const auto& blk : dec_blocks_) h = blk.apply(bind, h, batch);
    return out_proj_.apply(bind, h);
}

LatentDistribution SequenceVae::encode(const Mat& x) const {
    nn::Tape tape;
    nn::Binder bind(tape, false);
    Mat fitted = fit_length(x, cfg_.seq_len, center_crop_start(static_cast<int>(x.rows()),
                                                               cfg_.seq_len));
    EncodeVars v = encode_on(bind, tape.leaf(std::move(fitted)), 1);
    return LatentDistribution{v.mu.val(), v.logvar.val()};
}

Mat SequenceVae::decode(const Mat& z) const {
    nn::Tape tape;
    nn::Binder bind(tape, false);
    return decode_on(bind, tape.leaf(z), 1).val();
}

Mat SequenceVae::encode_features(const std::vector<Mat>& seqs) const {
    const long k = cfg_.latent_tokens * cfg_.latent_dim;
    Mat out(static_cast<long>(seqs.size()), k);
    for (size_t i = 0; i < seqs.size(); ++i) {
        const LatentDistribution d = encode(seqs[i]);
        out.row(static_cast<long>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(d.mu.data(), k);
    }
    return out;
}

VaeTrainResult train_vae_steps(SequenceVae& model, nn::AdamOptimizer& opt, CounterRng& rng,
                               const std::vector<Mat>& sequences, long start_step,
                               long steps,
                               const std::function<void(long)>& on_interval,
                               long interval) {
    if (sequences.empty()) throw ValidationError("train_vae: empty dataset");
    const VaeConfig& cfg = model.config();
    const int b = cfg.batch_size;
    const int t_len = cfg.seq_len;
    const int n = cfg.latent_tokens, d = cfg.latent_dim;

    VaeTrainResult result;
    result.history.reserve(static_cast<size_t>(steps));
    nn::Tape tape;
    for (long s = start_step; s < start_step + steps; ++s) {
        // assemble batch
        Mat x(b * t_len, cfg.data_dim);
        for (int i = 0; i < b; ++i) {
            const auto& seq =
                sequences[static_cast<size_t>(rng.uniform_int(0, static_cast<long>(sequences.size()) - 1))];
            int start = 0;
            if (seq.rows() > t_len)
                start = static_cast<int>(rng.uniform_int(0, seq.rows() - t_len));
            x.middleRows(i * t_len, t_len) = fit_length(seq, t_len, start);
        }
        Mat noise(b * n, d);
        for (long i = 0; i < noise.size(); ++i) noise.data()[i] = rng.gaussian();

        tape.clear();
        nn::Binder bind(tape, true);
        nn::Var xv = tape.leaf(x);
        auto enc = model.encode_on(bind, xv, b);
        nn::Var z = tape.add(enc.mu,
                             tape.hadamard(tape.exp(tape.scale(enc.logvar, 0.5)),
                                           tape.leaf(noise)));
        nn::Var recon = model.decode_on(bind, z, b);
        nn::Var recon_loss = tape.huber_against(recon, x, cfg.huber_delta);
        nn::Var kl = tape.kl_standard_normal(enc.mu, enc.logvar);
        nn::Var loss = tape.add(recon_loss, tape.scale(kl, cfg.kl_weight));

        VaeStepLoss rec;
        rec.step = s;
        rec.total = loss.val()(0, 0);
        rec.recon = recon_loss.val()(0, 0);
        rec.kl = kl.val()(0, 0);
        if (!std::isfinite(rec.total)) {
            result.diverged = true;
            result.diverged_at_step = s;
            break;
        }
        model.params().zero_grads();
        tape.backward(loss);
        opt.step();
        result.history.push_back(rec);
        if (on_interval && interval > 0 &&
            ((s + 1) % interval == 0 || s + 1 == start_step + steps))
            on_interval(s + 1);
    }
    return result;
}

TrainedVae train_vae(SequenceVae& model, const std::vector<PoseSequence>& dataset,
                     bool apply_normalization) {
    if (dataset.empty()) throw ValidationError("train_vae: empty dataset");
    TrainedVae out;
    out.config = model.config();
    if (apply_normalization) {
        out.stats = compute_norm_stats(dataset);
    } else {
        const int d = dataset.front().dim();
        out.stats.mean = VecD::Zero(d);
        out.stats.stddev = VecD::Ones(d);
        out.stats.degenerate.assign(d, false);
    }
    std::vector<Mat> seqs;
    seqs.reserve(dataset.size());
    for (const auto& s : dataset)
        seqs.push_back(normalize(s, out.stats).values.cast<double>());

    nn::AdamOptimizer opt(model.params(), {model.config().lr});
    CounterRng rng = CounterRng::derive(model.config().seed, "vae_train");
    out.result = train_vae_steps(model, opt, rng, seqs, 0, model.config().steps);
    return out;
}

} // namespace posegen::vae
