#include "posegen/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "posegen/errors.hpp"
#include "posegen/normalize.hpp"

namespace posegen::pld {

void DenoiserConfig::validate() const {
    if (latent_tokens <= 0 || latent_dim <= 0 || d_model <= 0 || heads <= 0 ||
        text_dim <= 0 || audio_dim <= 0 || audio_tokens <= 0)
        throw ValidationError("denoiser config: all sizes must be positive");
    if (layers < 2 || layers % 2 != 0)
        throw ValidationError("denoiser config: layers must be even and >= 2");
    if (d_model % heads != 0)
        throw ValidationError("denoiser config: d_model must divide by heads");
    if (time_embed_dim <= 0 || time_embed_dim % 2 != 0)
        throw ValidationError("denoiser config: time embedding dim must be positive and even");
    if (p_uncond < 0 || p_uncond > 1)
        throw ValidationError("denoiser config: p_uncond must lie in [0, 1]");
}

Mat resample_rows(const Mat& x, int k) {
    if (x.rows() == 0) throw ValidationError("resample_rows: empty input");
    if (k <= 0) throw ValidationError("resample_rows: k must be positive");
    const long t = x.rows();
    Mat out(k, x.cols());
    if (t == 1) {
        for (int j = 0; j < k; ++j) out.row(j) = x.row(0);
        return out;
    }
    for (int j = 0; j < k; ++j) {
        const double pos = k == 1 ? 0.5 * (t - 1)
                                  : static_cast<double>(j) * (t - 1) / (k - 1);
        const long lo = static_cast<long>(std::floor(pos));
        const long hi = std::min(lo + 1, t - 1);
        const double f = pos - lo;
        out.row(j) = (1.0 - f) * x.row(lo) + f * x.row(hi);
    }
    return out;
}

ConditionTokens ConditionTokens::from_bundle(const ConditionBundle& c,
                                             const DenoiserConfig& cfg) {
    if (c.is_null) return null_condition();
    if (c.text_embedding.size() != cfg.text_dim)
        throw ValidationError("condition: text embedding has dim " +
                              std::to_string(c.text_embedding.size()) + ", model expects " +
                              std::to_string(cfg.text_dim));
    if (c.audio_features.cols() != cfg.audio_dim)
        throw ValidationError("condition: audio features have dim " +
                              std::to_string(c.audio_features.cols()) + ", model expects " +
                              std::to_string(cfg.audio_dim));
    if (c.audio_features.rows() < 1)
        throw ValidationError("condition: audio features need at least one frame");
    if (!c.text_embedding.allFinite() || !c.audio_features.allFinite())
        throw ValidationError("condition: non-finite values");
    ConditionTokens t;
    t.text = c.text_embedding.transpose().cast<double>();
    t.audio = resample_rows(c.audio_features.cast<double>(), cfg.audio_tokens);
    t.is_null = false;
    return t;
}

Denoiser::Denoiser(const DenoiserConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    CounterRng rng = CounterRng::derive(cfg_.seed, "denoiser_init");
    const long dm = cfg_.d_model;
    const long hidden = 2 * dm;

    lat_in_ = nn::Linear::create(store_, "lat_in", cfg_.latent_dim, dm, rng);
    time_proj_ = nn::Linear::create(store_, "time_proj", cfg_.time_embed_dim, dm, rng);
    text_proj_ = nn::Linear::create(store_, "text_proj", cfg_.text_dim, dm, rng);
    audio_proj_ = nn::Linear::create(store_, "audio_proj", cfg_.audio_dim, dm, rng);
    null_token_ = &store_.add_gaussian("null_token", 1, dm, rng, 0.02);
    pos_embed_ = &store_.add_gaussian("pos_embed", cfg_.token_count(), dm, rng, 0.02);
    for (int i = 0; i < cfg_.layers; ++i)
        blocks_.push_back(nn::TransformerBlock::create(store_, "block" + std::to_string(i),
                                                       dm, cfg_.heads, hidden, rng));
    for (int i = cfg_.layers / 2; i < cfg_.layers; ++i)
        skip_projs_.push_back(
            nn::Linear::create(store_, "skip" + std::to_string(i), 2 * dm, dm, rng));
    ln_final_ = nn::LayerNorm::create(store_, "ln_final", dm);
    // zero-init: a fresh denoiser predicts eps-hat = 0
    out_proj_ = nn::Linear::create(store_, "out", dm, cfg_.latent_dim, rng, true);
}

nn::Var Denoiser::forward_on(nn::Binder& bind, nn::Var z_t, const std::vector<int>& ts,
                             const std::vector<ConditionTokens>& conds) const {
    nn::Tape& t = bind.tape();
    const int batch = static_cast<int>(ts.size());
    const int n = cfg_.latent_tokens;
    const int ka = cfg_.audio_tokens;
    const int s_tokens = cfg_.token_count();
    if (batch <= 0 || conds.size() != ts.size())
        throw ValidationError("denoiser: ts/conds size mismatch");
    if (z_t.rows() != batch * n || z_t.cols() != cfg_.latent_dim)
        throw ValidationError("denoiser: z_t must be (batch*n) x d, got " +
                              std::to_string(z_t.rows()) + "x" + std::to_string(z_t.cols()));

    nn::Var lat_all = lat_in_.apply(bind, z_t);

    Mat time_rows(batch, cfg_.time_embed_dim);
    for (int i = 0; i < batch; ++i)
        time_rows.row(i) = nn::timestep_embedding(ts[i], cfg_.time_embed_dim);
    nn::Var time_all = time_proj_.apply(bind, t.leaf(std::move(time_rows)));

    // project the non-null payloads in one stacked pass each
    std::vector<int> payload_slot(batch, -1);
    int live = 0;
    for (int i = 0; i < batch; ++i)
        if (!conds[i].is_null) payload_slot[i] = live++;
    nn::Var text_all, audio_all;
    if (live > 0) {
        Mat text_stack(live, cfg_.text_dim);
        Mat audio_stack(static_cast<long>(live) * ka, cfg_.audio_dim);
        for (int i = 0; i < batch; ++i) {
            if (payload_slot[i] < 0) continue;
            text_stack.row(payload_slot[i]) = conds[i].text.row(0);
            audio_stack.middleRows(static_cast<long>(payload_slot[i]) * ka, ka) =
                conds[i].audio;
        }
        text_all = text_proj_.apply(bind, t.leaf(std::move(text_stack)));
        audio_all = audio_proj_.apply(bind, t.leaf(std::move(audio_stack)));
    }

    std::vector<nn::Var> items;
    items.reserve(batch);
    for (int i = 0; i < batch; ++i) {
        std::vector<nn::Var> parts;
        parts.push_back(t.slice_rows(lat_all, i * n, n));
        parts.push_back(t.slice_rows(time_all, i, 1));
        if (payload_slot[i] < 0) {
            parts.push_back(t.tile_rows(bind(*null_token_), 1 + ka));
        } else {
            parts.push_back(t.slice_rows(text_all, payload_slot[i], 1));
            parts.push_back(t.slice_rows(audio_all, payload_slot[i] * ka, ka));
        }
        items.push_back(t.concat_rows(parts));
    }
    nn::Var h = batch == 1 ? items.front() : t.concat_rows(items);
    h = t.add(h, t.tile_rows(bind(*pos_embed_), batch));

    std::vector<nn::Var> skips;
    for (int i = 0; i < cfg_.layers; ++i) {
        if (i >= cfg_.layers / 2) {
            const nn::Var& skip = skips[cfg_.layers - 1 - i];
            h = skip_projs_[i - cfg_.layers / 2].apply(bind, t.concat_cols({h, skip}));
        }
        h = blocks_[i].apply(bind, h, batch);
        if (i < cfg_.layers / 2) skips.push_back(h);
    }

    std::vector<nn::Var> outs;
    outs.reserve(batch);
    for (int i = 0; i < batch; ++i) outs.push_back(t.slice_rows(h, i * s_tokens, n));
    nn::Var pooled = batch == 1 ? outs.front() : t.concat_rows(outs);
    return out_proj_.apply(bind, ln_final_.apply(bind, pooled));
}

Mat Denoiser::forward(const Mat& z_t, int t, const ConditionTokens& cond) const {
    nn::Tape tape;
    nn::Binder bind(tape, false);
    return forward_on(bind, tape.leaf(z_t), {t}, {cond}).val();
}

Mat Denoiser::forward(const Mat& z_t, int t, const ConditionBundle& cond) const {
    return forward(z_t, t, ConditionTokens::from_bundle(cond, cfg_));
}

void SamplerConfig::validate(int t_diff) const {
    if (guidance < 0) throw ValidationError("sampler: guidance scale must be >= 0");
    if (steps < 0 || steps > t_diff)
        throw ValidationError("sampler: steps must lie in [0, t_diff]");
}

namespace {

std::vector<int> timestep_ladder(int t_diff, int steps) {
    std::vector<int> ts;
    if (steps <= 0 || steps >= t_diff) {
        for (int t = t_diff; t >= 1; --t) ts.push_back(t);
        return ts;
    }
    if (steps == 1) return {t_diff};
    for (int k = 0; k < steps; ++k) {
        const double pos = t_diff - static_cast<double>(k) * (t_diff - 1) / (steps - 1);
        const int t = std::max(1, static_cast<int>(std::lround(pos)));
        if (ts.empty() || t < ts.back()) ts.push_back(t);
    }
    return ts;
}

} // namespace

Mat sample_latent_with(const GuidedEpsFn& eps_fn, const DiffusionSchedule& schedule, int n,
                       int d, const SamplerConfig& cfg, const Mat* init) {
    cfg.validate(schedule.t_diff);
    CounterRng rng = CounterRng::derive(cfg.seed, "sampler");
    Mat z(n, d);
    if (init) {
        if (init->rows() != n || init->cols() != d)
            throw ValidationError("sampler: init latent shape mismatch");
        z = *init;
    } else {
        for (long i = 0; i < z.size(); ++i) z.data()[i] = rng.gaussian();
    }
    const std::vector<int> ladder = timestep_ladder(schedule.t_diff, cfg.steps);
    for (size_t k = 0; k < ladder.size(); ++k) {
        const int t_hi = ladder[k];
        const int t_lo = k + 1 < ladder.size() ? ladder[k + 1] : 0;
        const Mat eps_hat = eps_fn(z, t_hi);
        if (!eps_hat.allFinite())
            throw ComputeError("sampling produced non-finite eps at t=" + std::to_string(t_hi));
        const double abar_hi = schedule.alpha_bar_at(t_hi);
        const double abar_lo = schedule.alpha_bar_at(t_lo);
        const double alpha_eff = abar_hi / abar_lo;
        const double beta_eff = 1.0 - alpha_eff;
        z = (z - (beta_eff / std::sqrt(1.0 - abar_hi)) * eps_hat) / std::sqrt(alpha_eff);
        if (cfg.kind == SamplerConfig::Kind::ancestral && t_lo > 0) {
            const double sigma = std::sqrt(beta_eff);
            for (long i = 0; i < z.size(); ++i) z.data()[i] += sigma * rng.gaussian();
        }
        if (!z.allFinite())
            throw ComputeError("sampling state non-finite after t=" + std::to_string(t_hi));
    }
    return z;
}

Mat sample_latent(const Denoiser& model, const DiffusionSchedule& schedule,
                  const ConditionTokens& cond, const SamplerConfig& cfg, const Mat* init) {
    const ConditionTokens null_cond = ConditionTokens::null_condition();
    GuidedEpsFn fn;
    if (!cfg.use_cfg) {
        fn = [&](const Mat& z, int t) { return model.forward(z, t, cond); };
    } else if (cfg.guidance == 0.0) {
        // Eq. at s=0 collapses to the unconditional pass; run only that one.
        fn = [&](const Mat& z, int t) { return model.forward(z, t, null_cond); };
    } else {
        fn = [&](const Mat& z, int t) {
            const Mat eps_c = model.forward(z, t, cond);
            const Mat eps_u = model.forward(z, t, null_cond);
            return cfg_combine(eps_c, eps_u, cfg.guidance);
        };
    }
    return sample_latent_with(fn, schedule, model.config().latent_tokens,
                              model.config().latent_dim, cfg, init);
}

LatentDataset prepare_latents(const vae::SequenceVae& v,
                              const std::vector<Mat>& normalized_seqs,
                              const std::vector<ConditionBundle>& conds,
                              const DenoiserConfig& cfg, bool enable_scale,
                              bool sample_posterior, CounterRng* posterior_rng) {
    if (normalized_seqs.empty() || normalized_seqs.size() != conds.size())
        throw ValidationError("prepare_latents: dataset/condition size mismatch");
    if (v.config().latent_tokens != cfg.latent_tokens ||
        v.config().latent_dim != cfg.latent_dim)
        throw ValidationError("prepare_latents: vae latent shape does not match denoiser");
    if (sample_posterior && !posterior_rng)
        throw ValidationError("prepare_latents: sample_posterior needs an rng");
    LatentDataset data;
    data.z0.reserve(normalized_seqs.size());
    data.conds.reserve(conds.size());
    double sumsq = 0.0, sum = 0.0;
    long count = 0;
    for (size_t i = 0; i < normalized_seqs.size(); ++i) {
        const vae::LatentDistribution dist = v.encode(normalized_seqs[i]);
        Mat mu = dist.mu;
        if (sample_posterior) {
            Mat noise(mu.rows(), mu.cols());
            for (long j = 0; j < noise.size(); ++j) noise.data()[j] = posterior_rng->gaussian();
            mu = vae::reparameterize(dist, noise);
        }
        sum += mu.sum();
        sumsq += mu.squaredNorm();
        count += mu.size();
        data.z0.push_back(std::move(mu));
        data.conds.push_back(ConditionTokens::from_bundle(conds[i], cfg));
    }
    if (enable_scale) {
        const double mean = sum / count;
        const double var = sumsq / count - mean * mean;
        const double sd = std::sqrt(std::max(var, 0.0));
        data.latent_scale = sd > 1e-8 ? sd : 1.0;
        for (auto& z : data.z0) z /= data.latent_scale;
    }
    return data;
}

PldBatchDraw make_batch_draw(const LatentDataset& data, const DiffusionSchedule& schedule,
                             CounterRng& rng, int batch, double p_uncond) {
    if (data.z0.empty()) throw ValidationError("pld batch: empty latent dataset");
    const bool sample_indices = batch > 0;
    const int b = sample_indices ? batch : static_cast<int>(data.z0.size());
    const long n = data.z0.front().rows();
    const long d = data.z0.front().cols();
    PldBatchDraw draw;
    draw.ts.resize(b);
    draw.conds.resize(b);
    draw.z_t.resize(b * n, d);
    draw.eps.resize(b * n, d);
    for (int i = 0; i < b; ++i) {
        const size_t idx =
            sample_indices
                ? static_cast<size_t>(rng.uniform_int(0, static_cast<long>(data.z0.size()) - 1))
                : static_cast<size_t>(i);
        draw.ts[i] = static_cast<int>(rng.uniform_int(1, schedule.t_diff));
        const bool drop = rng.uniform() < p_uncond;
        draw.conds[i] = drop ? ConditionTokens::null_condition() : data.conds[idx];
        Mat eps(n, d);
        for (long j = 0; j < eps.size(); ++j) eps.data()[j] = rng.gaussian();
        draw.eps.middleRows(i * n, n) = eps;
        draw.z_t.middleRows(i * n, n) =
            forward_diffuse(data.z0[idx], draw.ts[i], eps, schedule);
    }
    return draw;
}

double pld_loss(const Denoiser& model, const vae::SequenceVae& v,
                const std::vector<std::pair<PoseSequence, ConditionBundle>>& batch,
                const DiffusionSchedule& schedule, CounterRng& rng) {
    if (batch.empty()) throw ValidationError("pld_loss: empty batch");
    std::vector<Mat> seqs;
    std::vector<ConditionBundle> conds;
    for (const auto& [pose, cond] : batch) {
        seqs.push_back(pose.values.cast<double>());
        conds.push_back(cond);
    }
    const LatentDataset data = prepare_latents(v, seqs, conds, model.config(), false);
    const PldBatchDraw draw =
        make_batch_draw(data, schedule, rng, 0, model.config().p_uncond);
    nn::Tape tape;
    nn::Binder bind(tape, false);
    nn::Var eps_hat = model.forward_on(bind, tape.leaf(draw.z_t), draw.ts, draw.conds);
    return (eps_hat.val() - draw.eps).squaredNorm() / static_cast<double>(draw.eps.size());
}

PldTrainResult train_pld_steps(Denoiser& model, nn::AdamOptimizer& opt, CounterRng& rng,
                               const LatentDataset& data, const DiffusionSchedule& schedule,
                               int batch_size, long start_step, long steps,
                               const std::function<void(long)>& on_interval,
                               long interval) {
    if (batch_size <= 0) throw ValidationError("train_pld: batch size must be positive");
    PldTrainResult result;
    result.history.reserve(static_cast<size_t>(steps));
    nn::Tape tape;
    for (long s = start_step; s < start_step + steps; ++s) {
        const PldBatchDraw draw =
            make_batch_draw(data, schedule, rng, batch_size, model.config().p_uncond);
        tape.clear();
        nn::Binder bind(tape, true);
        nn::Var eps_hat = model.forward_on(bind, tape.leaf(draw.z_t), draw.ts, draw.conds);
        nn::Var loss = tape.mse_against(eps_hat, draw.eps);
        const double value = loss.val()(0, 0);
        if (!std::isfinite(value)) {
            result.diverged = true;
            result.diverged_at_step = s;
            break;
        }
        model.params().zero_grads();
        tape.backward(loss);
        opt.step();
        result.history.push_back({s, value});
        if (on_interval && interval > 0 &&
            ((s + 1) % interval == 0 || s + 1 == start_step + steps))
            on_interval(s + 1);
    }
    return result;
}

std::vector<PoseSequence> generate_poses(const vae::SequenceVae& v, const Denoiser& model,
                                         const DiffusionSchedule& schedule,
                                         const std::vector<ConditionTokens>& conds,
                                         int count, const SamplerConfig& sampler,
                                         const NormStats& stats, double latent_scale,
                                         int fps) {
    if (count < 1) throw ValidationError("generate_poses: count must be >= 1");
    if (conds.size() != 1 && static_cast<int>(conds.size()) != count)
        throw ValidationError("generate_poses: need 1 or `count` conditions");
    std::vector<PoseSequence> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        SamplerConfig per = sampler;
        per.seed = CounterRng::derive(sampler.seed, static_cast<std::uint64_t>(i)).seed();
        const ConditionTokens& cond = conds.size() == 1 ? conds[0] : conds[i];
        Mat z = sample_latent(model, schedule, cond, per);
        z *= latent_scale;
        const Mat decoded = v.decode(z);
        PoseSequence seq;
        seq.fps = fps;
        seq.values = decoded.cast<float>();
        out.push_back(denormalize(seq, stats));
    }
    return out;
}

} // namespace posegen::pld
