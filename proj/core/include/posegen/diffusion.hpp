#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "posegen/nn/transformer.hpp"
#include "posegen/schedule.hpp"
#include "posegen/types.hpp"
#include "posegen/vae.hpp"

namespace posegen::pld {

struct DenoiserConfig {
    int latent_tokens = 2; // n
    int latent_dim = 32;   // d
    int d_model = 64;
    int layers = 4; // even; layer i's output feeds layer (layers-1-i) via a
                    // concat+projection long skip
    int heads = 4;
    int time_embed_dim = 64;
    int text_dim = 512;
    int audio_dim = 768;
    int audio_tokens = 8; // k_a
    double p_uncond = 0.1;
    std::uint64_t seed = 2;

    void validate() const;
    int token_count() const { return latent_tokens + 2 + audio_tokens; }
};

/// Linear time interpolation of the rows of x down/up to k rows.
Mat resample_rows(const Mat& x, int k);

/// A condition reduced to fixed-size raw payloads: 1 text row and k_a audio
/// rows, or the null flag. Projection into model space happens inside the
/// denoiser (those projections are trainable).
struct ConditionTokens {
    Mat text;  // 1 x text_dim
    Mat audio; // k_a x audio_dim
    bool is_null = false;

    static ConditionTokens from_bundle(const ConditionBundle& c, const DenoiserConfig& cfg);
    static ConditionTokens null_condition() {
        ConditionTokens t;
        t.is_null = true;
        return t;
    }
};

/// Transformer denoiser with long skip connections. Token stream per item:
/// [n latent tokens | timestep token | text token | k_a audio tokens]; a null
/// condition replaces the text and audio slots with the learned null token.
class Denoiser {
public:
    explicit Denoiser(const DenoiserConfig& cfg);

    const DenoiserConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return store_; }
    const nn::ParamStore& params() const { return store_; }

    /// Batched tape form. z_t is (batch*n) x d; ts and conds give one entry
    /// per item. Returns stacked eps-hat of shape (batch*n) x d.
    nn::Var forward_on(nn::Binder& bind, nn::Var z_t, const std::vector<int>& ts,
                       const std::vector<ConditionTokens>& conds) const;

    /// Pure single-item evaluation.
    Mat forward(const Mat& z_t, int t, const ConditionTokens& cond) const;
    Mat forward(const Mat& z_t, int t, const ConditionBundle& cond) const;

private:
    DenoiserConfig cfg_;
    nn::ParamStore store_;

    nn::Linear lat_in_;
    nn::Linear time_proj_;
    nn::Linear text_proj_;
    nn::Linear audio_proj_;
    nn::Param* null_token_ = nullptr;
    nn::Param* pos_embed_ = nullptr;
    std::vector<nn::TransformerBlock> blocks_;
    std::vector<nn::Linear> skip_projs_; // consumed by blocks layers/2 .. layers-1
    nn::LayerNorm ln_final_;
    nn::Linear out_proj_;
};

struct SamplerConfig {
    enum class Kind { ancestral, deterministic };

    double guidance = 7.5; // s
    Kind kind = Kind::ancestral;
    int steps = 0; // 0 means t_diff
    std::uint64_t seed = 3;
    bool use_cfg = true; // false runs the conditional-only trajectory

    void validate(int t_diff) const;
};

/// eps-prediction already resolved for guidance; z and t are the only inputs.
using GuidedEpsFn = std::function<Mat(const Mat& z, int t)>;

/// Core ancestral/deterministic sampling loop. Draws z_T from the rng unless
/// `init` is given, then walks the (possibly strided) timestep ladder with
///   z <- (z - beta_eff/sqrt(1-abar_hi) * eps) / sqrt(abar_hi/abar_lo) + sigma*xi,
/// sigma = sqrt(beta_eff) for the ancestral kind (0 on the final step).
/// RNG consumption is independent of how eps is computed, so guided and
/// conditional-only runs see identical noise streams.
Mat sample_latent_with(const GuidedEpsFn& eps_fn, const DiffusionSchedule& schedule, int n,
                       int d, const SamplerConfig& cfg, const Mat* init = nullptr);

/// Classifier-free-guided sampling: two denoiser passes per step combined as
/// s*eps_cond + (1-s)*eps_uncond (single pass when s == 0 or use_cfg is off).
Mat sample_latent(const Denoiser& model, const DiffusionSchedule& schedule,
                  const ConditionTokens& cond, const SamplerConfig& cfg,
                  const Mat* init = nullptr);

/// VAE posterior means paired with prepared condition tokens, ready for
/// diffusion training. When scaling is enabled the latents are divided by the
/// population std of all their elements (stored in latent_scale) so the
/// diffusion target is unit-ish scale regardless of how the VAE spread its
/// codes.
struct LatentDataset {
    std::vector<Mat> z0; // n x d each, already scaled
    std::vector<ConditionTokens> conds;
    double latent_scale = 1.0;
};

/// sample_posterior draws z0 = mu + sigma*xi from `posterior_rng` instead of
/// using the posterior mean.
LatentDataset prepare_latents(const vae::SequenceVae& v,
                              const std::vector<Mat>& normalized_seqs,
                              const std::vector<ConditionBundle>& conds,
                              const DenoiserConfig& cfg, bool enable_scale,
                              bool sample_posterior = false,
                              CounterRng* posterior_rng = nullptr);

/// One training draw: per item a timestep, a dropout-resolved condition, the
/// noise and the noised latent.
struct PldBatchDraw {
    std::vector<int> ts;
    std::vector<ConditionTokens> conds;
    Mat z_t;  // (batch*n) x d
    Mat eps;  // (batch*n) x d
};

/// batch > 0 samples `batch` item indices with replacement; batch == 0 walks
/// the whole dataset once in order. Per item the rng supplies (index,) t,
/// the dropout coin and the noise, in that order.
PldBatchDraw make_batch_draw(const LatentDataset& data, const DiffusionSchedule& schedule,
                             CounterRng& rng, int batch, double p_uncond);

/// Spec-facing loss: mean squared error between eps and the model prediction
/// over one freshly drawn batch. Uses raw (unscaled) posterior means.
double pld_loss(const Denoiser& model, const vae::SequenceVae& v,
                const std::vector<std::pair<PoseSequence, ConditionBundle>>& batch,
                const DiffusionSchedule& schedule, CounterRng& rng);

struct PldStepLoss {
    long step = 0;
    double loss = 0;
};

struct PldTrainResult {
    std::vector<PldStepLoss> history;
    bool diverged = false;
    long diverged_at_step = -1;
};

PldTrainResult train_pld_steps(Denoiser& model, nn::AdamOptimizer& opt, CounterRng& rng,
                               const LatentDataset& data, const DiffusionSchedule& schedule,
                               int batch_size, long start_step, long steps,
                               const std::function<void(long)>& on_interval = {},
                               long interval = 0);

/// Full generation path: sample a latent per request with a per-sample
/// derived seed, rescale, decode, denormalize.
std::vector<PoseSequence> generate_poses(const vae::SequenceVae& v, const Denoiser& model,
                                         const DiffusionSchedule& schedule,
                                         const std::vector<ConditionTokens>& conds,
                                         int count, const SamplerConfig& sampler,
                                         const NormStats& stats, double latent_scale,
                                         int fps);

} // namespace posegen::pld
