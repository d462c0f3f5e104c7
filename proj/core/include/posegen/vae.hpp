#pragma once

#include <functional>
#include <vector>

#include "posegen/nn/transformer.hpp"
#include "posegen/types.hpp"

namespace posegen::vae {

using nn::Mat;

struct VaeConfig {
    int data_dim = 8;      // D
    int seq_len = 64;      // T
    int latent_tokens = 2; // n
    int latent_dim = 32;   // d
    int width = 64;
    int blocks = 3; // transformer blocks on each side
    int heads = 4;
    double huber_delta = 1.0;
    double kl_weight = 1e-4; // beta; 0 recovers a pure Huber objective
    double lr = 1e-3;
    int batch_size = 8;
    long steps = 2000;
    long checkpoint_interval = 500;
    std::uint64_t seed = 1;

    void validate() const;
};

struct LatentDistribution {
    Mat mu;     // n x d
    Mat logvar; // n x d, clamped to [-10, 10]
};

/// z = mu + exp(0.5 * logvar) .* noise
Mat reparameterize(const LatentDistribution& dist, const Mat& noise);

/// Mean elementwise Huber loss: 0.5 e^2 for |e| <= delta, else delta(|e| - delta/2).
double huber_loss(const Mat& a, const Mat& b, double delta);

struct VaeLossParts {
    double total = 0;
    double recon = 0;
    double kl = 0;
};

/// total = huber(seq, recon, delta) + beta * KL(dist || N(0, I)),
/// KL averaged per latent element.
VaeLossParts vae_loss(const Mat& seq, const Mat& recon, const LatentDistribution& dist,
                      double beta, double delta);

/// Crops or edge-pads a T0 x D matrix to exactly `target_len` rows. When
/// cropping, `start` picks the window (callers choose center or random).
Mat fit_length(const Mat& x, int target_len, int start);
int center_crop_start(int length, int target_len);

/// Sequence VAE: transformer encoder over T pose tokens pooled into n latent
/// tokens by learned queries, mirrored decoder driven by T learned position
/// queries. Final projections start at zero, so a fresh model encodes
/// everything to mu = logvar = 0.
class SequenceVae {
public:
    explicit SequenceVae(const VaeConfig& cfg);

    const VaeConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return store_; }
    const nn::ParamStore& params() const { return store_; }

    struct EncodeVars {
        nn::Var mu;
        nn::Var logvar;
    };

    /// Tape-building forms; x is (batch*T) x D, z is (batch*n) x d.
    EncodeVars encode_on(nn::Binder& bind, nn::Var x, int batch) const;
    nn::Var decode_on(nn::Binder& bind, nn::Var z, int batch) const;

    /// Pure evaluation on a single sequence (normalized space).
    LatentDistribution encode(const Mat& x) const;
    Mat decode(const Mat& z) const;

    /// Flattened posterior means (row-major n*d per row) for a batch of
    /// normalized sequences; the feature space used by the metrics module.
    Mat encode_features(const std::vector<Mat>& seqs) const;

private:
    VaeConfig cfg_;
    nn::ParamStore store_;

    nn::Linear embed_;
    nn::Param* pos_enc_ = nullptr;
    std::vector<nn::TransformerBlock> enc_blocks_;
    nn::Param* latent_queries_ = nullptr;
    nn::CrossAttentionBlock enc_cross_;
    nn::Linear head_mu_, head_logvar_;

    nn::Linear z_embed_;
    nn::Param* dec_queries_ = nullptr;
    nn::CrossAttentionBlock dec_cross_;
    std::vector<nn::TransformerBlock> dec_blocks_;
    nn::Linear out_proj_;
};

struct VaeStepLoss {
    long step = 0;
    double total = 0;
    double recon = 0;
    double kl = 0;
};

struct VaeTrainResult {
    std::vector<VaeStepLoss> history;
    bool diverged = false;
    long diverged_at_step = -1;
};

/// Runs `steps` seeded optimization steps over normalized sequences (any
/// length; cropped/edge-padded to T per draw). `on_interval` fires every
/// `interval` steps (and on the final step) for checkpointing. On a
/// non-finite loss the step is not applied and training stops.
VaeTrainResult train_vae_steps(SequenceVae& model, nn::AdamOptimizer& opt, CounterRng& rng,
                               const std::vector<Mat>& sequences, long start_step,
                               long steps,
                               const std::function<void(long)>& on_interval = {},
                               long interval = 0);

struct TrainedVae {
    VaeConfig config;
    NormStats stats;
    VaeTrainResult result;
};

/// Convenience wrapper: computes normalization stats, trains from scratch.
/// The model is constructed by the caller so ownership stays simple.
TrainedVae train_vae(SequenceVae& model, const std::vector<PoseSequence>& dataset,
                     bool apply_normalization = true);

} // namespace posegen::vae
