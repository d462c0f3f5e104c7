#pragma once

#include <filesystem>
#include <memory>

#include "posegen/diffusion.hpp"
#include "posegen/vae.hpp"

namespace posegen {

/// Training position stored with a checkpoint; restoring it makes a resumed
/// run arithmetically identical to an uninterrupted one.
struct TrainMeta {
    long step = 0;
    std::uint64_t rng_seed = 0;
    std::uint64_t rng_counter = 0;
};

/// Checkpoint layout: a directory of f64 tensor blobs (one per parameter,
/// plus Adam moments) and a manifest.json naming them, carrying the full
/// model config and the training position.
void save_vae_checkpoint(const std::filesystem::path& dir, const vae::SequenceVae& model,
                         const nn::AdamOptimizer* opt, const NormStats& stats,
                         const TrainMeta& meta);

struct LoadedVae {
    std::unique_ptr<vae::SequenceVae> model;
    std::unique_ptr<nn::AdamOptimizer> opt; // present only when requested and stored
    NormStats stats;
    TrainMeta meta;
};

LoadedVae load_vae_checkpoint(const std::filesystem::path& dir, bool with_optimizer);

struct PldExtra {
    double latent_scale = 1.0;
    int t_diff = 100;
    double beta_min = 1e-3;
    double beta_max = 0.2;
};

void save_pld_checkpoint(const std::filesystem::path& dir, const pld::Denoiser& model,
                         const nn::AdamOptimizer* opt, const PldExtra& extra,
                         const TrainMeta& meta);

struct LoadedPld {
    std::unique_ptr<pld::Denoiser> model;
    std::unique_ptr<nn::AdamOptimizer> opt;
    PldExtra extra;
    TrainMeta meta;
};

LoadedPld load_pld_checkpoint(const std::filesystem::path& dir, bool with_optimizer);

} // namespace posegen
