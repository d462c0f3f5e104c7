#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "posegen/diffusion.hpp"
#include "posegen/metrics.hpp"
#include "posegen/vae.hpp"

namespace posegen::cli {

struct DataConfig {
    int train_per_class = 100;
    int eval_per_class = 20;
    std::vector<std::string> classes = {"nod", "shake", "still"};
    int length = 64;
    int fps = 25;
    double amplitude_min = 0.10;
    double amplitude_max = 0.20;
    double frequency = 1.171875; // 3 cycles per 64-frame window at 25 fps
    double coupling = 0.6;
    double noise_scale = 0.01;
    int text_dim = 512;
    int audio_dim = 768;
    int audio_len = 0; // 0 = same as length

    void validate() const;
};

struct PldTrainConfig {
    int d_model = 64;
    int layers = 4;
    int heads = 4;
    int time_embed_dim = 64;
    int audio_tokens = 8;
    double p_uncond = 0.1;
    int t_diff = 100;
    // 1000-step reference endpoints (1e-4, 0.02) scaled by 1000/t_diff so the
    // chain still ends near pure noise.
    double beta_min = 1e-3;
    double beta_max = 0.2;
    double lr = 1e-3;
    int batch_size = 32;
    long steps = 5000;
    long checkpoint_interval = 1000;
    bool scale_latents = true;
    bool sample_posterior = false; // diffuse reparameterized z instead of the mean
    std::uint64_t seed = 0;        // 0 = derive from the global seed

    void validate() const;
};

struct SamplerRunConfig {
    double guidance = 7.5;
    std::string kind = "ancestral"; // or "deterministic"
    int steps = 0;                  // 0 = t_diff
    int count = 20;
    std::string class_label = "nod"; // used when no explicit condition paths
    std::string text;                // explicit condition tensor paths
    std::string audio;
    std::uint64_t seed = 0;

    void validate() const;
    pld::SamplerConfig to_sampler(std::uint64_t resolved_seed) const;
};

struct MetricsRunConfig {
    int diversity_pairs = 200;
    std::string diversity_mode = "pairwise"; // or "variance"
    double probe_frequency = 1.171875;
    double probe_band = 0.2;
    double still_threshold = 0.03;
    std::uint64_t seed = 0;

    void validate() const;
    metrics::MotionProbeConfig probe() const;
    metrics::DiversityMode mode() const;
};

struct PathsConfig {
    std::string dataset;        // make-data run directory
    std::string vae_checkpoint; // checkpoint directory
    std::string pld_checkpoint;
    std::string samples;   // sample run directory (or dataset split) to evaluate
    std::string reference; // dataset split directory for eval reference
};

/// Whole-run configuration: JSON file over defaults, then --set overrides.
/// Unknown keys are rejected. Seeds left at 0 are derived from the global
/// seed per consumer ("vae", "pld", "sampler", "metrics").
struct RunConfig {
    std::uint64_t seed = 7;
    std::string out = "runs";
    DataConfig data;
    vae::VaeConfig vae;
    PldTrainConfig pld;
    SamplerRunConfig sampler;
    MetricsRunConfig metrics;
    PathsConfig paths;

    static RunConfig defaults();

    /// file may be empty (defaults only). overrides are "dotted.key=value"
    /// with JSON-parsed values. Throws ValidationError on unknown keys, type
    /// mismatches or invariant violations.
    static RunConfig load(const std::filesystem::path& file,
                          const std::vector<std::string>& overrides = {},
                          const std::uint64_t* seed_override = nullptr,
                          const std::string* out_override = nullptr);

    void validate() const;

    /// Full tree as compact JSON with sorted keys.
    std::string canonical_json() const;
    /// 16 hex digits of FNV-1a over canonical_json(); names run directories.
    std::string config_hash() const;
};

} // namespace posegen::cli
