#include "posegen/synthetic.hpp"

#include <cmath>

#include "posegen/errors.hpp"
#include "posegen/rng.hpp"

namespace posegen {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

// Seed of the frozen text projection. Fixed (not dataset-dependent) so a
// class embedding can be re-synthesized without access to the dataset.
constexpr std::uint64_t kTextProjectionSeed = 0x706F736574657874ull;

// Band-limited zero-mean noise, rescaled so its population std over the
// window equals `scale` exactly. White noise would be incompressible for the
// sequence VAE once per-dimension normalization blows it up to unit variance.
VecD band_limited_noise(CounterRng rng, int length, int fps, double scale) {
    VecD curve = VecD::Zero(length);
    if (scale <= 0.0 || length < 2) return curve;
    constexpr int kComponents = 3;
    for (int k = 0; k < kComponents; ++k) {
        const double freq = rng.uniform(0.05, 0.9);
        const double phase = rng.uniform(0.0, kTwoPi);
        for (int t = 0; t < length; ++t)
            curve[t] += std::sin(kTwoPi * freq * t / fps + phase);
    }
    const double mean = curve.mean();
    curve.array() -= mean;
    const double sd = std::sqrt(curve.squaredNorm() / length);
    if (sd < 1e-12) return VecD::Zero(length);
    curve *= scale / sd;
    return curve;
}

} // namespace

VecD energy_envelope(const SyntheticSpec& spec, int length) {
    CounterRng rng = CounterRng::derive(spec.seed, "envelope");
    const double freq = rng.uniform(0.08, 0.18);
    const double phase = rng.uniform(0.0, kTwoPi);
    const double duration = static_cast<double>(spec.length) / spec.fps;
    VecD e(length);
    for (int i = 0; i < length; ++i) {
        const double time = duration * i / length;
        e[i] = 0.5 + 0.5 * std::sin(kTwoPi * freq * time + phase);
    }
    return e;
}

VecF class_text_embedding(MotionClass label, int text_dim) {
    if (text_dim <= 0) throw ValidationError("text_dim must be positive");
    CounterRng rng =
        CounterRng::derive(kTextProjectionSeed, static_cast<std::uint64_t>(label));
    VecD v(text_dim);
    for (int i = 0; i < text_dim; ++i) v[i] = rng.gaussian();
    v /= v.norm();
    return v.cast<float>();
}

MatF synthetic_audio_features(const SyntheticSpec& spec, const SyntheticDims& dims) {
    validate_synthetic_spec(spec);
    if (dims.audio_dim <= 0) throw ValidationError("audio_dim must be positive");
    const int t_audio = dims.audio_len > 0 ? dims.audio_len : spec.length;
    const VecD energy = energy_envelope(spec, t_audio);
    CounterRng audio_rng = CounterRng::derive(spec.seed, "audio_noise");
    MatD audio(t_audio, dims.audio_dim);
    for (int i = 0; i < t_audio; ++i)
        for (int j = 0; j < dims.audio_dim; ++j)
            audio(i, j) = energy[i] + spec.noise_scale * audio_rng.gaussian();
    return audio.cast<float>();
}

SyntheticSample generate_synthetic_sample(const SyntheticSpec& spec,
                                          const SyntheticDims& dims) {
    validate_synthetic_spec(spec);
    if (dims.text_dim <= 0 || dims.audio_dim <= 0)
        throw ValidationError("condition dims must be positive");
    const int t_pose = spec.length;
    const int t_audio = dims.audio_len > 0 ? dims.audio_len : t_pose;

    SyntheticSample sample;
    sample.label = spec.label;

    // Pose: carrier sinusoid on the class axis, band-limited noise everywhere.
    MatD pose = MatD::Zero(t_pose, PoseFrame::kDim);
    const std::uint64_t noise_seed = CounterRng::derive(spec.seed, "pose_noise").seed();
    for (int d = 0; d < PoseFrame::kDim; ++d) {
        const VecD noise = band_limited_noise(
            CounterRng::derive(noise_seed, static_cast<std::uint64_t>(d)), t_pose, spec.fps,
            spec.noise_scale);
        pose.col(d) = noise;
    }
    const VecD envelope_pose = energy_envelope(spec, t_pose);
    int axis = -1;
    if (spec.label == MotionClass::nod) axis = 0;
    if (spec.label == MotionClass::shake) axis = 1;
    if (axis >= 0) {
        for (int t = 0; t < t_pose; ++t) {
            const double carrier = std::sin(kTwoPi * spec.frequency * t / spec.fps);
            pose(t, axis) +=
                spec.amplitude * (1.0 + spec.coupling * envelope_pose[t]) * carrier;
        }
    }
    sample.pose.values = pose.cast<float>();
    sample.pose.fps = spec.fps;

    // Conditions.
    sample.energy = energy_envelope(spec, t_audio);
    sample.condition.text_embedding = class_text_embedding(spec.label, dims.text_dim);
    sample.condition.audio_features = synthetic_audio_features(spec, dims);
    sample.condition.is_null = false;
    return sample;
}

std::vector<SyntheticSample> generate_synthetic_dataset(
    const std::vector<SyntheticSpec>& specs, const SyntheticDims& dims) {
    std::vector<SyntheticSample> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) out.push_back(generate_synthetic_sample(spec, dims));
    return out;
}

} // namespace posegen
