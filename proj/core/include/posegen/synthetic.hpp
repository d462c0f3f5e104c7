#pragma once

#include <vector>

#include "posegen/types.hpp"

namespace posegen {

/// Condition payload dimensions for the generator. audio_len == 0 means
/// "same as the pose length".
struct SyntheticDims {
    int text_dim = 512;
    int audio_dim = 768;
    int audio_len = 0;
};

struct SyntheticSample {
    PoseSequence pose;
    ConditionBundle condition;
    MotionClass label = MotionClass::nod;
    VecD energy; // the audio energy envelope that modulated the motion, length T_a
};

/// Smooth random energy envelope in [0, 1]: a single seeded sinusoid with
/// frequency in [0.08, 0.18] Hz and random phase. Slow enough that the
/// amplitude-modulation sidebands of a coupled motion stay within +-20% of
/// the carrier frequency.
VecD energy_envelope(const SyntheticSpec& spec, int length);

/// Frozen random projection of the one-hot class label to `text_dim` dims,
/// unit L2 norm. The projection matrix is seeded by a fixed constant so the
/// same embedding can be re-synthesized anywhere (e.g. the sample CLI's
/// class-label shortcut).
VecF class_text_embedding(MotionClass label, int text_dim);

/// Audio features only: energy_envelope(spec) broadcast to audio_dim columns
/// plus seeded noise of std == spec.noise_scale. Used both by the full sample
/// generator and by the sample CLI's class-label shortcut, which synthesizes
/// fresh audio conditions per sample.
MatF synthetic_audio_features(const SyntheticSpec& spec, const SyntheticDims& dims = {});

/// Deterministically generates one sample:
///   nod   -> sinusoid on pitch, shake -> sinusoid on yaw, still -> no carrier;
///   active-axis amplitude scaled by (1 + coupling * energy(t));
///   band-limited noise of std == noise_scale added to every dimension;
///   audio features = energy(t) broadcast to audio_dim plus seeded noise;
///   text embedding = class_text_embedding(label).
/// Noise is band-limited (not white) so that normalized pose dimensions stay
/// representable by the sequence VAE.
SyntheticSample generate_synthetic_sample(const SyntheticSpec& spec,
                                          const SyntheticDims& dims = {});

/// Generates samples in spec order. Pure function of the spec list.
std::vector<SyntheticSample> generate_synthetic_dataset(
    const std::vector<SyntheticSpec>& specs, const SyntheticDims& dims = {});

} // namespace posegen
