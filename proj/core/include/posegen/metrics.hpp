#pragma once

#include <vector>

#include "posegen/types.hpp"
#include "posegen/vae.hpp"

namespace posegen::metrics {

/// N x K matrix of per-sequence feature vectors.
using FeatureSet = MatD;

/// Row i = flattened VAE posterior mean of normalized sequence i.
FeatureSet extract_features(const vae::SequenceVae& v, const std::vector<MatD>& normalized_seqs);

/// Frechet distance between Gaussian fits (population covariances). The
/// matrix square root is taken through a symmetric eigendecomposition of
/// (Sr*Sg + Sg*Sr)/2 with negative eigenvalues floored at zero.
double fid(const FeatureSet& real, const FeatureSet& gen);

enum class DiversityMode {
    pairwise, // mean L2 distance over S seeded random index pairs (i != j)
    variance  // trace of the population covariance
};

double diversity(const FeatureSet& feats, int pairs, std::uint64_t seed,
                 DiversityMode mode = DiversityMode::pairwise);

/// Mean pairwise distance over all unordered pairs; exact small-N reference.
double diversity_exhaustive(const FeatureSet& feats);

struct PcaCurves {
    std::vector<VecD> curves; // one per input sequence
    VecD component;           // first principal axis, sign-fixed
    bool degenerate = false;  // all frames equal: zero curves returned
};

/// Fits PCA on the pooled frames of all sequences and projects every frame
/// onto the first principal component. Sign fixed so the component's
/// largest-magnitude loading is positive.
PcaCurves pca_curve(const std::vector<PoseSequence>& seqs);

struct MotionProbeConfig {
    double frequency = 1.171875;   // expected carrier, Hz
    double band = 0.2;             // +-20%
    double still_threshold = 0.03; // band amplitude below which an axis is quiet, radians
};

/// Amplitude-equivalent of the spectral energy of `series` (mean removed)
/// within [f_lo, f_hi]; a pure sinusoid of amplitude a inside the band
/// reports approximately a.
double band_amplitude(const VecD& series, int fps, double f_lo, double f_hi);

/// nod/shake/still decision by comparing band-limited spectral energy of
/// pitch vs yaw on a denormalized sequence.
MotionClass classify_motion(const PoseSequence& seq, const MotionProbeConfig& probe = {});

struct EnvelopeCorrelation {
    double r = 0;
    bool degenerate = false;
};

/// Pearson correlation between the rolling RMS (window of one carrier
/// period) of the dominant rotation axis and the given energy envelope,
/// lengths aligned by linear resampling. Zero-variance inputs return a
/// flagged 0.
EnvelopeCorrelation amplitude_envelope_correlation(const PoseSequence& seq, const VecD& energy,
                                                   const MotionProbeConfig& probe = {});

} // namespace posegen::metrics
