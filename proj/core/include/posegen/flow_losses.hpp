#pragma once

#include <functional>
#include <vector>

#include "posegen/flow.hpp"

namespace posegen::flow {

/// Fraction of the total L1 reconstruction error that falls inside `region`
/// (mask entries > 0.5 count as inside). 0/0 is defined as 0.
double region_loss_fraction(const ImageGrid& gen, const ImageGrid& gt, const Mask& region);

/// Pluggable feature extractor: one list of feature maps per image.
using FeatureExtractor = std::function<std::vector<ImageGrid>(const ImageGrid&)>;

/// Average-pool image pyramid with `levels` entries (level 0 is the image
/// itself, each further level pools 2x2). The desk-scale stand-in for a
/// pretrained feature network.
FeatureExtractor pyramid_extractor(int levels = 3);

/// 2x2 average pooling; odd trailing rows/columns pool over what remains.
ImageGrid avg_pool_2x(const ImageGrid& img);

/// Mean over frames of the per-level L1 feature distances, each level scaled
/// by lambda_p. L1 is an unreduced elementwise sum.
double perceptual_loss(const std::vector<ImageGrid>& gen_frames,
                       const std::vector<ImageGrid>& gt_frames,
                       const FeatureExtractor& extractor, double lambda_p = 10.0);

/// Cosine similarity with the norm product floored at eps, then clamped to
/// [eps, 1] so its log stays finite.
double sync_similarity(const VecD& f_v, const VecD& f_a, double eps = 1e-7);

/// -mean(log C) over (video, audio) feature pairs.
double sync_loss(const std::vector<std::pair<VecD, VecD>>& pairs, double eps = 1e-7);

} // namespace posegen::flow
