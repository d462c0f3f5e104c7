#pragma once

#include <vector>

#include "posegen/types.hpp"

namespace posegen {

/// Per-dimension mean/std over all frames of all sequences, population
/// (divide-by-N) convention. Dimensions whose std falls below 1e-6 are
/// flagged degenerate and given std 1 so that constant dimensions stay
/// trainable. Throws ValidationError on an empty dataset or mixed dims.
NormStats compute_norm_stats(const std::vector<PoseSequence>& dataset);

/// (x - mean) / std per dimension. Throws ValidationError on dim mismatch.
PoseSequence normalize(const PoseSequence& seq, const NormStats& stats);

/// x * std + mean per dimension.
PoseSequence denormalize(const PoseSequence& seq, const NormStats& stats);

} // namespace posegen
