#include "posegen/normalize.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen {

NormStats compute_norm_stats(const std::vector<PoseSequence>& dataset) {
    if (dataset.empty()) throw ValidationError("cannot compute stats on an empty dataset");
    const int d = dataset.front().dim();
    long n = 0;
    VecD sum = VecD::Zero(d);
    VecD sumsq = VecD::Zero(d);
    for (const auto& seq : dataset) {
        if (seq.dim() != d)
            throw ValidationError("mixed dimensions in dataset: " + std::to_string(seq.dim()) +
                                  " vs " + std::to_string(d));
        for (int i = 0; i < seq.length(); ++i) {
            const VecD row = seq.values.row(i).cast<double>();
            sum += row;
            sumsq += row.cwiseProduct(row);
            ++n;
        }
    }
    NormStats stats;
    stats.mean = sum / static_cast<double>(n);
    stats.stddev.resize(d);
    stats.degenerate.assign(d, false);
    for (int j = 0; j < d; ++j) {
        const double var = sumsq[j] / static_cast<double>(n) - stats.mean[j] * stats.mean[j];
        const double sd = std::sqrt(std::max(var, 0.0));
        if (sd < 1e-6) {
            stats.stddev[j] = 1.0;
            stats.degenerate[j] = true;
        } else {
            stats.stddev[j] = sd;
        }
    }
    return stats;
}

namespace {

void check_dims(const PoseSequence& seq, const NormStats& stats) {
    if (seq.dim() != stats.dim())
        throw ValidationError("sequence dim " + std::to_string(seq.dim()) +
                              " does not match stats dim " + std::to_string(stats.dim()));
}

} // namespace

PoseSequence normalize(const PoseSequence& seq, const NormStats& stats) {
    check_dims(seq, stats);
    PoseSequence out = seq;
    for (int j = 0; j < seq.dim(); ++j) {
        const float mean = static_cast<float>(stats.mean[j]);
        const float inv = static_cast<float>(1.0 / stats.stddev[j]);
        out.values.col(j) = (seq.values.col(j).array() - mean) * inv;
    }
    return out;
}

PoseSequence denormalize(const PoseSequence& seq, const NormStats& stats) {
    check_dims(seq, stats);
    PoseSequence out = seq;
    for (int j = 0; j < seq.dim(); ++j) {
        const float mean = static_cast<float>(stats.mean[j]);
        const float sd = static_cast<float>(stats.stddev[j]);
        out.values.col(j) = seq.values.col(j).array() * sd + mean;
    }
    return out;
}

} // namespace posegen
