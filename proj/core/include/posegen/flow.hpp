#pragma once

#include <vector>

#include "posegen/mat.hpp"

namespace posegen::flow {

/// H x W x C grid, one matrix per channel. Values are arbitrary finite
/// doubles (images use [0, 1]).
struct ImageGrid {
    std::vector<MatD> channels;

    int height() const { return channels.empty() ? 0 : static_cast<int>(channels[0].rows()); }
    int width() const { return channels.empty() ? 0 : static_cast<int>(channels[0].cols()); }
    int channel_count() const { return static_cast<int>(channels.size()); }

    static ImageGrid zero(int h, int w, int c);
};

/// Pixel displacement field; output(p) samples input(p + F(p)).
struct FlowField {
    MatD dx; // H x W
    MatD dy;

    int height() const { return static_cast<int>(dx.rows()); }
    int width() const { return static_cast<int>(dx.cols()); }

    static FlowField zero(int h, int w);
    static FlowField constant(int h, int w, double fx, double fy);

    /// Pyramid invariant: square, power-of-two resolution in [8, 256], finite.
    void validate_pyramid() const;
};

struct Mask {
    MatD w; // H x W

    int height() const { return static_cast<int>(w.rows()); }
    int width() const { return static_cast<int>(w.cols()); }

    static Mask zero(int h, int w);
    static Mask constant(int h, int w, double value);
};

/// Bilinear backward warp with clamp-to-edge sampling. Zero flow returns the
/// input bit-exactly.
ImageGrid backward_warp(const ImageGrid& src, const FlowField& f);

/// One bilinear sample with out-of-bounds coordinates clamped to the border.
double sample_bilinear_clamped(const MatD& img, double x, double y);

/// 2x bilinear upsampling (half-pixel centers); flow displacement values are
/// doubled because they are in pixel units.
FlowField upsample_flow(const FlowField& f);
/// 2x bilinear upsampling, values unscaled.
Mask upsample_mask(const Mask& m);
MatD upsample_bilinear_2x(const MatD& m);

struct RefineResult {
    ImageGrid out;
    FlowField flow;
    Mask mask;
};

/// One refinement level:
///   F_i = dF_i + up(F_prev);  m_i = clamp(m_raw + up(m_prev), 0, 1);
///   out = warp(enc, F_i) * m_i + dec * (1 - m_i).
/// Pass prev = nullptr at the coarsest level.
RefineResult refine_level(const ImageGrid& enc, const ImageGrid& dec, const FlowField& d_flow,
                          const Mask& mask_raw, const FlowField* flow_prev,
                          const Mask* mask_prev);

/// Closed-form total flow: every residual is upsampled (x2 per level, values
/// scaled) to the coarse flow's resolution and summed onto it. Residual
/// resolutions must form a doubling chain; the chain may stop below the final
/// resolution, in which case the remaining upsamplings are applied.
FlowField compose_total_flow(const FlowField& coarse,
                             const std::vector<FlowField>& residuals);

} // namespace posegen::flow
