#include "posegen/flow.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen::flow {

ImageGrid ImageGrid::zero(int h, int w, int c) {
    ImageGrid g;
    for (int i = 0; i < c; ++i) g.channels.push_back(MatD::Zero(h, w));
    return g;
}

FlowField FlowField::zero(int h, int w) { return FlowField{MatD::Zero(h, w), MatD::Zero(h, w)}; }

FlowField FlowField::constant(int h, int w, double fx, double fy) {
    return FlowField{MatD::Constant(h, w, fx), MatD::Constant(h, w, fy)};
}

Mask Mask::zero(int h, int w) { return Mask{MatD::Zero(h, w)}; }

Mask Mask::constant(int h, int w, double value) { return Mask{MatD::Constant(h, w, value)}; }

namespace {

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void check_same_res(int h1, int w1, int h2, int w2, const char* what) {
    if (h1 != h2 || w1 != w2)
        throw ValidationError(std::string(what) + ": resolution mismatch " +
                              std::to_string(h1) + "x" + std::to_string(w1) + " vs " +
                              std::to_string(h2) + "x" + std::to_string(w2));
}

} // namespace

void FlowField::validate_pyramid() const {
    if (dx.rows() != dy.rows() || dx.cols() != dy.cols())
        throw ValidationError("flow: dx/dy resolution mismatch");
    const int h = height(), w = width();
    if (h != w || !power_of_two(h) || h < 8 || h > 256)
        throw ValidationError("flow: pyramid resolution must be a square power of two in "
                              "[8, 256], got " +
                              std::to_string(h) + "x" + std::to_string(w));
    if (!dx.allFinite() || !dy.allFinite())
        throw ValidationError("flow: non-finite displacement");
}

double sample_bilinear_clamped(const MatD& img, double x, double y) {
    const long w = img.cols(), h = img.rows();
    x = std::min(std::max(x, 0.0), static_cast<double>(w - 1));
    y = std::min(std::max(y, 0.0), static_cast<double>(h - 1));
    const long x0 = static_cast<long>(std::floor(x));
    const long y0 = static_cast<long>(std::floor(y));
    const long x1 = std::min(x0 + 1, w - 1);
    const long y1 = std::min(y0 + 1, h - 1);
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);
    return (1.0 - fy) * ((1.0 - fx) * img(y0, x0) + fx * img(y0, x1)) +
           fy * ((1.0 - fx) * img(y1, x0) + fx * img(y1, x1));
}

ImageGrid backward_warp(const ImageGrid& src, const FlowField& f) {
    if (src.channels.empty()) throw ValidationError("warp: empty image");
    check_same_res(src.height(), src.width(), f.height(), f.width(), "warp");
    const int h = src.height(), w = src.width();
    ImageGrid out = ImageGrid::zero(h, w, src.channel_count());
    for (int c = 0; c < src.channel_count(); ++c) {
        const MatD& in = src.channels[c];
        MatD& o = out.channels[c];
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                o(y, x) = sample_bilinear_clamped(in, x + f.dx(y, x), y + f.dy(y, x));
    }
    return out;
}

MatD upsample_bilinear_2x(const MatD& m) {
    const long h = m.rows(), w = m.cols();
    MatD out(2 * h, 2 * w);
    for (long y = 0; y < 2 * h; ++y) {
        for (long x = 0; x < 2 * w; ++x) {
            // half-pixel centers: output pixel center maps to (x+0.5)/2 - 0.5
            const double sx = (x + 0.5) * 0.5 - 0.5;
            const double sy = (y + 0.5) * 0.5 - 0.5;
            out(y, x) = sample_bilinear_clamped(m, sx, sy);
        }
    }
    return out;
}

FlowField upsample_flow(const FlowField& f) {
    return FlowField{2.0 * upsample_bilinear_2x(f.dx), 2.0 * upsample_bilinear_2x(f.dy)};
}

Mask upsample_mask(const Mask& m) { return Mask{upsample_bilinear_2x(m.w)}; }

RefineResult refine_level(const ImageGrid& enc, const ImageGrid& dec, const FlowField& d_flow,
                          const Mask& mask_raw, const FlowField* flow_prev,
                          const Mask* mask_prev) {
    const int h = enc.height(), w = enc.width();
    if (enc.channel_count() != dec.channel_count())
        throw ValidationError("refine_level: enc/dec channel mismatch");
    check_same_res(h, w, dec.height(), dec.width(), "refine_level enc/dec");
    check_same_res(h, w, d_flow.height(), d_flow.width(), "refine_level flow");
    check_same_res(h, w, mask_raw.height(), mask_raw.width(), "refine_level mask");
    d_flow.validate_pyramid();
    if ((flow_prev == nullptr) != (mask_prev == nullptr))
        throw ValidationError("refine_level: flow_prev and mask_prev must come together");

    RefineResult r;
    if (flow_prev) {
        check_same_res(flow_prev->height(), flow_prev->width(), h / 2, w / 2,
                       "refine_level flow_prev");
        check_same_res(mask_prev->height(), mask_prev->width(), h / 2, w / 2,
                       "refine_level mask_prev");
        const FlowField up = upsample_flow(*flow_prev);
        r.flow = FlowField{d_flow.dx + up.dx, d_flow.dy + up.dy};
        r.mask = Mask{mask_raw.w + upsample_mask(*mask_prev).w};
    } else {
        r.flow = d_flow;
        r.mask = mask_raw;
    }
    r.mask.w = r.mask.w.cwiseMax(0.0).cwiseMin(1.0);

    const ImageGrid warped = backward_warp(enc, r.flow);
    r.out = ImageGrid::zero(h, w, enc.channel_count());
    for (int c = 0; c < enc.channel_count(); ++c)
        r.out.channels[c] = warped.channels[c].cwiseProduct(r.mask.w) +
                            dec.channels[c].cwiseProduct(MatD::Ones(h, w) - r.mask.w);
    return r;
}

FlowField compose_total_flow(const FlowField& coarse,
                             const std::vector<FlowField>& residuals) {
    coarse.validate_pyramid();
    const int final_res = coarse.height();
    FlowField total = coarse;
    int prev_res = 0;
    for (size_t i = 0; i < residuals.size(); ++i) {
        residuals[i].validate_pyramid();
        const int res = residuals[i].height();
        if (prev_res != 0 && res != 2 * prev_res)
            throw ValidationError("compose_total_flow: residual " + std::to_string(i) +
                                  " at " + std::to_string(res) +
                                  " does not double the previous level");
        if (res > final_res)
            throw ValidationError("compose_total_flow: residual exceeds coarse resolution");
        prev_res = res;
        FlowField up = residuals[i];
        int r = res;
        while (r < final_res) {
            up = upsample_flow(up);
            r *= 2;
        }
        total.dx += up.dx;
        total.dy += up.dy;
    }
    return total;
}

} // namespace posegen::flow
