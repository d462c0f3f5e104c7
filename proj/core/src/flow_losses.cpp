#include "posegen/flow_losses.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen::flow {

double region_loss_fraction(const ImageGrid& gen, const ImageGrid& gt, const Mask& region) {
    if (gen.channel_count() != gt.channel_count() || gen.height() != gt.height() ||
        gen.width() != gt.width())
        throw ValidationError("region_loss_fraction: image shape mismatch");
    if (region.height() != gen.height() || region.width() != gen.width())
        throw ValidationError("region_loss_fraction: region shape mismatch");
    double inside = 0, total = 0;
    for (int c = 0; c < gen.channel_count(); ++c) {
        const MatD err = (gen.channels[c] - gt.channels[c]).cwiseAbs();
        total += err.sum();
        for (int y = 0; y < gen.height(); ++y)
            for (int x = 0; x < gen.width(); ++x)
                if (region.w(y, x) > 0.5) inside += err(y, x);
    }
    if (total == 0) return 0.0;
    return inside / total;
}

ImageGrid avg_pool_2x(const ImageGrid& img) {
    const int h = img.height(), w = img.width();
    const int oh = (h + 1) / 2, ow = (w + 1) / 2;
    ImageGrid out = ImageGrid::zero(oh, ow, img.channel_count());
    for (int c = 0; c < img.channel_count(); ++c) {
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                double acc = 0;
                int n = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const int yy = 2 * y + dy, xx = 2 * x + dx;
                        if (yy < h && xx < w) {
                            acc += img.channels[c](yy, xx);
                            ++n;
                        }
                    }
                out.channels[c](y, x) = acc / n;
            }
        }
    }
    return out;
}

FeatureExtractor pyramid_extractor(int levels) {
    if (levels < 1) throw ValidationError("pyramid_extractor: need at least one level");
    return [levels](const ImageGrid& img) {
        std::vector<ImageGrid> feats;
        feats.push_back(img);
        for (int l = 1; l < levels; ++l) feats.push_back(avg_pool_2x(feats.back()));
        return feats;
    };
}

double perceptual_loss(const std::vector<ImageGrid>& gen_frames,
                       const std::vector<ImageGrid>& gt_frames,
                       const FeatureExtractor& extractor, double lambda_p) {
    if (gen_frames.empty() || gen_frames.size() != gt_frames.size())
        throw ValidationError("perceptual_loss: frame count mismatch");
    double acc = 0;
    for (size_t i = 0; i < gen_frames.size(); ++i) {
        const auto fg = extractor(gen_frames[i]);
        const auto ft = extractor(gt_frames[i]);
        if (fg.size() != ft.size())
            throw ValidationError("perceptual_loss: extractor level count mismatch");
        for (size_t l = 0; l < fg.size(); ++l) {
            if (fg[l].channel_count() != ft[l].channel_count() ||
                fg[l].height() != ft[l].height() || fg[l].width() != ft[l].width())
                throw ValidationError("perceptual_loss: feature shape mismatch at level " +
                                      std::to_string(l));
            for (int c = 0; c < fg[l].channel_count(); ++c)
                acc += lambda_p * (fg[l].channels[c] - ft[l].channels[c]).cwiseAbs().sum();
        }
    }
    return acc / static_cast<double>(gen_frames.size());
}

double sync_similarity(const VecD& f_v, const VecD& f_a, double eps) {
    if (f_v.size() == 0 || f_v.size() != f_a.size())
        throw ValidationError("sync_similarity: vectors must be non-empty and equal length");
    const double denom = std::max(f_v.norm() * f_a.norm(), eps);
    const double c = f_v.dot(f_a) / denom;
    return std::min(std::max(c, eps), 1.0);
}

double sync_loss(const std::vector<std::pair<VecD, VecD>>& pairs, double eps) {
    if (pairs.empty()) throw ValidationError("sync_loss: need at least one pair");
    double acc = 0;
    for (const auto& [fv, fa] : pairs) acc += std::log(sync_similarity(fv, fa, eps));
    return -acc / static_cast<double>(pairs.size());
}

} // namespace posegen::flow
