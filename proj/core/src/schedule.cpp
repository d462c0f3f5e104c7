#include "posegen/schedule.hpp"

#include <cmath>

#include "posegen/errors.hpp"

namespace posegen::pld {

double DiffusionSchedule::beta_at(int t) const {
    if (t < 1 || t > t_diff)
        throw ValidationError("schedule: t=" + std::to_string(t) + " outside [1, " +
                              std::to_string(t_diff) + "]");
    return beta[t - 1];
}

double DiffusionSchedule::alpha_at(int t) const {
    if (t < 1 || t > t_diff)
        throw ValidationError("schedule: t=" + std::to_string(t) + " outside [1, " +
                              std::to_string(t_diff) + "]");
    return alpha[t - 1];
}

double DiffusionSchedule::alpha_bar_at(int t) const {
    if (t == 0) return 1.0;
    if (t < 0 || t > t_diff)
        throw ValidationError("schedule: t=" + std::to_string(t) + " outside [0, " +
                              std::to_string(t_diff) + "]");
    return alpha_bar[t - 1];
}

DiffusionSchedule make_schedule(int t_diff, double beta_min, double beta_max) {
    if (t_diff < 1) throw ValidationError("make_schedule: t_diff must be >= 1");
    if (!(beta_min > 0) || !(beta_min < beta_max) || !(beta_max < 1))
        throw ValidationError("make_schedule: need 0 < beta_min < beta_max < 1");
    DiffusionSchedule s;
    s.t_diff = t_diff;
    s.beta.resize(t_diff);
    s.alpha.resize(t_diff);
    s.alpha_bar.resize(t_diff);
    double prod = 1.0;
    for (int i = 0; i < t_diff; ++i) {
        const double frac = t_diff == 1 ? 0.0 : static_cast<double>(i) / (t_diff - 1);
        s.beta[i] = beta_min + (beta_max - beta_min) * frac;
        s.alpha[i] = 1.0 - s.beta[i];
        prod *= s.alpha[i];
        s.alpha_bar[i] = prod;
    }
    return s;
}

Mat diffuse_with_alpha_bar(const Mat& z0, double alpha_bar, const Mat& eps) {
    if (z0.rows() != eps.rows() || z0.cols() != eps.cols())
        throw ValidationError("forward_diffuse: shape mismatch");
    if (alpha_bar < 0.0 || alpha_bar > 1.0)
        throw ValidationError("forward_diffuse: alpha_bar outside [0, 1]");
    return std::sqrt(alpha_bar) * z0 + std::sqrt(1.0 - alpha_bar) * eps;
}

Mat forward_diffuse(const Mat& z0, int t, const Mat& eps, const DiffusionSchedule& s) {
    return diffuse_with_alpha_bar(z0, s.alpha_bar_at(t), eps);
}

Mat cfg_combine(const Mat& eps_cond, const Mat& eps_uncond, double s) {
    if (eps_cond.rows() != eps_uncond.rows() || eps_cond.cols() != eps_uncond.cols())
        throw ValidationError("cfg_combine: shape mismatch");
    return s * eps_cond + (1.0 - s) * eps_uncond;
}

} // namespace posegen::pld
