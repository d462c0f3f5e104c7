#pragma once

#include "posegen/mat.hpp"

namespace posegen::pld {

using Mat = MatD;

/// Per-step noise coefficients. Index i holds the value for diffusion step
/// t = i + 1; alpha_bar_at(0) == 1 by convention.
struct DiffusionSchedule {
    int t_diff = 0;
    VecD beta;
    VecD alpha;
    VecD alpha_bar;

    double beta_at(int t) const;      // t in [1, t_diff]
    double alpha_at(int t) const;     // t in [1, t_diff]
    double alpha_bar_at(int t) const; // t in [0, t_diff]
};

/// Linear beta schedule from beta_min to beta_max over t_diff steps
/// (a single step uses beta_min). Throws ValidationError on bad bounds.
DiffusionSchedule make_schedule(int t_diff, double beta_min = 1e-4, double beta_max = 0.02);

/// sqrt(abar) * z0 + sqrt(1 - abar) * eps, for any abar in [0, 1].
Mat diffuse_with_alpha_bar(const Mat& z0, double alpha_bar, const Mat& eps);

/// Forward diffusion q(z_t | z0) at integer step t in [0, t_diff]
/// (t = 0 returns z0 exactly).
Mat forward_diffuse(const Mat& z0, int t, const Mat& eps, const DiffusionSchedule& s);

/// Classifier-free guidance combination: s * eps_cond + (1 - s) * eps_uncond.
Mat cfg_combine(const Mat& eps_cond, const Mat& eps_uncond, double s);

} // namespace posegen::pld
