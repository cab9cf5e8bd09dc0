#pragma once

#include <cstdint>
#include <vector>

#include "mrprior/grid.hpp"
#include "mrprior/prior.hpp"
#include "mrprior/schedule.hpp"

namespace mri {

// Annealed Langevin settings for magnitude-to-complex augmentation.
// epsilon is the final-level likelihood sharpness; during annealing it is
// scaled by (sigma_N / sigma_i)^2 so the magnitude term stays active under
// the sigma^2-scaled step size.
struct AugmentConfig {
    double epsilon = 8000.0;    // magnitude-likelihood sharpness at sigma_N
    double gamma = 0.05;        // base Langevin step size, scaled per level
    int steps_per_level = 40;   // K
    int samples_per_image = 5;
    uint64_t seed = 0;
    NoiseSchedule sched;
};

// Gradient of -epsilon ||m - |x|||^2 with respect to x:
// 2 epsilon (m - |x|) x / |x| per pixel, |x| floored at 1e-8.
ComplexGrid magnitude_loglik_grad(const ComplexGrid& x, const ComplexGrid& m, double epsilon);

// Draws samples_per_image complex images whose magnitude matches m under
// the prior: chains start from complex Gaussian noise at sigma_0 scale and
// run K unadjusted Langevin steps per noise level, combining the prior
// score with the magnitude-likelihood gradient. Deterministic per
// (seed, chain index).
std::vector<ComplexGrid> augment(const ComplexGrid& m, const Prior& prior,
                                 const AugmentConfig& cfg);

} // namespace mri
