#pragma once

#include <vector>

namespace mri {

// Monotone noise-scale sequence driving diffusion priors and annealed
// Langevin sampling:
//   sigma_i = sigma_min + sigma_max * log(1 + (1 - i/N) * (e - 1)),  i = 0..N
// so sigma_0 = sigma_min + sigma_max and sigma_N = sigma_min, strictly
// decreasing in between.
struct NoiseSchedule {
    int n_scales = 0; // N
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    std::vector<double> sigmas; // N + 1 values, indices 0..N

    double sigma(int i) const { return sigmas.at(static_cast<size_t>(i)); }

    // Ancestral-transition variance between levels i-1 and i:
    //   tau_i^2 = sigma_{i-1}^2 * (sigma_i^2 - sigma_{i-1}^2) / sigma_i^2
    // Requires 1 <= i <= N.
    double ancestral_variance(int i) const;
};

NoiseSchedule schedule(int n_scales, double sigma_min = 0.01, double sigma_max = 0.3);

} // namespace mri
