#include "mrprior/schedule.hpp"

#include <cmath>

#include "mrprior/errors.hpp"

namespace mri {

double NoiseSchedule::ancestral_variance(int i) const {
    if (i < 1 || i > n_scales) throw ArgumentError("ancestral_variance: level out of range");
    const double s_prev2 = sigmas[static_cast<size_t>(i) - 1] * sigmas[static_cast<size_t>(i) - 1];
    const double s_cur2 = sigmas[static_cast<size_t>(i)] * sigmas[static_cast<size_t>(i)];
    return s_prev2 * (s_cur2 - s_prev2) / s_cur2;
}

NoiseSchedule schedule(int n_scales, double sigma_min, double sigma_max) {
    if (n_scales < 1) throw ArgumentError("schedule: N must be >= 1");
    if (sigma_min <= 0.0 || sigma_max <= 0.0)
        throw ArgumentError("schedule: sigma bounds must be positive");

    NoiseSchedule s;
    s.n_scales = n_scales;
    s.sigma_min = sigma_min;
    s.sigma_max = sigma_max;
    s.sigmas.resize(static_cast<size_t>(n_scales) + 1);
    for (int i = 0; i <= n_scales; ++i) {
        const double frac = 1.0 - static_cast<double>(i) / n_scales;
        s.sigmas[static_cast<size_t>(i)] =
            sigma_min + sigma_max * std::log(1.0 + frac * (M_E - 1.0));
    }
    return s;
}

} // namespace mri
