#include "mrprior/phase_aug.hpp"

#include <cmath>
#include <sstream>

#include "mrprior/errors.hpp"
#include "mrprior/random.hpp"

namespace mri {

ComplexGrid magnitude_loglik_grad(const ComplexGrid& x, const ComplexGrid& m, double epsilon) {
    if (!x.same_shape(m)) throw ArgumentError("magnitude_loglik_grad: shape mismatch");
    ComplexGrid grad(x.rows(), x.cols());
    for (size_t i = 0; i < x.size(); ++i) {
        if (m[i].real() < 0.0)
            throw ArgumentError("magnitude_loglik_grad: magnitudes must be nonnegative");
        const double mag = std::max(1e-8, std::abs(x[i]));
        grad[i] = 2.0 * epsilon * (m[i].real() - mag) * (x[i] / mag);
    }
    return grad;
}

std::vector<ComplexGrid> augment(const ComplexGrid& m, const Prior& prior,
                                 const AugmentConfig& cfg) {
    if (cfg.epsilon <= 0.0 || cfg.gamma <= 0.0 || cfg.steps_per_level < 1)
        throw ArgumentError("augment: epsilon, gamma must be > 0 and K >= 1");
    if (cfg.sched.n_scales < 1) throw ArgumentError("augment: schedule missing");
    if (m.max_abs() > 1.0 + 1e-6)
        throw ArgumentError("augment: magnitude image must be normalized to [0, 1]");

    const int n_levels = cfg.sched.n_scales;
    const double sigma0 = cfg.sched.sigma(0);
    std::vector<ComplexGrid> samples;
    samples.reserve(static_cast<size_t>(cfg.samples_per_image));

    for (int chain = 0; chain < cfg.samples_per_image; ++chain) {
        RandomStream rng =
            RandomStream(cfg.seed, 0x6c616e676576696eULL).fork(static_cast<uint64_t>(chain));
        ComplexGrid x(m.rows(), m.cols());
        for (size_t i = 0; i < x.size(); ++i) x[i] = sigma0 * rng.complex_gaussian();

        const double sigma_final = cfg.sched.sigma(n_levels);
        for (int level = 1; level <= n_levels; ++level) {
            const double sigma = cfg.sched.sigma(level);
            const double gamma = cfg.gamma * (sigma * sigma) / (sigma0 * sigma0);
            // likelihood sharpness annealed with the noise level so the
            // magnitude term stays active under the sigma^2-scaled step:
            // full epsilon is reached at the final level
            const double eps_level =
                cfg.epsilon * (sigma_final * sigma_final) / (sigma * sigma);
            const double noise_sd = std::sqrt(gamma);
            for (int step = 0; step < cfg.steps_per_level; ++step) {
                ComplexGrid drift = prior.score(x, level);
                drift += magnitude_loglik_grad(x, m, eps_level);
                drift *= cdouble(0.5 * gamma, 0.0);
                x += drift;
                for (size_t i = 0; i < x.size(); ++i)
                    x[i] += noise_sd * rng.complex_gaussian();
                if (!x.all_finite()) {
                    std::ostringstream msg;
                    msg << "augment: chain " << chain << " became non-finite at level " << level
                        << ", step " << step;
                    throw SamplingError(msg.str());
                }
            }
        }
        samples.push_back(std::move(x));
    }
    return samples;
}

} // namespace mri
