#include "mrprior/diffusion.hpp"

#include <cmath>

#include "mrprior/errors.hpp"

namespace mri {

ComplexGrid scorenet_score(const ScoreNet<double>& net, const ComplexGrid& x, double sigma) {
    const auto& train_sched = net.config().sched;
    int best = 0;
    double best_gap = std::abs(train_sched.sigma(0) - sigma);
    for (int i = 1; i <= train_sched.n_scales; ++i) {
        const double gap = std::abs(train_sched.sigma(i) - sigma);
        if (gap < best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    const double net_sigma = train_sched.sigma(best);

    const double range = x.max_abs();
    const bool rescale = range > 1e-12;
    ComplexGrid arg = x;
    if (rescale) arg *= cdouble(1.0 / range, 0.0);

    auto raw = net.forward(ScoreNet<double>::to_channels(arg), best);
    ComplexGrid score = ScoreNet<double>::to_grid(raw);
    // raw output predicts -z (SMLD) or +z (DDPM); score = raw_signed / sigma
    double conv = 1.0 / net_sigma;
    if (net.config().mode == TrainMode::Ddpm) conv = -conv;
    if (rescale) conv /= range; // chain rule through the normalization
    score *= cdouble(conv, 0.0);
    if (!score.all_finite()) throw NumericalError("diffusion score produced non-finite values");
    return score;
}

ComplexGrid diffusion_score(const ScoreNet<double>& net, const NoiseSchedule& sched,
                            const ComplexGrid& x, int level) {
    if (level < 1 || level > sched.n_scales)
        throw ArgumentError("diffusion_score: level out of range");
    const double s_prev = sched.sigma(level - 1);
    const double s_cur = sched.sigma(level);
    const double numerator = s_cur * s_cur - s_prev * s_prev;
    const double factor = numerator / sched.ancestral_variance(level);

    ComplexGrid score = scorenet_score(net, x, s_cur);
    score *= cdouble(factor, 0.0);
    return score;
}

DiffusionPrior DiffusionPrior::from_checkpoint(const std::string& dir,
                                               const NoiseSchedule& sched) {
    ScoreNet<float> net = load_checkpoint(dir);
    return DiffusionPrior(net.cast<double>(), sched);
}

ComplexGrid DiffusionPrior::score(const ComplexGrid& x, int level) const {
    const int n = sched_.n_scales;
    const int clamped = level < 1 ? 1 : (level > n ? n : level);
    return diffusion_score(net_, sched_, x, clamped);
}

} // namespace mri
