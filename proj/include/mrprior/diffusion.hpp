#pragma once

#include <memory>

#include "mrprior/prior.hpp"
#include "mrprior/scorenet.hpp"

namespace mri {

// Score supplied by a trained network, scaled by the reverse-transition
// factor (sigma_i^2 - sigma_{i-1}^2) / tau_i^2 of the evaluation schedule.
// The argument is rescaled to max magnitude 1 before the network sees it
// (the training range) and the gradient is chain-ruled back.
ComplexGrid diffusion_score(const ScoreNet<double>& net, const NoiseSchedule& sched,
                            const ComplexGrid& x, int level);

// Raw score estimate s_theta at the network level whose trained sigma is
// closest to `sigma` (handles evaluation schedules whose N differs from the
// training schedule). Includes the range normalization and the mode's
// output-to-score conversion, but no transition factor.
ComplexGrid scorenet_score(const ScoreNet<double>& net, const ComplexGrid& x, double sigma);

class DiffusionPrior final : public Prior {
public:
    DiffusionPrior(ScoreNet<double> net, NoiseSchedule eval_sched)
        : net_(std::move(net)), sched_(std::move(eval_sched)) {}

    static DiffusionPrior from_checkpoint(const std::string& dir, const NoiseSchedule& sched);

    ComplexGrid score(const ComplexGrid& x, int level) const override;
    const char* name() const override { return "diffusion"; }
    const NoiseSchedule& eval_schedule() const { return sched_; }

private:
    ScoreNet<double> net_;
    NoiseSchedule sched_;
};

} // namespace mri
