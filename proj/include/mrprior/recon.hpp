#pragma once

#include <string>
#include <vector>

#include "mrprior/acquisition.hpp"
#include "mrprior/prior.hpp"

namespace mri {

// Linear reconstruction settings (known coils).
struct PicsConfig {
    double alpha = 0.01;      // regularization weight
    int iterations = 100;     // FISTA iterations / CG cap
    double cg_tolerance = 1e-8;
    bool bind_schedule = true;  // diffusion level advances with iteration
    bool normalize_data = true; // scale y so the zero-filled RSS image peaks at 1
    uint64_t seed = 0;          // power-iteration start vector
};

// Two-stage IRGNM settings.
struct NlinvConfig {
    int gn_steps = 10;    // n, total Gauss-Newton steps
    int reg_steps = 4;    // r, trailing prior-regularized steps
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double alpha_min = 1e-4;
    int inner_cg = 30;
    int inner_fista = 10;
    double sobolev_a = 220.0;
    double sobolev_l = 32.0;
    bool normalize_data = true;
    // l2-stage Tikhonov reference. Penalizing x + dx toward the all-ones
    // initial guess is what makes x0 = 1 meaningful: with c0 = 0 the first
    // linearization carries no image information, and a zero reference
    // erases the image before the coils exist. Set false to penalize
    // toward zero (then the l2 stage solves the same sub-problem as the
    // FISTA stage with the l2 prior).
    bool l2_toward_init = true;
    uint64_t seed = 0;
};

struct PicsResult {
    ComplexGrid image;
    int iterations = 0;
    double residual = 0.0; // relative normal-equation residual (CG path)
    std::vector<std::string> warnings;
};

struct NlinvResult {
    ComplexGrid image;
    CoilSet coils;
    std::vector<double> residual_trace; // ||F(m^k) - y|| after each step
    std::vector<double> alpha_trace;    // alpha^k used in step k
    std::vector<std::string> warnings;

    // Gauge-invariant coil-combined magnitude |x| * RSS(c).
    ComplexGrid coil_combined() const;
};

// Per-channel zero-filled images combined by root-sum-of-squares.
ComplexGrid zero_filled_rss(const std::vector<ComplexGrid>& ksp, const SamplingMask& mask);

// Scale such that scale * y has a zero-filled RSS image of max magnitude 1.
double kspace_normalization_scale(const std::vector<ComplexGrid>& ksp,
                                  const SamplingMask& mask);

// Coil sensitivities from the fully sampled calibration block: apodized
// low-resolution channel images divided by their floored RSS.
CoilSet estimate_coils_calib(const std::vector<ComplexGrid>& ksp, const SamplingMask& mask,
                             int calib_rows = 0, int calib_cols = 0);

// Tikhonov-regularized least squares (F^H F + alpha I) x = F^H y by
// conjugate gradients.
PicsResult pics_cg(const std::vector<ComplexGrid>& ksp, const CoilSet& coils,
                   const SamplingMask& mask, double alpha, const PicsConfig& cfg = {});

// FISTA on 1/2 ||F_c x - y||^2 + alpha R(x) with the prior's proximal map
// (exact where available, one score gradient step otherwise). Diffusion
// priors advance their noise level with the iteration count.
PicsResult pics_fista(const std::vector<ComplexGrid>& ksp, const CoilSet& coils,
                      const SamplingMask& mask, const Prior& prior, double alpha,
                      const PicsConfig& cfg = {});

// Joint image/coil estimation: n Gauss-Newton steps on the bilinear model,
// each solving the linearized sub-problem with a Sobolev coil penalty; the
// first n-r steps use l2 image regularization with CG, the rest the given
// prior with FISTA. alpha halves each step (floored), beta halves freely.
NlinvResult nlinv(const std::vector<ComplexGrid>& ksp, const SamplingMask& mask,
                  const NlinvConfig& cfg, const Prior& prior);

} // namespace mri
