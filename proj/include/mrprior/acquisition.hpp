#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrprior/grid.hpp"
#include "mrprior/mask.hpp"

namespace mri {

// Stack of per-channel complex sensitivity maps over the image grid.
struct CoilSet {
    std::vector<ComplexGrid> maps;

    int nc() const { return static_cast<int>(maps.size()); }
    int rows() const { return maps.empty() ? 0 : maps[0].rows(); }
    int cols() const { return maps.empty() ? 0 : maps[0].cols(); }

    // Root-sum-of-squares magnitude at every pixel.
    ComplexGrid rss() const;
};

// Per-channel low-pass-filtered complex Gaussian fields, jointly normalized
// so the root-sum-of-squares magnitude is 1 at every pixel. `smoothness` is
// the kept central k-space fraction per axis.
CoilSet simulate_coils(int rows, int cols, int nc, double smoothness, uint64_t seed);

enum class PhantomKind { SheppLogan, RandomEllipses };
enum class PhantomPhase { None, SmoothRandom };

PhantomKind parse_phantom_kind(const std::string& name);

// Synthetic test image with magnitude in [0,1] (max exactly 1) and an
// optional smooth random phase in (-pi, pi].
ComplexGrid phantom(int rows, int cols, PhantomKind kind, PhantomPhase phase, uint64_t seed);

// Multi-coil forward model: channel j = mask o dft_centered(img o c_j), plus
// complex Gaussian noise of standard deviation noise_sd on kept locations.
std::vector<ComplexGrid> forward(const ComplexGrid& img, const CoilSet& coils,
                                 const SamplingMask& mask, double noise_sd = 0.0,
                                 uint64_t seed = 0);

// Exact adjoint of the noiseless forward: sum_j conj(c_j) o idft(mask o y_j).
ComplexGrid adjoint(const std::vector<ComplexGrid>& ksp, const CoilSet& coils,
                    const SamplingMask& mask);

// Joint (image, coils) variable for the nonlinear model and its
// linearization around a working point.
struct JointVars {
    ComplexGrid image;
    CoilSet coils;
};

// Derivative of the bilinear model at m = (x, c) applied to dm = (dx, dc):
// channel j = mask o dft(dx o c_j + x o dc_j).
std::vector<ComplexGrid> jacobian_apply(const JointVars& m, const JointVars& dm,
                                        const SamplingMask& mask);

// Exact adjoint of jacobian_apply on the product space.
JointVars jacobian_adjoint(const JointVars& m, const std::vector<ComplexGrid>& residual,
                           const SamplingMask& mask);

// Sobolev-type k-space penalty weights that keep coil estimates smooth:
// w(k) = (1 + a*|k_norm|^2)^(l/2), k_norm in [-0.5, 0.5]^2, DC at center.
struct SobolevWeight {
    int rows = 0;
    int cols = 0;
    std::vector<double> w; // row-major, >= 1 everywhere, minimum at DC
    double a = 0.0;
    double l = 0.0;

    double at(int r, int c) const { return w[static_cast<size_t>(r) * cols + c]; }
};

SobolevWeight sobolev_weight(int rows, int cols, double a, double l);

// Scalar weight at a normalized k-space coordinate.
double sobolev_weight_at(double k_row, double k_col, double a, double l);

} // namespace mri
