#pragma once

#include "mrprior/grid.hpp"

namespace mri {

// Peak signal-to-noise ratio in dB with peak = max(|ref|):
// 20 log10(max(ref) / RMSE). Complex inputs are reduced to magnitude
// first. Identical inputs return +infinity.
double psnr(const ComplexGrid& ref, const ComplexGrid& test);

// Mean local structural similarity: 11x11 Gaussian window (sd 1.5),
// K1 = 0.01, K2 = 0.03, dynamic range max(|ref|). Windows are evaluated
// where they fit entirely inside the grid. Complex inputs are reduced to
// magnitude first; the value is 1 iff test == ref.
double ssim(const ComplexGrid& ref, const ComplexGrid& test);

} // namespace mri
