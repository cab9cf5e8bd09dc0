#pragma once

#include "mrprior/grid.hpp"

namespace mri {

// Orthonormal multi-level 2D Haar transform. Levels recurse on the
// approximation band only, which ends up in the top-left corner of the
// coefficient grid. rows and cols must be divisible by 2^levels.
ComplexGrid haar_forward(const ComplexGrid& img, int levels);
ComplexGrid haar_inverse(const ComplexGrid& coeffs, int levels);

// Complex soft threshold: u -> u * max(0, 1 - theta/|u|).
cdouble soft_threshold(cdouble u, double theta);

// Proximal map of theta * |Psi x|_1 with Psi the Haar transform above:
// detail coefficients are magnitude-shrunk, the final approximation band is
// left untouched.
ComplexGrid l1_wavelet_prox(const ComplexGrid& z, double threshold, int levels);

} // namespace mri
