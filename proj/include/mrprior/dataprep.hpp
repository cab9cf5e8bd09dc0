#pragma once

#include <cstdint>
#include <vector>

#include "mrprior/grid.hpp"
#include "mrprior/nifti.hpp"

namespace mri {

// Which corner the exclusion patch is read from, as (row, col) of the
// slice: tl = (0, 0).
enum class Corner { TopLeft, TopRight, BottomLeft, BottomRight };

Corner parse_corner(const std::string& name);

// Bilinear in-plane resampling of every axial slice to target x target at
// 1 mm nominal spacing, field of view preserved via the voxel spacing and
// centers aligned. Returns nz real-valued grids.
std::vector<ComplexGrid> conform_slices(const Volume& vol, int target = 256);

// Background Gaussian noise (raw intensity units), clamp at zero, then
// divide by the slice maximum so the output peaks at exactly 1. Returns
// false when the slice is all zero after noise (caller should skip it).
bool prep_slice(ComplexGrid& slice, double noise_mean, double noise_sd, uint64_t seed);

struct PatchStats {
    double mean = 0.0;
    double sd = 0.0;
    bool exclude = false;
};

// Mean and population standard deviation over a 30x30 patch at the chosen
// corner of a normalized slice; excluded iff mean < 0.04 AND sd < 0.0061.
PatchStats exclusion_check(const ComplexGrid& normalized, Corner corner = Corner::TopLeft);

} // namespace mri
