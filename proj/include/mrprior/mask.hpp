#pragma once

#include <cstdint>
#include <vector>

#include "mrprior/grid.hpp"

namespace mri {

// Binary k-space inclusion pattern. `acceleration` holds the measured
// undersampling factor (total / kept); `calib_*` the extents of the fully
// sampled central block (0 when none was requested).
struct SamplingMask {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> kept; // row-major, 1 = sampled
    double acceleration = 1.0;
    int calib_rows = 0;
    int calib_cols = 0;

    bool at(int r, int c) const { return kept[static_cast<size_t>(r) * cols + c] != 0; }
    size_t kept_count() const;
    double kept_fraction() const;

    // Projection onto sampled locations: zeroes excluded entries.
    ComplexGrid apply(const ComplexGrid& ksp) const;

    // 0/1 grid for on-disk interchange.
    ComplexGrid to_grid() const;
    // Rebuild from a 0/1 grid; detects the largest fully kept central block.
    static SamplingMask from_grid(const ComplexGrid& g);
};

// Regular line undersampling along the phase-encode (column) axis:
// every accel-th column plus calib_lines central columns, all rows sampled
// on kept columns.
SamplingMask make_mask_1d(int rows, int cols, int accel, int calib_lines, uint64_t seed = 0);

// Cartesian lattice keeping every (accel_r, accel_c)-th point plus a fully
// sampled central calib_rows x calib_cols block.
SamplingMask make_mask_2d(int rows, int cols, int accel_r, int accel_c, int calib_rows,
                          int calib_cols);

// Variable-density Poisson-disc pattern: dart throwing with local radius
// r(k) = r0 * (1 + density_slope * |k_norm|), retried with rescaled r0 until
// the realized acceleration lands within 10% of target_accel.
SamplingMask make_mask_poisson(int rows, int cols, double target_accel, int calib_rows,
                               int calib_cols, uint64_t seed, double density_slope = 2.0);

} // namespace mri
