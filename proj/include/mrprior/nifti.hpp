#pragma once

#include <string>
#include <vector>

namespace mri {

// Magnitude volume with voxel spacing in millimeters.
struct Volume {
    int nx = 0, ny = 0, nz = 0;
    double dx = 1.0, dy = 1.0, dz = 1.0;
    std::vector<double> data; // x fastest, then y, then z

    double at(int x, int y, int z) const {
        return data[(static_cast<size_t>(z) * ny + y) * nx + x];
    }
};

// Minimal uncompressed NIfTI-1 reader: 348-byte header, magic "n+1" (data
// in the same file at vox_offset) or "ni1" (sibling .img), datatypes uint8,
// int16 and float32, scl_slope/scl_inter applied when set. Byte-swapped
// files are handled via the dim[0] heuristic.
Volume read_nifti(const std::string& path);

} // namespace mri
