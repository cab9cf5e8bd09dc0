#include "mrprior/dataprep.hpp"

#include <algorithm>
#include <cmath>

#include "mrprior/errors.hpp"
#include "mrprior/random.hpp"

namespace mri {

Corner parse_corner(const std::string& name) {
    if (name == "tl") return Corner::TopLeft;
    if (name == "tr") return Corner::TopRight;
    if (name == "bl") return Corner::BottomLeft;
    if (name == "br") return Corner::BottomRight;
    throw ArgumentError("unknown corner: " + name + " (expected tl/tr/bl/br)");
}

std::vector<ComplexGrid> conform_slices(const Volume& vol, int target) {
    if (target < 2) throw ArgumentError("conform_slices: target too small");
    if (!(vol.dx > 0.0) || !(vol.dy > 0.0))
        throw ArgumentError("conform_slices: degenerate voxel spacing");

    std::vector<ComplexGrid> slices;
    slices.reserve(static_cast<size_t>(vol.nz));
    for (int z = 0; z < vol.nz; ++z) {
        ComplexGrid out(target, target);
        for (int r = 0; r < target; ++r) {
            // output sample r sits at (r - center) mm from the slice center
            const double ym = (r - (target - 1) / 2.0) * 1.0;
            const double yf = ym / vol.dy + (vol.ny - 1) / 2.0;
            for (int c = 0; c < target; ++c) {
                const double xm = (c - (target - 1) / 2.0) * 1.0;
                const double xf = xm / vol.dx + (vol.nx - 1) / 2.0;
                if (xf < 0.0 || yf < 0.0 || xf > vol.nx - 1 || yf > vol.ny - 1) continue;
                const int x0 = std::min(static_cast<int>(xf), vol.nx - 2 >= 0 ? vol.nx - 2 : 0);
                const int y0 = std::min(static_cast<int>(yf), vol.ny - 2 >= 0 ? vol.ny - 2 : 0);
                const double fx = xf - x0, fy = yf - y0;
                const int x1 = std::min(x0 + 1, vol.nx - 1);
                const int y1 = std::min(y0 + 1, vol.ny - 1);
                const double v = (1.0 - fy) * ((1.0 - fx) * vol.at(x0, y0, z) +
                                               fx * vol.at(x1, y0, z)) +
                                 fy * ((1.0 - fx) * vol.at(x0, y1, z) +
                                       fx * vol.at(x1, y1, z));
                out(r, c) = v;
            }
        }
        slices.push_back(std::move(out));
    }
    return slices;
}

bool prep_slice(ComplexGrid& slice, double noise_mean, double noise_sd, uint64_t seed) {
    for (size_t i = 0; i < slice.size(); ++i)
        if (slice[i].real() < 0.0) throw ArgumentError("prep_slice: negative input intensity");

    RandomStream rng(seed, 0x70726570ULL);
    double peak = 0.0;
    for (size_t i = 0; i < slice.size(); ++i) {
        double v = slice[i].real();
        if (noise_sd > 0.0 || noise_mean != 0.0) v += noise_mean + noise_sd * rng.gaussian();
        v = std::max(0.0, v);
        slice[i] = v;
        peak = std::max(peak, v);
    }
    if (peak <= 0.0) return false;
    for (size_t i = 0; i < slice.size(); ++i) slice[i] /= peak;
    return true;
}

PatchStats exclusion_check(const ComplexGrid& normalized, Corner corner) {
    const int patch = 30;
    if (normalized.rows() < patch || normalized.cols() < patch)
        throw ArgumentError("exclusion_check: grid smaller than the 30x30 patch");

    int r0 = 0, c0 = 0;
    if (corner == Corner::TopRight || corner == Corner::BottomRight)
        c0 = normalized.cols() - patch;
    if (corner == Corner::BottomLeft || corner == Corner::BottomRight)
        r0 = normalized.rows() - patch;

    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < patch; ++r)
        for (int c = 0; c < patch; ++c) {
            const double v = std::abs(normalized(r0 + r, c0 + c));
            sum += v;
            sum2 += v * v;
        }
    const double n = static_cast<double>(patch) * patch;
    PatchStats stats;
    stats.mean = sum / n;
    stats.sd = std::sqrt(std::max(0.0, sum2 / n - stats.mean * stats.mean));
    stats.exclude = stats.mean < 0.04 && stats.sd < 0.0061;
    return stats;
}

} // namespace mri
