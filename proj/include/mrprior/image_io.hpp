#pragma once

#include <string>

#include "mrprior/grid.hpp"

namespace mri {

// Minimal 8-bit PNG writers for human inspection (stored-deflate zlib
// stream, fully deterministic). Never used as metric inputs.

// Magnitude mapped linearly [0, max|g|] -> [0, 255], grayscale.
void write_png_magnitude(const std::string& path, const ComplexGrid& g);

// Phase mapped (-pi, pi] onto a cyclic RGB colormap.
void write_png_phase(const std::string& path, const ComplexGrid& g);

} // namespace mri
