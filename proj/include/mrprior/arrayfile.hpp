#pragma once

#include <string>
#include <vector>

#include "mrprior/grid.hpp"

namespace mri {

// On-disk multidimensional complex array, stored as a pair of files:
//   <base>.hdr  text header: line 1 "# Dimensions", line 2 extents
//   <base>.cfl  raw little-endian float32 (re, im) pairs, column-major
// Up to 8 extents; trailing ones are implied. Round trips are bit exact
// on the float payload.
struct ArrayFile {
    std::vector<long> dims;
    std::vector<std::complex<float>> payload; // column-major

    size_t element_count() const;
};

void write_array(const std::string& base, const ArrayFile& arr);
ArrayFile read_array(const std::string& base);

// Grid <-> ArrayFile adapters. A stack interprets dims as
// (rows, cols, n0, n1, ...) and yields product(n*) grids of rows x cols.
// ComplexGrid is row-major double; the payload is column-major float, so
// these adapters transpose and convert.
ArrayFile pack_grids(const std::vector<ComplexGrid>& grids);
std::vector<ComplexGrid> unpack_grids(const ArrayFile& arr);

void write_grid(const std::string& base, const ComplexGrid& g);
ComplexGrid read_grid(const std::string& base);
void write_grid_stack(const std::string& base, const std::vector<ComplexGrid>& grids);
std::vector<ComplexGrid> read_grid_stack(const std::string& base);

// Real-valued tensor stored in the same container (imaginary part zero).
void write_real_tensor(const std::string& base, const std::vector<long>& dims,
                       const std::vector<float>& values);
std::vector<float> read_real_tensor(const std::string& base, std::vector<long>* dims = nullptr);

} // namespace mri
