#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mri {

using cdouble = std::complex<double>;

// Dense 2D complex array, row-major. The common currency for images,
// coil maps and k-space channels.
class ComplexGrid {
public:
    ComplexGrid() : rows_(0), cols_(0) {}
    ComplexGrid(int rows, int cols, cdouble fill = {0.0, 0.0});
    ComplexGrid(int rows, int cols, std::vector<cdouble> data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    cdouble& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const cdouble& operator()(int r, int c) const {
        return data_[static_cast<size_t>(r) * cols_ + c];
    }
    cdouble& operator[](size_t i) { return data_[i]; }
    const cdouble& operator[](size_t i) const { return data_[i]; }

    std::vector<cdouble>& data() { return data_; }
    const std::vector<cdouble>& data() const { return data_; }

    bool same_shape(const ComplexGrid& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    ComplexGrid& operator+=(const ComplexGrid& rhs);
    ComplexGrid& operator-=(const ComplexGrid& rhs);
    ComplexGrid& operator*=(cdouble s);

    friend ComplexGrid operator+(ComplexGrid lhs, const ComplexGrid& rhs) { return lhs += rhs; }
    friend ComplexGrid operator-(ComplexGrid lhs, const ComplexGrid& rhs) { return lhs -= rhs; }
    friend ComplexGrid operator*(cdouble s, ComplexGrid g) { return g *= s; }

    // Elementwise product (image times coil map, mask times k-space).
    ComplexGrid hadamard(const ComplexGrid& rhs) const;

    double norm2() const;     // Euclidean norm
    double max_abs() const;
    bool all_finite() const;

private:
    int rows_, cols_;
    std::vector<cdouble> data_;
};

// Inner product sum(conj(a) * b); the convention every adjoint test uses.
cdouble dot(const ComplexGrid& a, const ComplexGrid& b);

// Centered orthonormal 2D DFT: fftshift o FFT o ifftshift with
// 1/sqrt(rows*cols) scaling, so forward and inverse are mutual adjoints
// and both preserve the Euclidean norm.
ComplexGrid dft_centered(const ComplexGrid& img);
ComplexGrid idft_centered(const ComplexGrid& ksp);

// In-place 1D transforms used by the 2D drivers; length may be arbitrary
// (radix-2 when possible, Bluestein otherwise). No normalization.
void fft_inplace(std::vector<cdouble>& v, bool inverse);

ComplexGrid fftshift(const ComplexGrid& g);
ComplexGrid ifftshift(const ComplexGrid& g);

} // namespace mri
