#include "mrprior/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mrprior/errors.hpp"

namespace mri {

ComplexGrid::ComplexGrid(int rows, int cols, cdouble fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw ArgumentError("ComplexGrid: negative extent");
}

ComplexGrid::ComplexGrid(int rows, int cols, std::vector<cdouble> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != static_cast<size_t>(rows) * cols)
        throw ArgumentError("ComplexGrid: data length does not match rows*cols");
}

ComplexGrid& ComplexGrid::operator+=(const ComplexGrid& rhs) {
    if (!same_shape(rhs)) throw ArgumentError("grid shape mismatch in +=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

ComplexGrid& ComplexGrid::operator-=(const ComplexGrid& rhs) {
    if (!same_shape(rhs)) throw ArgumentError("grid shape mismatch in -=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

ComplexGrid& ComplexGrid::operator*=(cdouble s) {
    for (auto& v : data_) v *= s;
    return *this;
}

ComplexGrid ComplexGrid::hadamard(const ComplexGrid& rhs) const {
    if (!same_shape(rhs)) throw ArgumentError("grid shape mismatch in hadamard");
    ComplexGrid out(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] * rhs.data_[i];
    return out;
}

double ComplexGrid::norm2() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

double ComplexGrid::max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool ComplexGrid::all_finite() const {
    for (const auto& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

cdouble dot(const ComplexGrid& a, const ComplexGrid& b) {
    if (!a.same_shape(b)) throw ArgumentError("grid shape mismatch in dot");
    cdouble s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place, no scaling.
void fft_pow2(std::vector<cdouble>& a, bool inverse) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const cdouble wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                cdouble u = a[i + k];
                cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein chirp-z transform for arbitrary lengths.
void fft_bluestein(std::vector<cdouble>& a, bool inverse) {
    const size_t n = a.size();
    size_t m = 1;
    while (m < 2 * n + 1) m <<= 1;

    std::vector<cdouble> chirp(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (size_t k = 0; k < n; ++k) {
        // angle = sign * pi * k^2 / n, with k^2 reduced mod 2n to keep precision
        const double kk = static_cast<double>((k * k) % (2 * n));
        const double ang = sign * M_PI * kk / static_cast<double>(n);
        chirp[k] = cdouble(std::cos(ang), std::sin(ang));
    }

    std::vector<cdouble> fa(m, cdouble(0.0, 0.0));
    std::vector<cdouble> fb(m, cdouble(0.0, 0.0));
    for (size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);

    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    fft_pow2(fa, true);

    const double scale = 1.0 / static_cast<double>(m);
    for (size_t k = 0; k < n; ++k) a[k] = fa[k] * scale * chirp[k];
}

} // namespace

void fft_inplace(std::vector<cdouble>& v, bool inverse) {
    if (v.size() <= 1) return;
    if (is_pow2(v.size()))
        fft_pow2(v, inverse);
    else
        fft_bluestein(v, inverse);
}

namespace {

// shift=floor(n/2) rotation along both axes; sign picks fftshift/ifftshift.
ComplexGrid circshift(const ComplexGrid& g, int sr, int sc) {
    const int r = g.rows(), c = g.cols();
    ComplexGrid out(r, c);
    for (int i = 0; i < r; ++i) {
        const int ii = (i + sr) % r;
        for (int j = 0; j < c; ++j) out(ii, (j + sc) % c) = g(i, j);
    }
    return out;
}

ComplexGrid dft2(const ComplexGrid& in, bool inverse) {
    const int r = in.rows(), c = in.cols();
    if (r < 1 || c < 1) throw ArgumentError("dft: empty grid");
    ComplexGrid work = in;

    std::vector<cdouble> row(c);
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) row[j] = work(i, j);
        fft_inplace(row, inverse);
        for (int j = 0; j < c; ++j) work(i, j) = row[j];
    }
    std::vector<cdouble> col(r);
    for (int j = 0; j < c; ++j) {
        for (int i = 0; i < r; ++i) col[i] = work(i, j);
        fft_inplace(col, inverse);
        for (int i = 0; i < r; ++i) work(i, j) = col[i];
    }
    work *= cdouble(1.0 / std::sqrt(static_cast<double>(r) * c), 0.0);
    return work;
}

} // namespace

ComplexGrid fftshift(const ComplexGrid& g) {
    return circshift(g, g.rows() / 2, g.cols() / 2);
}

ComplexGrid ifftshift(const ComplexGrid& g) {
    return circshift(g, g.rows() - g.rows() / 2, g.cols() - g.cols() / 2);
}

ComplexGrid dft_centered(const ComplexGrid& img) {
    return fftshift(dft2(ifftshift(img), false));
}

ComplexGrid idft_centered(const ComplexGrid& ksp) {
    return fftshift(dft2(ifftshift(ksp), true));
}

} // namespace mri
