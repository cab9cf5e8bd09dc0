#include "mrprior/wavelet.hpp"

#include <cmath>

#include "mrprior/errors.hpp"

namespace mri {

namespace {

const double kInvSqrt2 = 0.7071067811865475244;

void check_divisible(int rows, int cols, int levels) {
    if (levels < 1) throw ArgumentError("haar: levels must be >= 1");
    const int block = 1 << levels;
    if (rows % block != 0 || cols % block != 0)
        throw ArgumentError("haar: rows and cols must be divisible by 2^levels");
}

// One analysis level on the leading sub x sub block, separable.
void analyze_level(ComplexGrid& g, int sub_r, int sub_c) {
    std::vector<cdouble> tmp(static_cast<size_t>(std::max(sub_r, sub_c)));
    for (int r = 0; r < sub_r; ++r) {
        for (int c = 0; c < sub_c / 2; ++c) {
            tmp[c] = (g(r, 2 * c) + g(r, 2 * c + 1)) * kInvSqrt2;
            tmp[sub_c / 2 + c] = (g(r, 2 * c) - g(r, 2 * c + 1)) * kInvSqrt2;
        }
        for (int c = 0; c < sub_c; ++c) g(r, c) = tmp[c];
    }
    for (int c = 0; c < sub_c; ++c) {
        for (int r = 0; r < sub_r / 2; ++r) {
            tmp[r] = (g(2 * r, c) + g(2 * r + 1, c)) * kInvSqrt2;
            tmp[sub_r / 2 + r] = (g(2 * r, c) - g(2 * r + 1, c)) * kInvSqrt2;
        }
        for (int r = 0; r < sub_r; ++r) g(r, c) = tmp[r];
    }
}

void synthesize_level(ComplexGrid& g, int sub_r, int sub_c) {
    std::vector<cdouble> tmp(static_cast<size_t>(std::max(sub_r, sub_c)));
    for (int c = 0; c < sub_c; ++c) {
        for (int r = 0; r < sub_r / 2; ++r) {
            tmp[2 * r] = (g(r, c) + g(sub_r / 2 + r, c)) * kInvSqrt2;
            tmp[2 * r + 1] = (g(r, c) - g(sub_r / 2 + r, c)) * kInvSqrt2;
        }
        for (int r = 0; r < sub_r; ++r) g(r, c) = tmp[r];
    }
    for (int r = 0; r < sub_r; ++r) {
        for (int c = 0; c < sub_c / 2; ++c) {
            tmp[2 * c] = (g(r, c) + g(r, sub_c / 2 + c)) * kInvSqrt2;
            tmp[2 * c + 1] = (g(r, c) - g(r, sub_c / 2 + c)) * kInvSqrt2;
        }
        for (int c = 0; c < sub_c; ++c) g(r, c) = tmp[c];
    }
}

} // namespace

ComplexGrid haar_forward(const ComplexGrid& img, int levels) {
    check_divisible(img.rows(), img.cols(), levels);
    ComplexGrid g = img;
    int sub_r = g.rows(), sub_c = g.cols();
    for (int lvl = 0; lvl < levels; ++lvl) {
        analyze_level(g, sub_r, sub_c);
        sub_r /= 2;
        sub_c /= 2;
    }
    return g;
}

ComplexGrid haar_inverse(const ComplexGrid& coeffs, int levels) {
    check_divisible(coeffs.rows(), coeffs.cols(), levels);
    ComplexGrid g = coeffs;
    for (int lvl = levels - 1; lvl >= 0; --lvl) {
        synthesize_level(g, g.rows() >> lvl, g.cols() >> lvl);
    }
    return g;
}

cdouble soft_threshold(cdouble u, double theta) {
    const double mag = std::abs(u);
    if (mag <= theta) return {0.0, 0.0};
    return u * (1.0 - theta / mag);
}

ComplexGrid l1_wavelet_prox(const ComplexGrid& z, double threshold, int levels) {
    if (threshold < 0.0) throw ArgumentError("l1_wavelet_prox: negative threshold");
    if (threshold == 0.0) return z;
    ComplexGrid coeffs = haar_forward(z, levels);
    const int approx_r = z.rows() >> levels;
    const int approx_c = z.cols() >> levels;
    for (int r = 0; r < coeffs.rows(); ++r)
        for (int c = 0; c < coeffs.cols(); ++c)
            if (r >= approx_r || c >= approx_c)
                coeffs(r, c) = soft_threshold(coeffs(r, c), threshold);
    return haar_inverse(coeffs, levels);
}

} // namespace mri
