#include "mrprior/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "mrprior/errors.hpp"

namespace mri {

namespace {

std::vector<double> magnitudes(const ComplexGrid& g) {
    std::vector<double> out(g.size());
    for (size_t i = 0; i < g.size(); ++i) out[i] = std::abs(g[i]);
    return out;
}

} // namespace

double psnr(const ComplexGrid& ref, const ComplexGrid& test) {
    if (!ref.same_shape(test)) throw ArgumentError("psnr: shape mismatch");
    const auto a = magnitudes(ref);
    const auto b = magnitudes(test);

    double peak = 0.0, sq = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        peak = std::max(peak, a[i]);
        const double d = a[i] - b[i];
        sq += d * d;
    }
    if (peak <= 0.0) throw ArgumentError("psnr: reference is all zero");
    if (sq == 0.0) return std::numeric_limits<double>::infinity();
    const double rmse = std::sqrt(sq / static_cast<double>(a.size()));
    return 20.0 * std::log10(peak / rmse);
}

double ssim(const ComplexGrid& ref, const ComplexGrid& test) {
    if (!ref.same_shape(test)) throw ArgumentError("ssim: shape mismatch");
    const int win = 11;
    if (ref.rows() < win || ref.cols() < win)
        throw ArgumentError("ssim: grid smaller than the 11x11 window");

    const auto a = magnitudes(ref);
    const auto b = magnitudes(test);
    const int rows = ref.rows(), cols = ref.cols();

    double range = 0.0;
    for (double v : a) range = std::max(range, v);
    if (range <= 0.0) range = 1.0;
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);

    // 11x11 Gaussian window, sd 1.5, normalized
    double w[win][win];
    double wsum = 0.0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double di = i - 5.0, dj = j - 5.0;
            w[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * 1.5 * 1.5));
            wsum += w[i][j];
        }
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) w[i][j] /= wsum;

    double acc = 0.0;
    long count = 0;
    for (int r = 0; r + win <= rows; ++r)
        for (int c = 0; c + win <= cols; ++c) {
            double mu_a = 0.0, mu_b = 0.0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const size_t idx = static_cast<size_t>(r + i) * cols + (c + j);
                    mu_a += w[i][j] * a[idx];
                    mu_b += w[i][j] * b[idx];
                }
            double var_a = 0.0, var_b = 0.0, cov = 0.0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const size_t idx = static_cast<size_t>(r + i) * cols + (c + j);
                    const double da = a[idx] - mu_a, db = b[idx] - mu_b;
                    var_a += w[i][j] * da * da;
                    var_b += w[i][j] * db * db;
                    cov += w[i][j] * da * db;
                }
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            acc += num / den;
            ++count;
        }
    return acc / static_cast<double>(count);
}

} // namespace mri
