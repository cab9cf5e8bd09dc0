#include "mrprior/prior.hpp"

#include <cmath>

#include "mrprior/arrayfile.hpp"
#include "mrprior/errors.hpp"
#include "mrprior/wavelet.hpp"

namespace mri {

ComplexGrid Prior::prox(const ComplexGrid& z, double t, int level) const {
    return prox_gradient_step(*this, z, t, level);
}

ComplexGrid prox_gradient_step(const Prior& prior, const ComplexGrid& z, double t, int level) {
    if (t < 0.0) throw ArgumentError("prox_gradient_step: t must be >= 0");
    if (t == 0.0) return z;
    ComplexGrid g = prior.score(z, level);
    if (!g.all_finite())
        throw NumericalError(std::string("non-finite score from prior '") + prior.name() + "'");
    g *= cdouble(t, 0.0);
    return z + g;
}

ComplexGrid L2Prior::score(const ComplexGrid& x, int) const {
    ComplexGrid g = x;
    g *= cdouble(-1.0, 0.0);
    return g;
}

ComplexGrid L2Prior::prox(const ComplexGrid& z, double t, int) const {
    if (t == 0.0) return z;
    ComplexGrid out = z;
    out *= cdouble(1.0 / (1.0 + t), 0.0);
    return out;
}

ComplexGrid L1WaveletPrior::score(const ComplexGrid& x, int) const {
    // subgradient -Psi^H sign(Psi x); the prox is what solvers use
    ComplexGrid coeffs = haar_forward(x, levels_);
    for (size_t i = 0; i < coeffs.size(); ++i) {
        const double mag = std::abs(coeffs[i]);
        coeffs[i] = mag > 1e-12 ? -coeffs[i] / mag : cdouble(0.0, 0.0);
    }
    return haar_inverse(coeffs, levels_);
}

ComplexGrid L1WaveletPrior::prox(const ComplexGrid& z, double t, int) const {
    if (t == 0.0) return z;
    return l1_wavelet_prox(z, t, levels_);
}

namespace {

void check_params(const GaussianPriorParams& params, const ComplexGrid& x) {
    if (!params.mean.same_shape(x)) throw ArgumentError("gaussian prior: shape mismatch");
    if (params.precision_spectrum.size() != x.size())
        throw ArgumentError("gaussian prior: precision spectrum size mismatch");
}

} // namespace

ComplexGrid gaussian_score(const GaussianPriorParams& params, const ComplexGrid& x,
                           double sigma) {
    check_params(params, x);
    ComplexGrid spec = dft_centered(x - params.mean);
    for (size_t i = 0; i < spec.size(); ++i) {
        const double variance = 1.0 / params.precision_spectrum[i] + sigma * sigma;
        spec[i] = -spec[i] / variance;
    }
    return idft_centered(spec);
}

double gaussian_log_density(const GaussianPriorParams& params, const ComplexGrid& x,
                            double sigma) {
    check_params(params, x);
    ComplexGrid spec = dft_centered(x - params.mean);
    double acc = 0.0;
    for (size_t i = 0; i < spec.size(); ++i) {
        const double variance = 1.0 / params.precision_spectrum[i] + sigma * sigma;
        acc += std::norm(spec[i]) / variance;
    }
    return -0.5 * acc;
}

double GaussianPrior::sigma_at(int level) const {
    if (!schedule_) return 0.0;
    const int n = schedule_->n_scales;
    const int clamped = level < 0 ? 0 : (level > n ? n : level);
    return schedule_->sigma(clamped);
}

ComplexGrid GaussianPrior::score(const ComplexGrid& x, int level) const {
    return gaussian_score(params_, x, sigma_at(level));
}

ComplexGrid GaussianPrior::prox(const ComplexGrid& z, double t, int level) const {
    if (t == 0.0) return z;
    check_params(params_, z);
    const double sigma = sigma_at(level);
    // diagonal in the DFT basis: X = (Z + t q M) / (1 + t q), q the
    // smoothed precision
    ComplexGrid zs = dft_centered(z);
    ComplexGrid ms = dft_centered(params_.mean);
    for (size_t i = 0; i < zs.size(); ++i) {
        const double q = 1.0 / (1.0 / params_.precision_spectrum[i] + sigma * sigma);
        zs[i] = (zs[i] + t * q * ms[i]) / (1.0 + t * q);
    }
    return idft_centered(zs);
}

GaussianPriorParams smooth_gaussian_params(int rows, int cols, double base_precision,
                                           double growth) {
    GaussianPriorParams params;
    params.mean = ComplexGrid(rows, cols);
    params.precision_spectrum.resize(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        const double kr = (r - rows / 2) / static_cast<double>(rows);
        for (int c = 0; c < cols; ++c) {
            const double kc = (c - cols / 2) / static_cast<double>(cols);
            params.precision_spectrum[static_cast<size_t>(r) * cols + c] =
                base_precision * (1.0 + growth * (kr * kr + kc * kc));
        }
    }
    return params;
}

void write_gaussian_params(const std::string& base, const GaussianPriorParams& params) {
    write_grid(base + ".mean", params.mean);
    ComplexGrid prec(params.mean.rows(), params.mean.cols());
    for (size_t i = 0; i < prec.size(); ++i) prec[i] = params.precision_spectrum[i];
    write_grid(base + ".prec", prec);
}

GaussianPriorParams read_gaussian_params(const std::string& base) {
    GaussianPriorParams params;
    params.mean = read_grid(base + ".mean");
    ComplexGrid prec = read_grid(base + ".prec");
    if (!prec.same_shape(params.mean))
        throw FormatError(base + ": mean/precision shape mismatch");
    params.precision_spectrum.resize(prec.size());
    for (size_t i = 0; i < prec.size(); ++i) {
        const double p = prec[i].real();
        if (p <= 0.0) throw FormatError(base + ": precision spectrum must be positive");
        params.precision_spectrum[i] = p;
    }
    return params;
}

} // namespace mri
