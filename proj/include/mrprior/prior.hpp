#pragma once

#include <memory>
#include <optional>

#include "mrprior/grid.hpp"
#include "mrprior/schedule.hpp"

namespace mri {

// Pluggable regularizer. `score` is the gradient of the log-prior at a
// noise level (real/imag treated as independent real coordinates); `prox`
// is the proximal map of -t*log p. Implementations without a closed-form
// prox inherit the single-gradient-step approximation.
class Prior {
public:
    virtual ~Prior() = default;

    virtual ComplexGrid score(const ComplexGrid& x, int level) const = 0;
    virtual ComplexGrid prox(const ComplexGrid& z, double t, int level) const;
    virtual bool has_exact_prox() const { return false; }
    virtual const char* name() const = 0;
};

// prox_t(z) ~= z + t * score(z): one gradient-descent step on the prox
// objective with unit step, used whenever no exact prox exists.
ComplexGrid prox_gradient_step(const Prior& prior, const ComplexGrid& z, double t, int level);

// log p(x) = -1/2 |x|^2. Score -x, exact prox z/(1+t).
class L2Prior final : public Prior {
public:
    ComplexGrid score(const ComplexGrid& x, int level) const override;
    ComplexGrid prox(const ComplexGrid& z, double t, int level) const override;
    bool has_exact_prox() const override { return true; }
    const char* name() const override { return "l2"; }
};

// log p(x) = -|Psi x|_1 with Psi the orthonormal Haar transform.
// Exact prox via magnitude soft thresholding of detail coefficients.
class L1WaveletPrior final : public Prior {
public:
    explicit L1WaveletPrior(int levels = 4) : levels_(levels) {}

    ComplexGrid score(const ComplexGrid& x, int level) const override;
    ComplexGrid prox(const ComplexGrid& z, double t, int level) const override;
    bool has_exact_prox() const override { return true; }
    const char* name() const override { return "l1wav"; }
    int levels() const { return levels_; }

private:
    int levels_;
};

// Analytic Gaussian prior, diagonal in the DFT basis. Stands in for a
// learned density wherever machinery needs a closed-form oracle: its
// sigma-smoothed family, scores and proximal maps are all exact.
struct GaussianPriorParams {
    ComplexGrid mean;
    std::vector<double> precision_spectrum; // row-major over the DFT grid, > 0
};

// Gradient of log p_sigma at x, where p_sigma is the prior convolved with
// complex Gaussian noise of per-component variance sigma^2:
//   log p_sigma(x) = -1/2 sum_k |X_k - M_k|^2 / (1/p_k + sigma^2), X = Fx.
ComplexGrid gaussian_score(const GaussianPriorParams& params, const ComplexGrid& x, double sigma);

double gaussian_log_density(const GaussianPriorParams& params, const ComplexGrid& x,
                            double sigma);

class GaussianPrior final : public Prior {
public:
    // Without a schedule the prior is evaluated unsmoothed (sigma = 0) at
    // every level; with one, level i uses sigma_i.
    explicit GaussianPrior(GaussianPriorParams params,
                           std::optional<NoiseSchedule> sched = std::nullopt)
        : params_(std::move(params)), schedule_(std::move(sched)) {}

    ComplexGrid score(const ComplexGrid& x, int level) const override;
    ComplexGrid prox(const ComplexGrid& z, double t, int level) const override;
    bool has_exact_prox() const override { return true; }
    const char* name() const override { return "gauss"; }

    const GaussianPriorParams& params() const { return params_; }
    double sigma_at(int level) const;

private:
    GaussianPriorParams params_;
    std::optional<NoiseSchedule> schedule_;
};

// Convenience oracle: zero mean with precision growing with |k| (favors
// spectrally smooth images). Used by tests and the CLI's gauss prior.
GaussianPriorParams smooth_gaussian_params(int rows, int cols, double base_precision = 1.0,
                                           double growth = 400.0);

void write_gaussian_params(const std::string& base, const GaussianPriorParams& params);
GaussianPriorParams read_gaussian_params(const std::string& base);

} // namespace mri
