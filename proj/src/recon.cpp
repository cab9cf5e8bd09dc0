#include "mrprior/recon.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrprior/errors.hpp"
#include "mrprior/random.hpp"

namespace mri {

ComplexGrid NlinvResult::coil_combined() const {
    ComplexGrid rss = coils.rss();
    ComplexGrid out(image.rows(), image.cols());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::abs(image[i]) * rss[i].real();
    return out;
}

ComplexGrid zero_filled_rss(const std::vector<ComplexGrid>& ksp, const SamplingMask& mask) {
    if (ksp.empty()) throw ArgumentError("zero_filled_rss: no channels");
    ComplexGrid acc(ksp[0].rows(), ksp[0].cols());
    for (const auto& chan : ksp) {
        ComplexGrid img = idft_centered(mask.apply(chan));
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += std::norm(img[i]);
    }
    for (size_t i = 0; i < acc.size(); ++i) acc[i] = std::sqrt(acc[i].real());
    return acc;
}

double kspace_normalization_scale(const std::vector<ComplexGrid>& ksp,
                                  const SamplingMask& mask) {
    const double peak = zero_filled_rss(ksp, mask).max_abs();
    if (peak <= 0.0) return 1.0;
    return 1.0 / peak;
}

namespace {

std::vector<ComplexGrid> scaled(const std::vector<ComplexGrid>& ksp, double s) {
    std::vector<ComplexGrid> out = ksp;
    for (auto& g : out) g *= cdouble(s, 0.0);
    return out;
}

double stack_norm(const std::vector<ComplexGrid>& s) {
    double acc = 0.0;
    for (const auto& g : s) acc += g.norm2() * g.norm2();
    return std::sqrt(acc);
}

} // namespace

CoilSet estimate_coils_calib(const std::vector<ComplexGrid>& ksp, const SamplingMask& mask,
                             int calib_rows, int calib_cols) {
    if (ksp.empty()) throw ArgumentError("estimate_coils_calib: no channels");
    const int rows = ksp[0].rows(), cols = ksp[0].cols();
    if (calib_rows <= 0) calib_rows = mask.calib_rows;
    if (calib_cols <= 0) calib_cols = mask.calib_cols;
    if (calib_rows <= 0 || calib_cols <= 0)
        throw ConfigError("estimate_coils_calib: mask has no calibration block");

    const int r0 = (rows - calib_rows) / 2;
    const int c0 = (cols - calib_cols) / 2;

    // apodized calibration block, zero-padded back to the full grid
    std::vector<ComplexGrid> low_res;
    low_res.reserve(ksp.size());
    for (const auto& chan : ksp) {
        ComplexGrid padded(rows, cols);
        for (int r = 0; r < calib_rows; ++r) {
            const double wr = 0.5 - 0.5 * std::cos(2.0 * M_PI * (r + 0.5) / calib_rows);
            for (int c = 0; c < calib_cols; ++c) {
                const double wc = 0.5 - 0.5 * std::cos(2.0 * M_PI * (c + 0.5) / calib_cols);
                padded(r0 + r, c0 + c) = chan(r0 + r, c0 + c) * (wr * wc);
            }
        }
        low_res.push_back(idft_centered(padded));
    }

    ComplexGrid rss(rows, cols);
    for (const auto& img : low_res)
        for (size_t i = 0; i < rss.size(); ++i) rss[i] += std::norm(img[i]);
    double rss_max = 0.0;
    for (size_t i = 0; i < rss.size(); ++i) {
        rss[i] = std::sqrt(rss[i].real());
        rss_max = std::max(rss_max, rss[i].real());
    }

    CoilSet coils;
    coils.maps.reserve(low_res.size());
    if (rss_max <= 0.0) {
        // degenerate all-zero calibration data: zero maps
        for (size_t j = 0; j < low_res.size(); ++j) coils.maps.push_back(ComplexGrid(rows, cols));
        return coils;
    }
    const double floor = 1e-3 * rss_max;
    for (auto& img : low_res) {
        for (size_t i = 0; i < img.size(); ++i) img[i] /= std::max(floor, rss[i].real());
        coils.maps.push_back(std::move(img));
    }
    return coils;
}

namespace {

// Largest eigenvalue of x -> adjoint(forward(x)) by power iteration,
// inflated by a 5% safety margin.
double lipschitz_normal(const CoilSet& coils, const SamplingMask& mask, uint64_t seed) {
    RandomStream rng(seed, 0x706f776572ULL);
    ComplexGrid v(coils.rows(), coils.cols());
    for (size_t i = 0; i < v.size(); ++i) v[i] = rng.complex_gaussian();
    double lambda = 1.0;
    for (int it = 0; it < 20; ++it) {
        ComplexGrid av = adjoint(forward(v, coils, mask, 0.0, 0), coils, mask);
        lambda = av.norm2() / std::max(1e-300, v.norm2());
        const double n = av.norm2();
        if (n <= 0.0) break;
        av *= cdouble(1.0 / n, 0.0);
        v = std::move(av);
    }
    return 1.05 * std::max(lambda, 1e-12);
}

} // namespace

PicsResult pics_cg(const std::vector<ComplexGrid>& ksp, const CoilSet& coils,
                   const SamplingMask& mask, double alpha, const PicsConfig& cfg) {
    if (alpha <= 0.0) throw ArgumentError("pics_cg: alpha must be > 0");
    const double scale = cfg.normalize_data ? kspace_normalization_scale(ksp, mask) : 1.0;
    auto y = scaled(ksp, scale);

    ComplexGrid rhs = adjoint(y, coils, mask);
    auto normal_op = [&](const ComplexGrid& x) {
        ComplexGrid out = adjoint(forward(x, coils, mask, 0.0, 0), coils, mask);
        ComplexGrid reg = x;
        reg *= cdouble(alpha, 0.0);
        return out + reg;
    };

    ComplexGrid x(rhs.rows(), rhs.cols());
    ComplexGrid r = rhs;
    ComplexGrid p = r;
    double rho = std::pow(r.norm2(), 2);
    const double rhs_norm = rhs.norm2();
    const int cap = std::max(cfg.iterations, 1);

    PicsResult result;
    int it = 0;
    for (; it < cap && std::sqrt(rho) > cfg.cg_tolerance * rhs_norm; ++it) {
        ComplexGrid ap = normal_op(p);
        const double denom = dot(p, ap).real();
        if (denom <= 0.0) break;
        const double step = rho / denom;
        ComplexGrid sp = p;
        sp *= cdouble(step, 0.0);
        x += sp;
        ComplexGrid sap = ap;
        sap *= cdouble(step, 0.0);
        r -= sap;
        const double rho_new = std::pow(r.norm2(), 2);
        ComplexGrid pn = r;
        ComplexGrid sp2 = p;
        sp2 *= cdouble(rho_new / rho, 0.0);
        p = pn + sp2;
        rho = rho_new;
    }
    result.iterations = it;
    result.residual = rhs_norm > 0.0 ? r.norm2() / rhs_norm : 0.0;
    if (result.residual > cfg.cg_tolerance) {
        std::ostringstream msg;
        msg << "pics_cg stagnated at relative residual " << result.residual << " after " << it
            << " iterations";
        result.warnings.push_back(msg.str());
    }
    if (!x.all_finite()) throw NumericalError("pics_cg produced non-finite iterate");
    x *= cdouble(1.0 / scale, 0.0);
    result.image = std::move(x);
    return result;
}

PicsResult pics_fista(const std::vector<ComplexGrid>& ksp, const CoilSet& coils,
                      const SamplingMask& mask, const Prior& prior, double alpha,
                      const PicsConfig& cfg) {
    if (alpha < 0.0) throw ArgumentError("pics_fista: alpha must be >= 0");
    const double scale = cfg.normalize_data ? kspace_normalization_scale(ksp, mask) : 1.0;
    auto y = scaled(ksp, scale);

    const double lips = lipschitz_normal(coils, mask, cfg.seed);
    const double step = 1.0 / lips;
    const int iters = std::max(1, cfg.iterations);

    auto data_grad = [&](const ComplexGrid& v) {
        auto r = forward(v, coils, mask, 0.0, 0);
        for (size_t j = 0; j < r.size(); ++j) r[j] -= y[j];
        return adjoint(r, coils, mask);
    };
    auto objective = [&](const ComplexGrid& v) {
        auto r = forward(v, coils, mask, 0.0, 0);
        for (size_t j = 0; j < r.size(); ++j) r[j] -= y[j];
        return 0.5 * stack_norm(r) * stack_norm(r);
    };

    ComplexGrid x = adjoint(y, coils, mask);
    ComplexGrid z = x;
    double momentum = 1.0;
    double prev_obj = objective(x);

    PicsResult result;
    for (int k = 1; k <= iters; ++k) {
        ComplexGrid g = data_grad(z);
        g *= cdouble(step, 0.0);
        ComplexGrid v = z - g;

        const int level = cfg.bind_schedule ? k : iters;
        // exact proximal maps scale with the gradient step; the
        // gradient-step approximation for learned priors uses alpha itself
        const double t = prior.has_exact_prox() ? alpha * step : alpha;
        ComplexGrid x_next = alpha > 0.0 ? prior.prox(v, t, level) : v;
        if (!x_next.all_finite()) {
            std::ostringstream msg;
            msg << "pics_fista produced a non-finite iterate at iteration " << k;
            throw NumericalError(msg.str());
        }

        const double obj = objective(x_next);
        if (obj > prev_obj) {
            momentum = 1.0; // restart
        }
        prev_obj = obj;

        const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        ComplexGrid diff = x_next - x;
        diff *= cdouble((momentum - 1.0) / momentum_next, 0.0);
        z = x_next + diff;
        momentum = momentum_next;
        x = std::move(x_next);
    }
    result.iterations = iters;
    x *= cdouble(1.0 / scale, 0.0);
    result.image = std::move(x);
    return result;
}

namespace {

// Internal NLINV state: coils are carried as Sobolev-weighted k-space
// coefficients c_hat = w o F c, so the coil penalty is a plain l2 norm and
// the linearized systems stay well conditioned.
struct NlinvOps {
    const SamplingMask& mask;
    SobolevWeight sw;
    int rows, cols, nc;

    ComplexGrid coil_from_hat(const ComplexGrid& hat) const {
        ComplexGrid k = hat;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) k(r, c) /= sw.at(r, c);
        return idft_centered(k);
    }
    ComplexGrid hat_adjoint(const ComplexGrid& img) const {
        ComplexGrid k = dft_centered(img);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) k(r, c) /= sw.at(r, c);
        return k;
    }

    CoilSet coils_from_hats(const std::vector<ComplexGrid>& hats) const {
        CoilSet cs;
        for (const auto& h : hats) cs.maps.push_back(coil_from_hat(h));
        return cs;
    }
};

struct ProductVec {
    ComplexGrid image;
    std::vector<ComplexGrid> hats;

    ProductVec scaled_copy(double s) const {
        ProductVec out = *this;
        out.image *= cdouble(s, 0.0);
        for (auto& h : out.hats) h *= cdouble(s, 0.0);
        return out;
    }
    void axpy(double a, const ProductVec& other) {
        ComplexGrid tmp = other.image;
        tmp *= cdouble(a, 0.0);
        image += tmp;
        for (size_t j = 0; j < hats.size(); ++j) {
            ComplexGrid th = other.hats[j];
            th *= cdouble(a, 0.0);
            hats[j] += th;
        }
    }
    double norm() const {
        double acc = image.norm2() * image.norm2();
        for (const auto& h : hats) acc += h.norm2() * h.norm2();
        return std::sqrt(acc);
    }
    double inner(const ProductVec& other) const {
        double acc = dot(image, other.image).real();
        for (size_t j = 0; j < hats.size(); ++j) acc += dot(hats[j], other.hats[j]).real();
        return acc;
    }
};

} // namespace

NlinvResult nlinv(const std::vector<ComplexGrid>& ksp, const SamplingMask& mask,
                  const NlinvConfig& cfg, const Prior& prior) {
    if (ksp.empty()) throw ArgumentError("nlinv: no k-space channels");
    if (cfg.reg_steps < 0 || cfg.reg_steps > cfg.gn_steps)
        throw ArgumentError("nlinv: need 0 <= reg_steps <= gn_steps");
    if (cfg.alpha_min < 0.0) throw ArgumentError("nlinv: alpha_min must be >= 0");

    const int rows = ksp[0].rows(), cols = ksp[0].cols();
    const int nc = static_cast<int>(ksp.size());
    const double scale = cfg.normalize_data ? kspace_normalization_scale(ksp, mask) : 1.0;
    auto y = scaled(ksp, scale);

    NlinvOps ops{mask, sobolev_weight(rows, cols, cfg.sobolev_a, cfg.sobolev_l), rows, cols, nc};

    // m = (x, c_hat); x0 = 1, c0 = 0
    ProductVec m;
    m.image = ComplexGrid(rows, cols, cdouble(1.0, 0.0));
    m.hats.assign(static_cast<size_t>(nc), ComplexGrid(rows, cols));

    auto model = [&](const ProductVec& v) {
        return forward(v.image, ops.coils_from_hats(v.hats), mask, 0.0, 0);
    };
    auto jac_apply = [&](const ProductVec& at, const ProductVec& dv) {
        JointVars base{at.image, ops.coils_from_hats(at.hats)};
        JointVars delta{dv.image, ops.coils_from_hats(dv.hats)};
        return jacobian_apply(base, delta, mask);
    };
    auto jac_adjoint = [&](const ProductVec& at, const std::vector<ComplexGrid>& res) {
        JointVars base{at.image, ops.coils_from_hats(at.hats)};
        JointVars adj = jacobian_adjoint(base, res, mask);
        ProductVec out;
        out.image = std::move(adj.image);
        for (auto& dc : adj.coils.maps) out.hats.push_back(ops.hat_adjoint(dc));
        return out;
    };

    NlinvResult result;
    double alpha = cfg.alpha0;
    double beta = cfg.beta0;
    double prev_residual = -1.0;

    for (int k = 0; k < cfg.gn_steps; ++k) {
        result.alpha_trace.push_back(alpha);
        auto fm = model(m);
        std::vector<ComplexGrid> b = y;
        for (int j = 0; j < nc; ++j) b[j] -= fm[j];

        const bool l2_stage = k < cfg.gn_steps - cfg.reg_steps;
        ProductVec dm;
        dm.image = ComplexGrid(rows, cols);
        dm.hats.assign(static_cast<size_t>(nc), ComplexGrid(rows, cols));

        if (l2_stage) {
            // CG on (J^H J + alpha P_x + beta P_c) dm = J^H b - alpha x - beta c_hat.
            // The image term matches the l2 prior's prox convention
            // (R = 1/2 |x|^2) so that the r = n FISTA path solves the
            // identical sub-problem; the coil term likewise uses
            // beta/2 * ||c_hat||^2.
            auto normal_op = [&](const ProductVec& v) {
                ProductVec out = jac_adjoint(m, jac_apply(m, v));
                out.axpy(alpha, ProductVec{v.image, std::vector<ComplexGrid>(
                                                        static_cast<size_t>(nc),
                                                        ComplexGrid(rows, cols))});
                ProductVec coil_only;
                coil_only.image = ComplexGrid(rows, cols);
                coil_only.hats = v.hats;
                out.axpy(beta, coil_only);
                return out;
            };
            ComplexGrid image_dev = m.image;
            if (cfg.l2_toward_init) image_dev -= ComplexGrid(rows, cols, cdouble(1.0, 0.0));
            ProductVec rhs = jac_adjoint(m, b);
            rhs.axpy(-alpha, ProductVec{image_dev, std::vector<ComplexGrid>(
                                                       static_cast<size_t>(nc),
                                                       ComplexGrid(rows, cols))});
            ProductVec coil_pen;
            coil_pen.image = ComplexGrid(rows, cols);
            coil_pen.hats = m.hats;
            rhs.axpy(-beta, coil_pen);

            ProductVec r = rhs;
            ProductVec p = r;
            double rho = r.inner(r);
            const double rhs_norm = std::sqrt(std::max(rho, 0.0));
            for (int it = 0; it < cfg.inner_cg && std::sqrt(rho) > 1e-10 * rhs_norm; ++it) {
                ProductVec ap = normal_op(p);
                const double denom = p.inner(ap);
                if (denom <= 0.0) break;
                const double step = rho / denom;
                dm.axpy(step, p);
                r.axpy(-step, ap);
                const double rho_new = r.inner(r);
                ProductVec pn = r;
                pn.axpy(rho_new / rho, p);
                p = std::move(pn);
                rho = rho_new;
            }
        } else {
            // FISTA: smooth part 1/2 |J dm - b|^2 + beta |c_hat + dc|^2,
            // prox of alpha R applied to x + dx
            RandomStream rng(cfg.seed, 0x6e6c696e76ULL);
            ProductVec v;
            v.image = ComplexGrid(rows, cols);
            for (size_t i = 0; i < v.image.size(); ++i) v.image[i] = rng.complex_gaussian();
            v.hats.assign(static_cast<size_t>(nc), ComplexGrid(rows, cols));
            for (auto& h : v.hats)
                for (size_t i = 0; i < h.size(); ++i) h[i] = rng.complex_gaussian();
            double lips = 1.0;
            for (int it = 0; it < 20; ++it) {
                ProductVec av = jac_adjoint(m, jac_apply(m, v));
                ProductVec coil_only;
                coil_only.image = ComplexGrid(rows, cols);
                coil_only.hats = v.hats;
                av.axpy(beta, coil_only);
                lips = av.norm() / std::max(1e-300, v.norm());
                const double n = av.norm();
                if (n <= 0.0) break;
                v = av.scaled_copy(1.0 / n);
            }
            lips = 1.05 * std::max(lips, 1e-12);
            const double step = 1.0 / lips;

            ProductVec z = dm;
            double momentum = 1.0;
            for (int it = 1; it <= cfg.inner_fista; ++it) {
                auto res = jac_apply(m, z);
                for (int j = 0; j < nc; ++j) res[j] -= b[j];
                ProductVec grad = jac_adjoint(m, res);
                ProductVec coil_only;
                coil_only.image = ComplexGrid(rows, cols);
                coil_only.hats = z.hats;
                for (size_t j = 0; j < coil_only.hats.size(); ++j) {
                    coil_only.hats[j] += m.hats[j];
                }
                grad.axpy(beta, coil_only);

                ProductVec w = z;
                w.axpy(-step, grad);

                // prior acts on the image evaluated at x^k + dx
                ComplexGrid arg = m.image + w.image;
                const double t = prior.has_exact_prox() ? alpha * step : alpha;
                ComplexGrid proxed = alpha > 0.0 ? prior.prox(arg, t, k + 1) : arg;
                if (!proxed.all_finite())
                    throw NumericalError("nlinv: non-finite prox output in FISTA stage");

                ProductVec dm_next;
                dm_next.image = proxed - m.image;
                dm_next.hats = w.hats;

                const double momentum_next =
                    0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
                ProductVec zn = dm_next;
                ProductVec diff = dm_next;
                diff.axpy(-1.0, dm);
                zn.axpy((momentum - 1.0) / momentum_next, diff);
                z = std::move(zn);
                momentum = momentum_next;
                dm = std::move(dm_next);
            }
        }

        m.axpy(1.0, dm);
        if (!m.image.all_finite()) throw NumericalError("nlinv: non-finite iterate");

        auto fm_new = model(m);
        std::vector<ComplexGrid> res_new = y;
        for (int j = 0; j < nc; ++j) res_new[j] -= fm_new[j];
        const double residual = stack_norm(res_new);
        if (prev_residual >= 0.0 && residual > prev_residual * (1.0 + 1e-9)) {
            std::ostringstream msg;
            msg << "nlinv: data residual increased at Gauss-Newton step " << k << " ("
                << prev_residual << " -> " << residual << ")";
            result.warnings.push_back(msg.str());
        }
        prev_residual = residual;
        result.residual_trace.push_back(residual);

        alpha = std::max(cfg.alpha_min, alpha / 2.0);
        beta = beta / 2.0;
    }

    result.coils = ops.coils_from_hats(m.hats);
    m.image *= cdouble(1.0 / scale, 0.0);
    result.image = std::move(m.image);
    return result;
}

} // namespace mri
