#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mrprior/errors.hpp"
#include "mrprior/metrics.hpp"
#include "mrprior/recon.hpp"
#include "support/oracles.hpp"

using namespace mri;

namespace {

// Dense oracle for the regularized normal equations, replicating the
// solver's data normalization so both sides see the same problem.
ComplexGrid dense_normal_solve(const std::vector<ComplexGrid>& ksp, const CoilSet& coils,
                               const SamplingMask& mask, double alpha,
                               const GaussianPriorParams* gauss) {
    const int rows = coils.rows(), cols = coils.cols();
    const double scale = kspace_normalization_scale(ksp, mask);
    auto y = ksp;
    for (auto& g : y) g *= cdouble(scale, 0.0);

    auto system_op = [&](const ComplexGrid& e) {
        ComplexGrid out = adjoint(forward(e, coils, mask, 0.0, 0), coils, mask);
        if (gauss) {
            // alpha * Sigma^{-1} e in the DFT basis
            ComplexGrid spec = dft_centered(e);
            for (size_t i = 0; i < spec.size(); ++i)
                spec[i] *= alpha * gauss->precision_spectrum[i];
            out += idft_centered(spec);
        } else {
            ComplexGrid reg = e;
            reg *= cdouble(alpha, 0.0);
            out += reg;
        }
        return out;
    };
    auto A = oracle::materialize(rows, cols, system_op);

    ComplexGrid rhs_grid = adjoint(y, coils, mask);
    if (gauss) {
        ComplexGrid spec = dft_centered(gauss->mean);
        for (size_t i = 0; i < spec.size(); ++i)
            spec[i] *= alpha * gauss->precision_spectrum[i];
        rhs_grid += idft_centered(spec);
    }
    auto x = oracle::dense_solve(A, rhs_grid.data());
    ComplexGrid out(rows, cols, std::move(x));
    out *= cdouble(1.0 / scale, 0.0);
    return out;
}

} // namespace

TEST_CASE("estimate_coils_calib: unit coil recovered inside support") {
    ComplexGrid img = phantom(64, 64, PhantomKind::SheppLogan, PhantomPhase::SmoothRandom, 3);
    CoilSet unit;
    unit.maps.push_back(ComplexGrid(64, 64, cdouble(1.0, 0.0)));
    SamplingMask mask = make_mask_2d(64, 64, 1, 1, 24, 24);
    auto ksp = forward(img, unit, mask, 0.0, 0);

    CoilSet est = estimate_coils_calib(ksp, mask);
    REQUIRE(est.nc() == 1);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            if (std::abs(img(r, c)) > 0.25)
                CHECK(std::abs(est.maps[0](r, c)) == doctest::Approx(1.0).epsilon(0.05));

    // RSS of the maps is 1 wherever the floor is not engaged
    ComplexGrid rss = est.rss();
    int checked = 0;
    for (size_t i = 0; i < rss.size(); ++i)
        if (std::abs(img[i]) > 0.25) {
            CHECK(rss[i].real() == doctest::Approx(1.0).epsilon(1e-6));
            ++checked;
        }
    CHECK(checked > 250);

    // degenerate all-zero input: zero maps, no blowup
    std::vector<ComplexGrid> zeros{ComplexGrid(64, 64)};
    CoilSet zero_est = estimate_coils_calib(zeros, mask);
    CHECK(zero_est.maps[0].norm2() == 0.0);

    SamplingMask no_calib = make_mask_2d(64, 64, 2, 2, 0, 0);
    CHECK_THROWS_AS(estimate_coils_calib(ksp, no_calib), ConfigError);
}

TEST_CASE("pics_cg matches a dense direct solve at 8x8") {
    RandomStream rng(5);
    const int n = 8;
    CoilSet unit;
    unit.maps.push_back(ComplexGrid(n, n, cdouble(1.0, 0.0)));
    SamplingMask full = make_mask_1d(n, n, 1, 0);
    ComplexGrid img = oracle::random_grid(n, n, rng);
    auto ksp = forward(img, unit, full, 0.0, 0);

    const double alpha = 0.3;
    PicsResult got = pics_cg(ksp, unit, full, alpha);
    ComplexGrid want = dense_normal_solve(ksp, unit, full, alpha, nullptr);
    CHECK(oracle::rel_err(got.image, want) < 1e-8);

    // normal-equation residual certificate
    const double scale = kspace_normalization_scale(ksp, full);
    auto y = ksp;
    for (auto& g : y) g *= cdouble(scale, 0.0);
    ComplexGrid xn = got.image;
    xn *= cdouble(scale, 0.0);
    ComplexGrid lhs = adjoint(forward(xn, unit, full, 0.0, 0), unit, full);
    ComplexGrid reg = xn;
    reg *= cdouble(alpha, 0.0);
    lhs += reg;
    ComplexGrid rhs = adjoint(y, unit, full);
    CHECK((lhs - rhs).norm2() <= 1e-8 * rhs.norm2());
}

TEST_CASE("pics_cg with multiple coils and undersampling matches dense oracle") {
    RandomStream rng(7);
    const int n = 8;
    CoilSet coils = simulate_coils(n, n, 3, 0.5, 2);
    SamplingMask mask = make_mask_2d(n, n, 2, 1, 2, 2);
    ComplexGrid img = oracle::random_grid(n, n, rng);
    auto ksp = forward(img, coils, mask, 0.0, 0);

    PicsResult got = pics_cg(ksp, coils, mask, 0.05);
    ComplexGrid want = dense_normal_solve(ksp, coils, mask, 0.05, nullptr);
    CHECK(oracle::rel_err(got.image, want) < 1e-7);
}

TEST_CASE("pics_cg limits: huge alpha kills the image, alpha=0 rejected") {
    RandomStream rng(9);
    const int n = 8;
    CoilSet unit;
    unit.maps.push_back(ComplexGrid(n, n, cdouble(1.0, 0.0)));
    SamplingMask full = make_mask_1d(n, n, 1, 0);
    auto ksp = forward(oracle::random_grid(n, n, rng), unit, full, 0.0, 0);

    PicsResult small = pics_cg(ksp, unit, full, 1e8);
    CHECK(small.image.norm2() < 1e-6);

    CHECK_THROWS_AS(pics_cg(ksp, unit, full, 0.0), ArgumentError);
}

TEST_CASE("pics_fista with the Gaussian oracle prior converges to the dense MAP") {
    RandomStream rng(11);
    const int n = 16;
    CoilSet unit;
    unit.maps.push_back(ComplexGrid(n, n, cdouble(1.0, 0.0)));
    SamplingMask mask = make_mask_1d(n, n, 2, 4);
    ComplexGrid img = oracle::random_grid(n, n, rng);
    auto ksp = forward(img, unit, mask, 0.0, 0);

    GaussianPriorParams params = smooth_gaussian_params(n, n, 1.0, 40.0);
    for (size_t i = 0; i < params.mean.size(); ++i)
        params.mean[i] = 0.1 * rng.complex_gaussian();
    GaussianPrior prior(params);

    const double alpha = 0.4;
    PicsConfig cfg;
    cfg.iterations = 400;
    PicsResult got = pics_fista(ksp, unit, mask, prior, alpha, cfg);
    ComplexGrid want = dense_normal_solve(ksp, unit, mask, alpha, &params);
    CHECK(oracle::rel_err(got.image, want) < 1e-4);
}

TEST_CASE("pics_fista: alpha=0 with full sampling reaches the least-squares solution") {
    RandomStream rng(13);
    const int n = 16;
    CoilSet coils = simulate_coils(n, n, 2, 0.5, 4);
    SamplingMask full = make_mask_1d(n, n, 1, 0);
    ComplexGrid img = oracle::random_grid(n, n, rng);
    auto ksp = forward(img, coils, full, 0.0, 0);

    L2Prior prior;
    PicsConfig cfg;
    cfg.iterations = 200;
    PicsResult got = pics_fista(ksp, coils, full, prior, 0.0, cfg);
    auto resid = forward(got.image, coils, full, 0.0, 0);
    double acc = 0.0, ref = 0.0;
    for (size_t j = 0; j < resid.size(); ++j) {
        acc += std::pow((resid[j] - ksp[j]).norm2(), 2);
        ref += std::pow(ksp[j].norm2(), 2);
    }
    CHECK(std::sqrt(acc / ref) < 1e-6);
}

TEST_CASE("pics_fista l1-wavelet recovers a sparse image from 4x undersampling") {
    // sparse synthetic image: a few blocks, exactly representable in the
    // Haar basis
    const int n = 64;
    ComplexGrid img(n, n);
    for (int r = 16; r < 24; ++r)
        for (int c = 16; c < 24; ++c) img(r, c) = 1.0;
    for (int r = 40; r < 48; ++r)
        for (int c = 32; c < 40; ++c) img(r, c) = cdouble(0.0, 0.8);
    for (int r = 8; r < 16; ++r)
        for (int c = 48; c < 56; ++c) img(r, c) = 0.6;

    CoilSet coils = simulate_coils(n, n, 4, 0.25, 6);
    SamplingMask mask = make_mask_poisson(n, n, 4.0, 10, 10, 11);
    auto ksp = forward(img, coils, mask, 0.0, 0);

    L1WaveletPrior prior(4);
    PicsConfig cfg;
    cfg.iterations = 200;
    PicsResult got = pics_fista(ksp, coils, mask, prior, 2e-3, cfg);

    ComplexGrid truth_mag(n, n), got_mag(n, n);
    for (size_t i = 0; i < img.size(); ++i) {
        truth_mag[i] = std::abs(img[i]);
        got_mag[i] = std::abs(got.image[i]);
    }
    CHECK(psnr(truth_mag, got_mag) >= 40.0);
}

TEST_CASE("nlinv: full sampling, l2, 8 coils reaches 35 dB coil-combined") {
    const int n = 64;
    ComplexGrid img = phantom(n, n, PhantomKind::SheppLogan, PhantomPhase::SmoothRandom, 8);
    CoilSet coils = simulate_coils(n, n, 8, 0.05, 12);
    SamplingMask full = make_mask_1d(n, n, 1, 0);
    auto ksp = forward(img, coils, full, 0.0, 0);

    NlinvConfig cfg;
    cfg.gn_steps = 10;
    cfg.reg_steps = 0;
    L2Prior prior;
    NlinvResult res = nlinv(ksp, full, cfg, prior);

    // ground-truth coil-combined magnitude: |img| * RSS(coils) = |img|
    ComplexGrid truth(n, n);
    for (size_t i = 0; i < img.size(); ++i) truth[i] = std::abs(img[i]);
    CHECK(psnr(truth, res.coil_combined()) >= 35.0);

    // data residual non-increasing over the final 5 steps
    REQUIRE(res.residual_trace.size() == 10);
    for (size_t k = 6; k < 10; ++k)
        CHECK(res.residual_trace[k] <= res.residual_trace[k - 1] * (1.0 + 1e-9));

    // alpha halving with floor
    REQUIRE(res.alpha_trace.size() == 10);
    CHECK(res.alpha_trace[0] == 1.0);
    CHECK(res.alpha_trace[3] == 0.125);
    for (size_t k = 0; k < 10; ++k)
        CHECK(res.alpha_trace[k] == std::max(1e-4, std::pow(0.5, static_cast<double>(k))));
}

namespace {

// l2 penalty toward the all-ones initial guess: the same functional the CG
// stage minimizes, expressed as a Prior so the FISTA stage can run it.
class L2TowardInit final : public Prior {
public:
    ComplexGrid score(const ComplexGrid& x, int) const override {
        ComplexGrid g(x.rows(), x.cols(), cdouble(1.0, 0.0));
        g -= x;
        return g;
    }
    ComplexGrid prox(const ComplexGrid& z, double t, int) const override {
        ComplexGrid out = z;
        out += ComplexGrid(z.rows(), z.cols(), cdouble(t, 0.0));
        out *= cdouble(1.0 / (1.0 + t), 0.0);
        return out;
    }
    bool has_exact_prox() const override { return true; }
    const char* name() const override { return "l2-toward-init"; }
};

} // namespace

TEST_CASE("nlinv: two-stage with r=n and l2 equals single-stage l2 (pure refactor)") {
    const int n = 32;
    ComplexGrid img = phantom(n, n, PhantomKind::RandomEllipses, PhantomPhase::SmoothRandom, 2);
    CoilSet coils = simulate_coils(n, n, 4, 0.06, 3);
    SamplingMask mask = make_mask_2d(n, n, 2, 1, 8, 8);
    auto ksp = forward(img, coils, mask, 0.0, 0);

    // both configurations solve min 1/2|J dm - b|^2 + alpha/2 |x + dx - 1|^2
    // + beta/2 |c_hat + dc|^2 at every Gauss-Newton step; only the inner
    // solver differs
    NlinvConfig cg_only;
    cg_only.gn_steps = 6;
    cg_only.reg_steps = 0;
    cg_only.inner_cg = 200;
    NlinvConfig fista_only = cg_only;
    fista_only.reg_steps = 6;
    fista_only.inner_fista = 1200;

    L2Prior unused;
    L2TowardInit toward_init;
    NlinvResult a = nlinv(ksp, mask, cg_only, unused);
    NlinvResult b = nlinv(ksp, mask, fista_only, toward_init);
    CHECK(oracle::rel_err(b.coil_combined(), a.coil_combined()) < 1e-6);
}

TEST_CASE("nlinv rejects inconsistent configs") {
    std::vector<ComplexGrid> ksp{ComplexGrid(8, 8, cdouble(1.0, 0.0))};
    SamplingMask full = make_mask_1d(8, 8, 1, 0);
    L2Prior prior;
    NlinvConfig bad;
    bad.reg_steps = 12;
    bad.gn_steps = 4;
    CHECK_THROWS_AS(nlinv(ksp, full, bad, prior), ArgumentError);
}

TEST_CASE("pics and nlinv agree with the same Gaussian prior at 2x undersampling") {
    // noisy data so both methods sit at the noise-limited plateau rather
    // than at PICS's known-coil advantage
    const int n = 48;
    ComplexGrid img = phantom(n, n, PhantomKind::SheppLogan, PhantomPhase::SmoothRandom, 5);
    CoilSet coils = simulate_coils(n, n, 6, 0.05, 6);
    SamplingMask mask = make_mask_1d(n, n, 2, 12);
    auto ksp = forward(img, coils, mask, 0.02, 7);

    GaussianPriorParams params = smooth_gaussian_params(n, n, 1.0, 10.0);
    GaussianPrior prior(params);

    PicsConfig pcfg;
    pcfg.iterations = 200;
    PicsResult pics = pics_fista(ksp, coils, mask, prior, 0.05, pcfg);

    NlinvConfig ncfg;
    ncfg.gn_steps = 14;
    ncfg.reg_steps = 6;
    ncfg.inner_cg = 60;
    ncfg.inner_fista = 40;
    NlinvResult nl = nlinv(ksp, mask, ncfg, prior);

    ComplexGrid truth(n, n), pics_mag(n, n);
    for (size_t i = 0; i < img.size(); ++i) {
        truth[i] = std::abs(img[i]);
        pics_mag[i] = std::abs(pics.image[i]);
    }
    const double psnr_pics = psnr(truth, pics_mag);
    const double psnr_nlinv = psnr(truth, nl.coil_combined());
    CHECK(std::abs(psnr_pics - psnr_nlinv) <= 2.0);
    CHECK(psnr_pics > 25.0); // both must actually reconstruct
    CHECK(psnr_nlinv > 25.0);
}
