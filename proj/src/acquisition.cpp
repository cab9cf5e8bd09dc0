#include "mrprior/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "mrprior/errors.hpp"
#include "mrprior/random.hpp"

namespace mri {

ComplexGrid CoilSet::rss() const {
    if (maps.empty()) throw ArgumentError("CoilSet::rss: no maps");
    ComplexGrid out(rows(), cols());
    for (const auto& m : maps)
        for (size_t i = 0; i < out.size(); ++i) out[i] += std::norm(m[i]);
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i].real());
    return out;
}

namespace {

// White complex Gaussian field restricted to the central `fraction` of
// k-space along each axis, returned in image space (unnormalized).
ComplexGrid lowpass_field(int rows, int cols, double fraction, RandomStream& rng) {
    ComplexGrid ksp(rows, cols);
    const int keep_r = std::max(1, static_cast<int>(std::lround(rows * fraction)));
    const int keep_c = std::max(1, static_cast<int>(std::lround(cols * fraction)));
    // band centered on the DC pixel at (rows/2, cols/2)
    const int r0 = rows / 2 - keep_r / 2;
    const int c0 = cols / 2 - keep_c / 2;
    for (int r = r0; r < r0 + keep_r; ++r)
        for (int c = c0; c < c0 + keep_c; ++c) ksp(r, c) = rng.complex_gaussian();
    return idft_centered(ksp);
}

} // namespace

CoilSet simulate_coils(int rows, int cols, int nc, double smoothness, uint64_t seed) {
    if (nc < 1) throw ArgumentError("simulate_coils: nc must be >= 1");
    if (smoothness <= 0.0 || smoothness > 1.0)
        throw ArgumentError("simulate_coils: smoothness must be in (0, 1]");

    RandomStream rng(seed, 0x636f696c73ULL);
    CoilSet coils;
    coils.maps.reserve(nc);
    for (int j = 0; j < nc; ++j) {
        RandomStream chan = rng.fork(static_cast<uint64_t>(j));
        coils.maps.push_back(lowpass_field(rows, cols, smoothness, chan));
    }
    // joint normalization: RSS magnitude 1 at every pixel
    ComplexGrid rss = coils.rss();
    for (auto& m : coils.maps)
        for (size_t i = 0; i < m.size(); ++i) {
            const double denom = rss[i].real();
            m[i] = denom > 0.0 ? m[i] / denom : cdouble(0.0, 0.0);
        }
    return coils;
}

PhantomKind parse_phantom_kind(const std::string& name) {
    if (name == "shepp-logan") return PhantomKind::SheppLogan;
    if (name == "random-ellipses") return PhantomKind::RandomEllipses;
    throw ArgumentError("unknown phantom kind: " + name);
}

namespace {

struct Ellipse {
    double amplitude, a, b, x0, y0, phi_deg;
};

// Standard 10-ellipse head phantom (intensities stacked additively).
const Ellipse kSheppLogan[] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
};

void add_ellipse(ComplexGrid& img, const Ellipse& e) {
    const int rows = img.rows(), cols = img.cols();
    const double phi = e.phi_deg * M_PI / 180.0;
    const double cp = std::cos(phi), sp = std::sin(phi);
    for (int r = 0; r < rows; ++r) {
        const double y = -(2.0 * r / (rows - 1.0) - 1.0); // +y up
        for (int c = 0; c < cols; ++c) {
            const double x = 2.0 * c / (cols - 1.0) - 1.0;
            const double xr = (x - e.x0) * cp + (y - e.y0) * sp;
            const double yr = -(x - e.x0) * sp + (y - e.y0) * cp;
            if ((xr * xr) / (e.a * e.a) + (yr * yr) / (e.b * e.b) <= 1.0)
                img(r, c) += e.amplitude;
        }
    }
}

ComplexGrid smooth_phase(int rows, int cols, RandomStream& rng) {
    ComplexGrid field = [&] {
        ComplexGrid ksp(rows, cols);
        const int keep_r = std::max(1, rows / 12);
        const int keep_c = std::max(1, cols / 12);
        const int r0 = (rows - keep_r) / 2, c0 = (cols - keep_c) / 2;
        for (int r = r0; r < r0 + keep_r; ++r)
            for (int c = c0; c < c0 + keep_c; ++c) ksp(r, c) = rng.complex_gaussian();
        return idft_centered(ksp);
    }();
    double peak = 0.0;
    for (size_t i = 0; i < field.size(); ++i) peak = std::max(peak, std::abs(field[i].real()));
    ComplexGrid phase(rows, cols);
    if (peak > 0.0)
        for (size_t i = 0; i < field.size(); ++i)
            phase[i] = field[i].real() / peak * M_PI; // maps into (-pi, pi]
    return phase;
}

} // namespace

ComplexGrid phantom(int rows, int cols, PhantomKind kind, PhantomPhase phase, uint64_t seed) {
    if (rows < 2 || cols < 2) throw ArgumentError("phantom: grid too small");
    RandomStream rng(seed, 0x7068616e746f6dULL);

    ComplexGrid img(rows, cols);
    if (kind == PhantomKind::SheppLogan) {
        for (const auto& e : kSheppLogan) add_ellipse(img, e);
    } else {
        const int n = 4 + static_cast<int>(rng.uniform_index(5));
        for (int i = 0; i < n; ++i) {
            Ellipse e;
            e.amplitude = rng.uniform(0.25, 1.0);
            e.a = rng.uniform(0.08, 0.45);
            e.b = rng.uniform(0.08, 0.45);
            e.x0 = rng.uniform(-0.5, 0.5);
            e.y0 = rng.uniform(-0.5, 0.5);
            e.phi_deg = rng.uniform(0.0, 180.0);
            add_ellipse(img, e);
        }
    }
    double peak = 0.0;
    for (size_t i = 0; i < img.size(); ++i) {
        img[i] = std::max(0.0, img[i].real());
        peak = std::max(peak, img[i].real());
    }
    if (peak > 0.0)
        for (size_t i = 0; i < img.size(); ++i) img[i] /= peak;

    if (phase == PhantomPhase::SmoothRandom) {
        ComplexGrid ph = smooth_phase(rows, cols, rng);
        for (size_t i = 0; i < img.size(); ++i)
            img[i] = std::polar(img[i].real(), ph[i].real());
    }
    return img;
}

std::vector<ComplexGrid> forward(const ComplexGrid& img, const CoilSet& coils,
                                 const SamplingMask& mask, double noise_sd, uint64_t seed) {
    if (coils.nc() < 1) throw ArgumentError("forward: no coils");
    if (img.rows() != coils.rows() || img.cols() != coils.cols())
        throw ArgumentError("forward: image/coil shape mismatch");
    if (img.rows() != mask.rows || img.cols() != mask.cols)
        throw ArgumentError("forward: image/mask shape mismatch");

    RandomStream rng(seed, 0x666f7277617264ULL);
    std::vector<ComplexGrid> ksp;
    ksp.reserve(coils.maps.size());
    for (int j = 0; j < coils.nc(); ++j) {
        ComplexGrid chan = mask.apply(dft_centered(img.hadamard(coils.maps[j])));
        if (noise_sd > 0.0) {
            RandomStream noise = rng.fork(static_cast<uint64_t>(j));
            for (size_t i = 0; i < chan.size(); ++i)
                if (mask.kept[i]) chan[i] += noise_sd * noise.complex_gaussian();
        }
        ksp.push_back(std::move(chan));
    }
    return ksp;
}

ComplexGrid adjoint(const std::vector<ComplexGrid>& ksp, const CoilSet& coils,
                    const SamplingMask& mask) {
    if (ksp.size() != static_cast<size_t>(coils.nc()))
        throw ArgumentError("adjoint: channel count mismatch");
    ComplexGrid out(coils.rows(), coils.cols());
    for (int j = 0; j < coils.nc(); ++j) {
        if (ksp[j].rows() != mask.rows || ksp[j].cols() != mask.cols)
            throw ArgumentError("adjoint: k-space/mask shape mismatch");
        ComplexGrid img = idft_centered(mask.apply(ksp[j]));
        for (size_t i = 0; i < out.size(); ++i) out[i] += std::conj(coils.maps[j][i]) * img[i];
    }
    return out;
}

std::vector<ComplexGrid> jacobian_apply(const JointVars& m, const JointVars& dm,
                                        const SamplingMask& mask) {
    if (m.coils.nc() != dm.coils.nc()) throw ArgumentError("jacobian_apply: nc mismatch");
    if (!m.image.same_shape(dm.image)) throw ArgumentError("jacobian_apply: shape mismatch");
    std::vector<ComplexGrid> out;
    out.reserve(m.coils.maps.size());
    for (int j = 0; j < m.coils.nc(); ++j) {
        ComplexGrid term = dm.image.hadamard(m.coils.maps[j]);
        term += m.image.hadamard(dm.coils.maps[j]);
        out.push_back(mask.apply(dft_centered(term)));
    }
    return out;
}

JointVars jacobian_adjoint(const JointVars& m, const std::vector<ComplexGrid>& residual,
                           const SamplingMask& mask) {
    if (residual.size() != static_cast<size_t>(m.coils.nc()))
        throw ArgumentError("jacobian_adjoint: channel count mismatch");
    JointVars out;
    out.image = ComplexGrid(m.image.rows(), m.image.cols());
    out.coils.maps.reserve(residual.size());
    for (int j = 0; j < m.coils.nc(); ++j) {
        ComplexGrid img = idft_centered(mask.apply(residual[j]));
        for (size_t i = 0; i < img.size(); ++i)
            out.image[i] += std::conj(m.coils.maps[j][i]) * img[i];
        ComplexGrid dc(m.image.rows(), m.image.cols());
        for (size_t i = 0; i < img.size(); ++i) dc[i] = std::conj(m.image[i]) * img[i];
        out.coils.maps.push_back(std::move(dc));
    }
    return out;
}

SobolevWeight sobolev_weight(int rows, int cols, double a, double l) {
    if (a < 0.0 || l < 0.0) throw ArgumentError("sobolev_weight: a, l must be >= 0");
    SobolevWeight sw;
    sw.rows = rows;
    sw.cols = cols;
    sw.a = a;
    sw.l = l;
    sw.w.resize(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        const double kr = (r - rows / 2) / static_cast<double>(rows);
        for (int c = 0; c < cols; ++c) {
            const double kc = (c - cols / 2) / static_cast<double>(cols);
            sw.w[static_cast<size_t>(r) * cols + c] = sobolev_weight_at(kr, kc, a, l);
        }
    }
    return sw;
}

double sobolev_weight_at(double k_row, double k_col, double a, double l) {
    return std::pow(1.0 + a * (k_row * k_row + k_col * k_col), l / 2.0);
}

} // namespace mri
