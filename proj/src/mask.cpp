#include "mrprior/mask.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrprior/errors.hpp"
#include "mrprior/random.hpp"

namespace mri {

size_t SamplingMask::kept_count() const {
    size_t n = 0;
    for (uint8_t k : kept) n += k;
    return n;
}

double SamplingMask::kept_fraction() const {
    return static_cast<double>(kept_count()) / (static_cast<double>(rows) * cols);
}

ComplexGrid SamplingMask::apply(const ComplexGrid& ksp) const {
    if (ksp.rows() != rows || ksp.cols() != cols)
        throw ArgumentError("mask/k-space shape mismatch");
    ComplexGrid out = ksp;
    for (size_t i = 0; i < out.size(); ++i)
        if (!kept[i]) out[i] = 0.0;
    return out;
}

ComplexGrid SamplingMask::to_grid() const {
    ComplexGrid g(rows, cols);
    for (size_t i = 0; i < kept.size(); ++i) g[i] = kept[i] ? 1.0 : 0.0;
    return g;
}

namespace {

void fill_center_block(SamplingMask& m, int calib_rows, int calib_cols) {
    if (calib_rows <= 0 || calib_cols <= 0) return;
    const int r0 = (m.rows - calib_rows) / 2;
    const int c0 = (m.cols - calib_cols) / 2;
    for (int r = r0; r < r0 + calib_rows; ++r)
        for (int c = c0; c < c0 + calib_cols; ++c)
            m.kept[static_cast<size_t>(r) * m.cols + c] = 1;
    m.calib_rows = calib_rows;
    m.calib_cols = calib_cols;
}

void finalize_acceleration(SamplingMask& m) {
    const size_t kept = m.kept_count();
    m.acceleration =
        kept == 0 ? 0.0 : static_cast<double>(m.rows) * m.cols / static_cast<double>(kept);
}

} // namespace

SamplingMask SamplingMask::from_grid(const ComplexGrid& g) {
    SamplingMask m;
    m.rows = g.rows();
    m.cols = g.cols();
    m.kept.resize(g.size());
    for (size_t i = 0; i < g.size(); ++i) m.kept[i] = std::abs(g[i]) > 0.5 ? 1 : 0;

    // largest centered block that is fully kept
    auto block_full = [&](int cr, int cc) {
        const int r0 = (m.rows - cr) / 2, c0 = (m.cols - cc) / 2;
        for (int r = r0; r < r0 + cr; ++r)
            for (int c = c0; c < c0 + cc; ++c)
                if (!m.at(r, c)) return false;
        return true;
    };
    int best_r = 0, best_c = 0;
    for (int cr = m.rows; cr >= 1; --cr) {
        // widest kept block at this height; area-maximal wins
        int lo = 1, hi = m.cols, width = 0;
        if (!block_full(cr, 1)) continue;
        while (lo <= hi) {
            const int mid = (lo + hi) / 2;
            if (block_full(cr, mid)) {
                width = mid;
                lo = mid + 1;
            } else {
                hi = mid - 1;
            }
        }
        if (cr * width > best_r * best_c) {
            best_r = cr;
            best_c = width;
        }
    }
    m.calib_rows = best_r;
    m.calib_cols = best_c;
    finalize_acceleration(m);
    return m;
}

SamplingMask make_mask_1d(int rows, int cols, int accel, int calib_lines, uint64_t) {
    if (rows < 1 || cols < 1) throw ArgumentError("make_mask_1d: empty grid");
    if (accel < 1) throw ArgumentError("make_mask_1d: accel must be >= 1");
    if (calib_lines > cols) throw ArgumentError("make_mask_1d: calib_lines exceeds cols");

    SamplingMask m;
    m.rows = rows;
    m.cols = cols;
    m.kept.assign(static_cast<size_t>(rows) * cols, 0);
    for (int c = 0; c < cols; c += accel)
        for (int r = 0; r < rows; ++r) m.kept[static_cast<size_t>(r) * cols + c] = 1;
    if (calib_lines > 0) fill_center_block(m, rows, calib_lines);
    finalize_acceleration(m);
    return m;
}

SamplingMask make_mask_2d(int rows, int cols, int accel_r, int accel_c, int calib_rows,
                          int calib_cols) {
    if (rows < 1 || cols < 1) throw ArgumentError("make_mask_2d: empty grid");
    if (accel_r < 1 || accel_c < 1) throw ArgumentError("make_mask_2d: accel must be >= 1");
    if (calib_rows > rows || calib_cols > cols)
        throw ArgumentError("make_mask_2d: calibration block exceeds grid");

    SamplingMask m;
    m.rows = rows;
    m.cols = cols;
    m.kept.assign(static_cast<size_t>(rows) * cols, 0);
    for (int r = 0; r < rows; r += accel_r)
        for (int c = 0; c < cols; c += accel_c) m.kept[static_cast<size_t>(r) * cols + c] = 1;
    fill_center_block(m, calib_rows, calib_cols);
    finalize_acceleration(m);
    return m;
}

namespace {

// One dart-throwing pass at a fixed base radius. Terminates when
// max_misses consecutive candidates were rejected.
void poisson_darts(SamplingMask& m, double r0, double slope, RandomStream& rng) {
    const int rows = m.rows, cols = m.cols;
    struct Pt {
        double x, y;
    };
    std::vector<Pt> points;
    // coarse occupancy grid for neighbor queries
    const double max_r = r0 * (1.0 + slope * 0.7072);
    const double cell = std::max(1.0, max_r / std::sqrt(2.0));
    const int gr = std::max(1, static_cast<int>(std::ceil(rows / cell)));
    const int gc = std::max(1, static_cast<int>(std::ceil(cols / cell)));
    std::vector<std::vector<int>> buckets(static_cast<size_t>(gr) * gc);
    const int reach = std::max(1, static_cast<int>(std::ceil(max_r / cell)));

    auto local_radius = [&](double x, double y) {
        const double kx = (x - rows / 2.0) / rows;
        const double ky = (y - cols / 2.0) / cols;
        return r0 * (1.0 + slope * std::sqrt(kx * kx + ky * ky));
    };

    int misses = 0;
    const int max_misses = 30;
    while (misses < max_misses) {
        const double x = rng.uniform() * rows;
        const double y = rng.uniform() * cols;
        const double rad = local_radius(x, y);
        const int bx = std::min(gr - 1, static_cast<int>(x / cell));
        const int by = std::min(gc - 1, static_cast<int>(y / cell));
        bool ok = true;
        for (int ix = std::max(0, bx - reach); ix <= std::min(gr - 1, bx + reach) && ok; ++ix)
            for (int iy = std::max(0, by - reach); iy <= std::min(gc - 1, by + reach) && ok;
                 ++iy)
                for (int pi : buckets[static_cast<size_t>(ix) * gc + iy]) {
                    const double dx = points[pi].x - x, dy = points[pi].y - y;
                    if (dx * dx + dy * dy < rad * rad) {
                        ok = false;
                        break;
                    }
                }
        if (!ok) {
            ++misses;
            continue;
        }
        misses = 0;
        buckets[static_cast<size_t>(bx) * gc + by].push_back(static_cast<int>(points.size()));
        points.push_back({x, y});
        const int pr = std::min(rows - 1, static_cast<int>(x));
        const int pc = std::min(cols - 1, static_cast<int>(y));
        m.kept[static_cast<size_t>(pr) * cols + pc] = 1;
    }
}

} // namespace

SamplingMask make_mask_poisson(int rows, int cols, double target_accel, int calib_rows,
                               int calib_cols, uint64_t seed, double density_slope) {
    if (rows < 1 || cols < 1) throw ArgumentError("make_mask_poisson: empty grid");
    if (target_accel <= 1.0) throw ArgumentError("make_mask_poisson: target_accel must be > 1");
    if (calib_rows > rows || calib_cols > cols)
        throw ArgumentError("make_mask_poisson: calibration block exceeds grid");

    const double target_fraction = 1.0 / target_accel;
    RandomStream rng(seed, 0x706f6973736f6eULL);

    // initial radius from the density of an ideal packing, then rescale
    // from realized fractions until within 10% of target
    double r0 = std::sqrt(target_accel / M_PI);
    double best_err = 1e30;
    SamplingMask best;
    for (int attempt = 0; attempt < 24; ++attempt) {
        SamplingMask m;
        m.rows = rows;
        m.cols = cols;
        m.kept.assign(static_cast<size_t>(rows) * cols, 0);
        RandomStream pass = rng.fork(static_cast<uint64_t>(attempt));
        poisson_darts(m, r0, density_slope, pass);
        fill_center_block(m, calib_rows, calib_cols);
        finalize_acceleration(m);

        const double frac = m.kept_fraction();
        const double err = std::abs(frac - target_fraction) / target_fraction;
        if (err < best_err) {
            best_err = err;
            best = m;
        }
        if (err <= 0.10) return m;
        // density scales like 1/r0^2
        r0 *= std::sqrt(frac / target_fraction);
        r0 = std::clamp(r0, 0.3, 0.25 * std::min(rows, cols));
    }

    std::ostringstream msg;
    msg << "make_mask_poisson: could not reach acceleration " << target_accel
        << " within 10% after bounded retries; best achieved " << best.acceleration;
    throw GenerationError(msg.str());
}

} // namespace mri
