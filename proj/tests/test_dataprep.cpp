#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mrprior/acquisition.hpp"
#include "mrprior/dataprep.hpp"
#include "mrprior/errors.hpp"
#include "mrprior/metrics.hpp"
#include "mrprior/nifti.hpp"
#include "support/oracles.hpp"

using namespace mri;
namespace fs = std::filesystem;

namespace {

// Independent minimal NIfTI-1 writer (float32 or int16), used to
// synthesize inputs the parser has never seen.
void write_nifti(const std::string& path, int nx, int ny, int nz, double dx, double dy,
                 double dz, const std::vector<float>& data, int16_t datatype = 16,
                 float scl_slope = 0.0f, float scl_inter = 0.0f,
                 const char* magic = "n+1") {
    std::vector<char> hdr(348, 0);
    auto put_i32 = [&](int off, int32_t v) { std::memcpy(hdr.data() + off, &v, 4); };
    auto put_i16 = [&](int off, int16_t v) { std::memcpy(hdr.data() + off, &v, 2); };
    auto put_f32 = [&](int off, float v) { std::memcpy(hdr.data() + off, &v, 4); };
    put_i32(0, 348);
    put_i16(40, 3); // dim[0]
    put_i16(42, static_cast<int16_t>(nx));
    put_i16(44, static_cast<int16_t>(ny));
    put_i16(46, static_cast<int16_t>(nz));
    put_i16(70, datatype);
    put_i16(72, datatype == 16 ? 32 : (datatype == 4 ? 16 : 8));
    put_f32(80, static_cast<float>(dx));
    put_f32(84, static_cast<float>(dy));
    put_f32(88, static_cast<float>(dz));
    put_f32(108, 352.0f); // vox_offset
    put_f32(112, scl_slope);
    put_f32(116, scl_inter);
    std::memcpy(hdr.data() + 344, magic, 4);

    std::ofstream f(path, std::ios::binary);
    f.write(hdr.data(), 348);
    const char pad[4] = {0, 0, 0, 0};
    f.write(pad, 4);
    if (datatype == 16) {
        f.write(reinterpret_cast<const char*>(data.data()),
                static_cast<std::streamsize>(data.size() * 4));
    } else if (datatype == 4) {
        for (float v : data) {
            const auto s = static_cast<int16_t>(v);
            f.write(reinterpret_cast<const char*>(&s), 2);
        }
    }
}

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "mrprior_dataprep_test";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("read_nifti: float32 round trip from an independent writer") {
    const auto path = (temp_dir() / "vol.nii").string();
    std::vector<float> data;
    for (int i = 0; i < 4 * 4 * 2; ++i) data.push_back(static_cast<float>(i) * 0.5f);
    write_nifti(path, 4, 4, 2, 1.0, 1.0, 2.0, data);

    Volume vol = read_nifti(path);
    CHECK(vol.nx == 4);
    CHECK(vol.ny == 4);
    CHECK(vol.nz == 2);
    CHECK(vol.dz == doctest::Approx(2.0));
    for (int i = 0; i < 32; ++i) CHECK(vol.data[static_cast<size_t>(i)] == 0.5 * i);
}

TEST_CASE("read_nifti: int16 with scl_slope applied") {
    const auto path = (temp_dir() / "scaled.nii").string();
    std::vector<float> data = {10, 20, 30, 40};
    write_nifti(path, 4, 1, 1, 1, 1, 1, data, 4, 0.5f, 0.0f);
    Volume vol = read_nifti(path);
    CHECK(vol.data[0] == 5.0);
    CHECK(vol.data[3] == 20.0);
}

TEST_CASE("read_nifti: error paths name the offending field") {
    const auto dir = temp_dir();
    std::vector<float> data(8, 1.0f);

    const auto bad_magic = (dir / "bad_magic.nii").string();
    write_nifti(bad_magic, 2, 2, 2, 1, 1, 1, data, 16, 0, 0, "xx1");
    try {
        read_nifti(bad_magic);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }

    const auto bad_type = (dir / "bad_type.nii").string();
    {
        std::vector<char> raw;
        std::ifstream src((dir / "vol.nii").string(), std::ios::binary);
        raw.assign((std::istreambuf_iterator<char>(src)), std::istreambuf_iterator<char>());
        int16_t dt = 64; // float64, unsupported
        std::memcpy(raw.data() + 70, &dt, 2);
        int16_t bp = 64;
        std::memcpy(raw.data() + 72, &bp, 2);
        std::ofstream out(bad_type, std::ios::binary);
        out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    }
    try {
        read_nifti(bad_type);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("datatype") != std::string::npos);
    }

    const auto truncated = (dir / "trunc.nii").string();
    write_nifti(truncated, 4, 4, 2, 1, 1, 1, std::vector<float>(32, 1.0f));
    fs::resize_file(truncated, fs::file_size(truncated) - 8);
    CHECK_THROWS_AS(read_nifti(truncated), FormatError);

    CHECK_THROWS_AS(read_nifti((dir / "missing.nii").string()), IoError);
}

TEST_CASE("conform_slices: identity at target size and 1mm") {
    Volume vol;
    vol.nx = vol.ny = 32;
    vol.nz = 2;
    vol.dx = vol.dy = vol.dz = 1.0;
    vol.data.resize(32 * 32 * 2);
    RandomStream rng(3);
    for (auto& v : vol.data) v = rng.uniform();

    auto slices = conform_slices(vol, 32);
    REQUIRE(slices.size() == 2);
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x)
                CHECK(std::abs(slices[static_cast<size_t>(z)](y, x).real() -
                               vol.at(x, y, z)) < 1e-6);
}

TEST_CASE("conform_slices: 2mm voxels double onto the 1mm grid, FOV preserved") {
    Volume vol;
    vol.nx = vol.ny = 16;
    vol.nz = 1;
    vol.dx = vol.dy = 2.0;
    vol.dz = 1.0;
    vol.data.resize(16 * 16);
    // linear ramp along x in millimeters: value = x_mm
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) vol.data[static_cast<size_t>(y) * 16 + x] = 2.0 * x;

    auto slices = conform_slices(vol, 32);
    const ComplexGrid& s = slices[0];
    // interior of the output should continue the ramp at 1mm steps
    for (int c = 4; c < 28; ++c) {
        const double diff = s(16, c + 1).real() - s(16, c).real();
        CHECK(diff == doctest::Approx(1.0).epsilon(1e-9));
    }

    Volume degenerate = vol;
    degenerate.dx = 0.0;
    CHECK_THROWS_AS(conform_slices(degenerate, 32), ArgumentError);
}

TEST_CASE("conform_slices: constant input stays constant") {
    Volume vol;
    vol.nx = 20;
    vol.ny = 24;
    vol.nz = 1;
    vol.dx = 1.3;
    vol.dy = 0.8;
    vol.dz = 1.0;
    vol.data.assign(20 * 24, 7.5);
    auto slices = conform_slices(vol, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) CHECK(slices[0](r, c).real() == doctest::Approx(7.5));
}

TEST_CASE("prep_slice: normalization, determinism, pure-rescale mode") {
    RandomStream rng(5);
    ComplexGrid slice(16, 16);
    for (size_t i = 0; i < slice.size(); ++i) slice[i] = 100.0 * rng.uniform();

    ComplexGrid a = slice, b = slice;
    CHECK(prep_slice(a, 0.003, 5.0, 42));
    CHECK(prep_slice(b, 0.003, 5.0, 42));
    CHECK((a - b).norm2() == 0.0);
    CHECK(a.max_abs() == doctest::Approx(1.0));
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].real() >= 0.0);

    ComplexGrid c = slice;
    CHECK(prep_slice(c, 0.0, 0.0, 0));
    double peak = 0.0;
    for (size_t i = 0; i < slice.size(); ++i) peak = std::max(peak, slice[i].real());
    for (size_t i = 0; i < c.size(); ++i)
        CHECK(c[i].real() == doctest::Approx(slice[i].real() / peak));

    ComplexGrid zero(8, 8);
    CHECK_FALSE(prep_slice(zero, 0.0, 0.0, 0));
}

TEST_CASE("exclusion_check: the paper thresholds as a conjunction") {
    // construct 30x30 patches with exact mean/sd: half the pixels at
    // mean - d, half at mean + d gives mean = m, sd = d (population)
    auto make_grid = [](double mean, double sd) {
        ComplexGrid g(32, 32, cdouble(0.5, 0.0));
        for (int r = 0; r < 30; ++r)
            for (int c = 0; c < 30; ++c)
                g(r, c) = ((r * 30 + c) % 2 == 0) ? mean - sd : mean + sd;
        return g;
    };

    PatchStats excluded = exclusion_check(make_grid(0.03, 0.005));
    CHECK(excluded.mean == doctest::Approx(0.03));
    CHECK(excluded.sd == doctest::Approx(0.005));
    CHECK(excluded.exclude);

    CHECK_FALSE(exclusion_check(make_grid(0.05, 0.005)).exclude); // mean not below
    CHECK_FALSE(exclusion_check(make_grid(0.03, 0.01)).exclude);  // sd not below

    // pure predicate: same grid, same answer
    ComplexGrid g = make_grid(0.03, 0.005);
    CHECK(exclusion_check(g).exclude == exclusion_check(g).exclude);

    CHECK_THROWS_AS(exclusion_check(ComplexGrid(16, 16)), ArgumentError);

    // corner selection
    ComplexGrid corner_grid(64, 64, cdouble(0.5, 0.0));
    for (int r = 34; r < 64; ++r)
        for (int c = 34; c < 64; ++c) corner_grid(r, c) = 0.0;
    CHECK_FALSE(exclusion_check(corner_grid, Corner::TopLeft).exclude);
    CHECK(exclusion_check(corner_grid, Corner::BottomRight).exclude);
    CHECK(parse_corner("br") == Corner::BottomRight);
    CHECK_THROWS_AS(parse_corner("middle"), ArgumentError);
}

TEST_CASE("psnr: formula, sentinel, shift detection") {
    RandomStream rng(7);
    ComplexGrid ref = oracle::random_grid(16, 16, rng);
    for (size_t i = 0; i < ref.size(); ++i) ref[i] = std::abs(ref[i]);
    double peak = ref.max_abs();
    ComplexGrid scaled = ref;
    scaled *= cdouble(1.0 / peak, 0.0); // max(ref) == 1

    ComplexGrid test = scaled;
    for (size_t i = 0; i < test.size(); ++i) test[i] += 0.1;
    CHECK(psnr(scaled, test) == doctest::Approx(20.0).epsilon(1e-10));

    CHECK(std::isinf(psnr(scaled, scaled)));

    // direct-formula oracle on a random pair
    ComplexGrid other = oracle::random_grid(16, 16, rng);
    for (size_t i = 0; i < other.size(); ++i) other[i] = std::abs(other[i]);
    double mse = 0.0;
    for (size_t i = 0; i < scaled.size(); ++i)
        mse += std::pow(scaled[i].real() - other[i].real(), 2);
    mse /= static_cast<double>(scaled.size());
    const double want = 20.0 * std::log10(scaled.max_abs() / std::sqrt(mse));
    CHECK(oracle::rel_err(psnr(scaled, other), want) < 1e-10);

    // decreasing in the shift
    CHECK(psnr(scaled, test) > [&] {
        ComplexGrid worse = scaled;
        for (size_t i = 0; i < worse.size(); ++i) worse[i] += 0.2;
        return psnr(scaled, worse);
    }());

    CHECK_THROWS_AS(psnr(ComplexGrid(4, 4), ComplexGrid(4, 4)), ArgumentError); // all zero
}

TEST_CASE("ssim: identity, anticorrelation, monotone noise response") {
    ComplexGrid ref = phantom(32, 32, PhantomKind::SheppLogan, PhantomPhase::None, 1);
    CHECK(ssim(ref, ref) == doctest::Approx(1.0));

    ComplexGrid neg = ref;
    ComplexGrid shifted_neg(32, 32);
    // anticorrelated structure around the mean: use 1 - ref so values stay
    // in range but structure inverts
    for (size_t i = 0; i < ref.size(); ++i) shifted_neg[i] = 1.0 - ref[i].real();
    CHECK(ssim(ref, shifted_neg) < 0.0);

    // monotone degradation over three noise levels (Monte Carlo trend)
    RandomStream rng(9);
    ComplexGrid flat(32, 32, cdouble(0.5, 0.0));
    double prev = 1.0;
    for (double sd : {0.02, 0.08, 0.2}) {
        double mean_val = 0.0;
        for (int rep = 0; rep < 5; ++rep) {
            ComplexGrid noisy = flat;
            for (size_t i = 0; i < noisy.size(); ++i)
                noisy[i] = std::max(0.0, noisy[i].real() + sd * rng.gaussian());
            mean_val += ssim(flat, noisy) / 5.0;
        }
        CHECK(mean_val > 0.0);
        CHECK(mean_val < 1.0);
        CHECK(mean_val < prev);
        prev = mean_val;
    }
}

TEST_CASE("metrics reduce complex inputs by modulus (global phase invariant)") {
    RandomStream rng(11);
    ComplexGrid ref = oracle::random_grid(16, 16, rng);
    ComplexGrid test = oracle::random_grid(16, 16, rng);
    const cdouble rot = std::polar(1.0, 0.77);
    ComplexGrid test_rot = test;
    test_rot *= rot;
    CHECK(psnr(ref, test) == doctest::Approx(psnr(ref, test_rot)));
    CHECK(ssim(ref, test) == doctest::Approx(ssim(ref, test_rot)));
}
