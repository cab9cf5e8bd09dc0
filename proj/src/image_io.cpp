#include "mrprior/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "mrprior/errors.hpp"

namespace mri {

namespace {

uint32_t crc32(const uint8_t* data, size_t len, uint32_t crc = 0xffffffffu) {
    static uint32_t table[256];
    static bool init = false;
    if (!init) {
        for (uint32_t n = 0; n < 256; ++n) {
            uint32_t c = n;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            table[n] = c;
        }
        init = true;
    }
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
    return crc;
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void write_chunk(std::ofstream& f, const char type[4], const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> buf;
    put_u32(buf, static_cast<uint32_t>(payload.size()));
    buf.insert(buf.end(), type, type + 4);
    buf.insert(buf.end(), payload.begin(), payload.end());
    const uint32_t crc = ~crc32(buf.data() + 4, buf.size() - 4);
    put_u32(buf, crc);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

// zlib stream with stored (uncompressed) deflate blocks
std::vector<uint8_t> zlib_stored(const std::vector<uint8_t>& raw) {
    std::vector<uint8_t> out;
    out.push_back(0x78);
    out.push_back(0x01);
    size_t pos = 0;
    while (pos < raw.size() || raw.empty()) {
        const size_t n = std::min<size_t>(65535, raw.size() - pos);
        const bool last = pos + n == raw.size();
        out.push_back(last ? 1 : 0);
        out.push_back(static_cast<uint8_t>(n & 0xff));
        out.push_back(static_cast<uint8_t>(n >> 8));
        out.push_back(static_cast<uint8_t>(~n & 0xff));
        out.push_back(static_cast<uint8_t>((~n >> 8) & 0xff));
        out.insert(out.end(), raw.begin() + static_cast<long>(pos),
                   raw.begin() + static_cast<long>(pos + n));
        pos += n;
        if (raw.empty()) break;
    }
    uint32_t s1 = 1, s2 = 0;
    for (uint8_t b : raw) {
        s1 = (s1 + b) % 65521;
        s2 = (s2 + s1) % 65521;
    }
    put_u32(out, (s2 << 16) | s1);
    return out;
}

void write_png_rgb(const std::string& path, int rows, int cols,
                   const std::vector<uint8_t>& rgb) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    f.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<uint8_t> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(cols));
    put_u32(ihdr, static_cast<uint32_t>(rows));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(f, "IHDR", ihdr);

    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(rows) * (1 + static_cast<size_t>(cols) * 3));
    for (int r = 0; r < rows; ++r) {
        raw.push_back(0); // no filter
        const size_t off = static_cast<size_t>(r) * cols * 3;
        raw.insert(raw.end(), rgb.begin() + static_cast<long>(off),
                   rgb.begin() + static_cast<long>(off + static_cast<size_t>(cols) * 3));
    }
    write_chunk(f, "IDAT", zlib_stored(raw));
    write_chunk(f, "IEND", {});
    if (!f.flush()) throw IoError("write failed: " + path);
}

} // namespace

void write_png_magnitude(const std::string& path, const ComplexGrid& g) {
    const double peak = g.max_abs();
    std::vector<uint8_t> rgb(static_cast<size_t>(g.rows()) * g.cols() * 3);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            const double v = peak > 0.0 ? std::abs(g(r, c)) / peak : 0.0;
            const auto byte = static_cast<uint8_t>(std::lround(255.0 * v));
            const size_t i = (static_cast<size_t>(r) * g.cols() + c) * 3;
            rgb[i] = rgb[i + 1] = rgb[i + 2] = byte;
        }
    write_png_rgb(path, g.rows(), g.cols(), rgb);
}

void write_png_phase(const std::string& path, const ComplexGrid& g) {
    std::vector<uint8_t> rgb(static_cast<size_t>(g.rows()) * g.cols() * 3);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            const double phase = std::arg(g(r, c)); // (-pi, pi]
            const size_t i = (static_cast<size_t>(r) * g.cols() + c) * 3;
            // cyclic colormap: three sinusoids 120 degrees apart
            for (int ch = 0; ch < 3; ++ch) {
                const double v = 0.5 + 0.5 * std::cos(phase - ch * 2.0 * M_PI / 3.0);
                rgb[i + static_cast<size_t>(ch)] =
                    static_cast<uint8_t>(std::lround(255.0 * v));
            }
        }
    write_png_rgb(path, g.rows(), g.cols(), rgb);
}

} // namespace mri
