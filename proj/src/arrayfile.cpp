#include "mrprior/arrayfile.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mrprior/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

namespace mri {

size_t ArrayFile::element_count() const {
    size_t n = 1;
    for (long d : dims) n *= static_cast<size_t>(d);
    return n;
}

void write_array(const std::string& base, const ArrayFile& arr) {
    if (arr.dims.empty() || arr.dims.size() > 8)
        throw ArgumentError("write_array: need between 1 and 8 dims");
    for (long d : arr.dims)
        if (d < 1) throw ArgumentError("write_array: extents must be positive");
    if (arr.payload.size() != arr.element_count())
        throw ArgumentError("write_array: payload length does not match dims");

    std::ofstream hdr(base + ".hdr");
    if (!hdr) throw IoError("cannot open for writing: " + base + ".hdr");
    hdr << "# Dimensions\n";
    for (size_t i = 0; i < arr.dims.size(); ++i) hdr << (i ? " " : "") << arr.dims[i];
    hdr << "\n";
    if (!hdr.flush()) throw IoError("write failed: " + base + ".hdr");

    std::ofstream cfl(base + ".cfl", std::ios::binary);
    if (!cfl) throw IoError("cannot open for writing: " + base + ".cfl");
    cfl.write(reinterpret_cast<const char*>(arr.payload.data()),
              static_cast<std::streamsize>(arr.payload.size() * sizeof(std::complex<float>)));
    if (!cfl.flush()) throw IoError("write failed: " + base + ".cfl");
}

ArrayFile read_array(const std::string& base) {
    std::ifstream hdr(base + ".hdr");
    if (!hdr) throw IoError("cannot open: " + base + ".hdr");
    std::string line;
    if (!std::getline(hdr, line) || line.rfind("# Dimensions", 0) != 0)
        throw FormatError(base + ".hdr: expected '# Dimensions' comment line");
    if (!std::getline(hdr, line)) throw FormatError(base + ".hdr: missing extents line");

    ArrayFile arr;
    std::istringstream dims_in(line);
    long d;
    while (dims_in >> d) {
        if (d < 1) throw FormatError(base + ".hdr: nonpositive extent");
        arr.dims.push_back(d);
    }
    if (arr.dims.empty() || arr.dims.size() > 8)
        throw FormatError(base + ".hdr: need between 1 and 8 extents");

    std::ifstream cfl(base + ".cfl", std::ios::binary | std::ios::ate);
    if (!cfl) throw IoError("cannot open: " + base + ".cfl");
    const auto actual = static_cast<size_t>(cfl.tellg());
    const size_t expected = arr.element_count() * sizeof(std::complex<float>);
    if (actual != expected) {
        std::ostringstream msg;
        msg << base << ".cfl: payload size mismatch, expected " << expected
            << " bytes, found " << actual;
        throw FormatError(msg.str());
    }
    cfl.seekg(0);
    arr.payload.resize(arr.element_count());
    cfl.read(reinterpret_cast<char*>(arr.payload.data()), static_cast<std::streamsize>(expected));
    if (!cfl) throw IoError("read failed: " + base + ".cfl");
    return arr;
}

ArrayFile pack_grids(const std::vector<ComplexGrid>& grids) {
    if (grids.empty()) throw ArgumentError("pack_grids: empty stack");
    const int rows = grids[0].rows(), cols = grids[0].cols();
    for (const auto& g : grids)
        if (g.rows() != rows || g.cols() != cols)
            throw ArgumentError("pack_grids: grids differ in shape");

    ArrayFile arr;
    arr.dims = {rows, cols};
    if (grids.size() > 1) arr.dims.push_back(static_cast<long>(grids.size()));
    arr.payload.resize(static_cast<size_t>(rows) * cols * grids.size());
    size_t k = 0;
    for (const auto& g : grids) {
        const size_t off = (k++) * static_cast<size_t>(rows) * cols;
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r)
                arr.payload[off + static_cast<size_t>(c) * rows + r] =
                    std::complex<float>(static_cast<float>(g(r, c).real()),
                                        static_cast<float>(g(r, c).imag()));
    }
    return arr;
}

std::vector<ComplexGrid> unpack_grids(const ArrayFile& arr) {
    if (arr.dims.size() < 2) throw FormatError("array has fewer than 2 dims, cannot form grids");
    const int rows = static_cast<int>(arr.dims[0]);
    const int cols = static_cast<int>(arr.dims[1]);
    size_t count = 1;
    for (size_t i = 2; i < arr.dims.size(); ++i) count *= static_cast<size_t>(arr.dims[i]);

    std::vector<ComplexGrid> grids;
    grids.reserve(count);
    for (size_t k = 0; k < count; ++k) {
        const size_t off = k * static_cast<size_t>(rows) * cols;
        ComplexGrid g(rows, cols);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) {
                const auto v = arr.payload[off + static_cast<size_t>(c) * rows + r];
                g(r, c) = cdouble(v.real(), v.imag());
            }
        grids.push_back(std::move(g));
    }
    return grids;
}

void write_grid(const std::string& base, const ComplexGrid& g) {
    write_array(base, pack_grids({g}));
}

ComplexGrid read_grid(const std::string& base) {
    auto grids = unpack_grids(read_array(base));
    if (grids.size() != 1) throw FormatError(base + ": expected a single 2D grid");
    return grids[0];
}

void write_grid_stack(const std::string& base, const std::vector<ComplexGrid>& grids) {
    write_array(base, pack_grids(grids));
}

std::vector<ComplexGrid> read_grid_stack(const std::string& base) {
    return unpack_grids(read_array(base));
}

void write_real_tensor(const std::string& base, const std::vector<long>& dims,
                       const std::vector<float>& values) {
    ArrayFile arr;
    arr.dims = dims;
    arr.payload.resize(values.size());
    if (arr.element_count() != values.size())
        throw ArgumentError("write_real_tensor: dims do not match value count");
    for (size_t i = 0; i < values.size(); ++i) arr.payload[i] = {values[i], 0.0f};
    write_array(base, arr);
}

std::vector<float> read_real_tensor(const std::string& base, std::vector<long>* dims) {
    ArrayFile arr = read_array(base);
    if (dims) *dims = arr.dims;
    std::vector<float> values(arr.payload.size());
    for (size_t i = 0; i < values.size(); ++i) values[i] = arr.payload[i].real();
    return values;
}

} // namespace mri
