#include "mrprior/nifti.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mrprior/errors.hpp"

namespace mri {

namespace {

// Offsets into the 348-byte NIfTI-1 header.
constexpr int kDim = 40;       // short dim[8]
constexpr int kDatatype = 70;  // short
constexpr int kBitpix = 72;    // short
constexpr int kPixdim = 76;    // float pixdim[8]
constexpr int kVoxOffset = 108; // float
constexpr int kSclSlope = 112; // float
constexpr int kSclInter = 116; // float
constexpr int kMagic = 344;    // char[4]

constexpr int16_t kTypeUint8 = 2;
constexpr int16_t kTypeInt16 = 4;
constexpr int16_t kTypeFloat32 = 16;

int16_t read_i16(const char* buf, int off, bool swap) {
    uint16_t v;
    std::memcpy(&v, buf + off, 2);
    if (swap) v = static_cast<uint16_t>((v >> 8) | (v << 8));
    int16_t out;
    std::memcpy(&out, &v, 2);
    return out;
}

float read_f32(const char* buf, int off, bool swap) {
    uint32_t v;
    std::memcpy(&v, buf + off, 4);
    if (swap)
        v = ((v >> 24) & 0xff) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
    float out;
    std::memcpy(&out, &v, 4);
    return out;
}

} // namespace

Volume read_nifti(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open: " + path);

    char hdr[348];
    file.read(hdr, sizeof(hdr));
    if (!file) throw FormatError(path + ": file shorter than the 348-byte header");

    const char* magic = hdr + kMagic;
    const bool same_file = std::memcmp(magic, "n+1\0", 4) == 0;
    const bool pair_file = std::memcmp(magic, "ni1\0", 4) == 0;
    if (!same_file && !pair_file)
        throw FormatError(path + ": bad magic (expected 'n+1' or 'ni1')");

    // dim[0] outside 1..7 signals byte-swapped data
    bool swap = false;
    int16_t ndim = read_i16(hdr, kDim, false);
    if (ndim < 1 || ndim > 7) {
        swap = true;
        ndim = read_i16(hdr, kDim, true);
        if (ndim < 1 || ndim > 7) throw FormatError(path + ": implausible dim[0]");
    }

    const int16_t datatype = read_i16(hdr, kDatatype, swap);
    const int16_t bitpix = read_i16(hdr, kBitpix, swap);
    int bytes_per_voxel;
    switch (datatype) {
        case kTypeUint8: bytes_per_voxel = 1; break;
        case kTypeInt16: bytes_per_voxel = 2; break;
        case kTypeFloat32: bytes_per_voxel = 4; break;
        default: {
            std::ostringstream msg;
            msg << path << ": unsupported datatype " << datatype
                << " (supported: uint8, int16, float32)";
            throw FormatError(msg.str());
        }
    }
    if (bitpix != 8 * bytes_per_voxel)
        throw FormatError(path + ": bitpix inconsistent with datatype");

    Volume vol;
    vol.nx = read_i16(hdr, kDim + 2, swap);
    vol.ny = ndim >= 2 ? read_i16(hdr, kDim + 4, swap) : 1;
    vol.nz = ndim >= 3 ? read_i16(hdr, kDim + 6, swap) : 1;
    if (vol.nx < 1 || vol.ny < 1 || vol.nz < 1)
        throw FormatError(path + ": nonpositive extent in dim");
    vol.dx = read_f32(hdr, kPixdim + 4, swap);
    vol.dy = read_f32(hdr, kPixdim + 8, swap);
    vol.dz = read_f32(hdr, kPixdim + 12, swap);
    if (!(vol.dx > 0.0)) vol.dx = 1.0;
    if (!(vol.dy > 0.0)) vol.dy = 1.0;
    if (!(vol.dz > 0.0)) vol.dz = 1.0;

    float slope = read_f32(hdr, kSclSlope, swap);
    const float inter = read_f32(hdr, kSclInter, swap);
    if (slope == 0.0f || !std::isfinite(slope)) slope = 1.0f;

    const size_t n_voxels = static_cast<size_t>(vol.nx) * vol.ny * vol.nz;
    const size_t payload_bytes = n_voxels * static_cast<size_t>(bytes_per_voxel);

    std::ifstream data_file;
    std::ifstream* src = &file;
    size_t offset;
    if (same_file) {
        const float vox_offset = read_f32(hdr, kVoxOffset, swap);
        offset = static_cast<size_t>(vox_offset);
        if (offset < 348) throw FormatError(path + ": vox_offset points into the header");
    } else {
        std::string img_path = path;
        const auto pos = img_path.rfind(".hdr");
        if (pos != std::string::npos)
            img_path.replace(pos, 4, ".img");
        else
            img_path += ".img";
        data_file.open(img_path, std::ios::binary);
        if (!data_file) throw IoError("cannot open paired image file: " + img_path);
        src = &data_file;
        offset = 0;
    }

    src->seekg(0, std::ios::end);
    const size_t file_size = static_cast<size_t>(src->tellg());
    if (file_size < offset + payload_bytes) {
        std::ostringstream msg;
        msg << path << ": truncated payload, need " << payload_bytes << " bytes at offset "
            << offset << ", file has " << file_size;
        throw FormatError(msg.str());
    }
    src->seekg(static_cast<std::streamoff>(offset));

    std::vector<char> raw(payload_bytes);
    src->read(raw.data(), static_cast<std::streamsize>(payload_bytes));
    if (!*src) throw IoError(path + ": payload read failed");

    vol.data.resize(n_voxels);
    for (size_t i = 0; i < n_voxels; ++i) {
        double v;
        switch (datatype) {
            case kTypeUint8:
                v = static_cast<double>(static_cast<uint8_t>(raw[i]));
                break;
            case kTypeInt16:
                v = static_cast<double>(read_i16(raw.data(), static_cast<int>(2 * i), swap));
                break;
            default:
                v = static_cast<double>(read_f32(raw.data(), static_cast<int>(4 * i), swap));
                break;
        }
        vol.data[i] = slope * v + inter;
    }
    return vol;
}

} // namespace mri
