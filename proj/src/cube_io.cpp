#include "acmamba/cube_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>

#include <json.hpp>

#include "acmamba/errors.hpp"

namespace acmamba {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'C', '1'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void putU32le(std::uint32_t v, std::string& out) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t getU32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t dtypeSize(const std::string& dtype) {
    if (dtype == "f32" || dtype == "u32") return 4;
    if (dtype == "u8") return 1;
    throw CorruptHeaderError("unsupported dtype '" + dtype + "'");
}

void writeContainer(const std::string& path, Index h, Index w, Index c,
                    const std::string& dtype, const void* payload,
                    std::size_t payload_bytes) {
    nlohmann::json header = {{"height", h},
                             {"width", w},
                             {"bands", c},
                             {"dtype", dtype},
                             {"layout", "bip"}};
    const std::string header_text = header.dump();

    std::string prefix(kMagic, 4);
    putU32le(static_cast<std::uint32_t>(header_text.size()), prefix);
    prefix += header_text;

    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    if (std::fwrite(prefix.data(), 1, prefix.size(), f.get()) != prefix.size() ||
        std::fwrite(payload, 1, payload_bytes, f.get()) != payload_bytes)
        throw IoError("short write to '" + path + "'");
    if (std::fflush(f.get()) != 0) throw IoError("flush failed on '" + path + "'");
}

struct RawContainer {
    Index height = 0, width = 0, bands = 0;
    std::string dtype;
    std::vector<unsigned char> payload;
};

RawContainer readContainer(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw MissingFileError("no such file: '" + path + "'");

    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open '" + path + "' for reading");

    unsigned char head[8];
    if (std::fread(head, 1, 8, f.get()) != 8)
        throw CorruptHeaderError("'" + path + "': file shorter than fixed header");
    if (std::memcmp(head, kMagic, 4) != 0)
        throw CorruptHeaderError("'" + path + "': bad magic");

    const std::uint32_t header_len = getU32le(head + 4);
    if (header_len > (1u << 20))
        throw CorruptHeaderError("'" + path + "': implausible header length");

    std::string header_text(header_len, '\0');
    if (std::fread(header_text.data(), 1, header_len, f.get()) != header_len)
        throw CorruptHeaderError("'" + path + "': truncated JSON header");

    RawContainer rc;
    try {
        const auto j = nlohmann::json::parse(header_text);
        rc.height = j.at("height").get<Index>();
        rc.width = j.at("width").get<Index>();
        rc.bands = j.at("bands").get<Index>();
        rc.dtype = j.at("dtype").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptHeaderError("'" + path + "': " + e.what());
    }
    if (rc.height < 1 || rc.width < 1 || rc.bands < 1)
        throw CorruptHeaderError("'" + path + "': non-positive dimension");

    const std::size_t expect = static_cast<std::size_t>(rc.height) * rc.width *
                               rc.bands * dtypeSize(rc.dtype);
    const std::size_t file_size = std::filesystem::file_size(path);
    if (file_size != 8 + header_len + expect)
        throw SizeMismatchError("'" + path + "': payload is " +
                                std::to_string(file_size - 8 - header_len) +
                                " bytes, header declares " + std::to_string(expect));

    rc.payload.resize(expect);
    if (std::fread(rc.payload.data(), 1, expect, f.get()) != expect)
        throw IoError("short read from '" + path + "'");
    return rc;
}

// Host is little-endian on every supported target; memcpy round-trips the
// bit patterns exactly.
static_assert(sizeof(float) == 4);

std::vector<unsigned char> packF32(const float* src, std::size_t n) {
    std::vector<unsigned char> out(n * 4);
    std::memcpy(out.data(), src, out.size());
    return out;
}

} // namespace

void saveCube(const HsiCube& cube, const std::string& path) {
    const auto bytes = packF32(cube.values.data(), cube.values.size());
    writeContainer(path, cube.height, cube.width, cube.bands, "f32", bytes.data(),
                   bytes.size());
}

HsiCube loadCube(const std::string& path) {
    const auto rc = readContainer(path);
    if (rc.dtype != "f32")
        throw CorruptHeaderError("'" + path + "': expected dtype f32, got " + rc.dtype);
    HsiCube cube(rc.height, rc.width, rc.bands);
    std::memcpy(cube.values.data(), rc.payload.data(), rc.payload.size());
    return cube;
}

void saveMask(const GroundTruthMask& mask, const std::string& path) {
    writeContainer(path, mask.height, mask.width, 1, "u8", mask.labels.data(),
                   mask.labels.size());
}

GroundTruthMask loadMask(const std::string& path) {
    const auto rc = readContainer(path);
    if (rc.dtype != "u8" || rc.bands != 1)
        throw CorruptHeaderError("'" + path + "': expected single-band u8 mask");
    GroundTruthMask mask(rc.height, rc.width);
    std::memcpy(mask.labels.data(), rc.payload.data(), rc.payload.size());
    return mask;
}

void saveRasterF32(const MatXd& raster, const std::string& path) {
    std::vector<float> vals(static_cast<std::size_t>(raster.size()));
    for (Index r = 0; r < raster.rows(); ++r)
        for (Index c = 0; c < raster.cols(); ++c)
            vals[static_cast<std::size_t>(r * raster.cols() + c)] =
                static_cast<float>(raster(r, c));
    const auto bytes = packF32(vals.data(), vals.size());
    writeContainer(path, raster.rows(), raster.cols(), 1, "f32", bytes.data(),
                   bytes.size());
}

MatXd loadRasterF32(const std::string& path) {
    const auto rc = readContainer(path);
    if (rc.dtype != "f32" || rc.bands != 1)
        throw CorruptHeaderError("'" + path + "': expected single-band f32 raster");
    MatXd m(rc.height, rc.width);
    std::vector<float> vals(static_cast<std::size_t>(rc.height) * rc.width);
    std::memcpy(vals.data(), rc.payload.data(), rc.payload.size());
    for (Index r = 0; r < rc.height; ++r)
        for (Index c = 0; c < rc.width; ++c)
            m(r, c) = vals[static_cast<std::size_t>(r * rc.width + c)];
    return m;
}

void saveRasterU32(const std::vector<std::uint32_t>& raster, Index height,
                   Index width, const std::string& path) {
    if (raster.size() != static_cast<std::size_t>(height) * width)
        throw DimMismatchError("raster length does not match dimensions");
    static_assert(sizeof(std::uint32_t) == 4);
    writeContainer(path, height, width, 1, "u32", raster.data(), raster.size() * 4);
}

std::vector<std::uint32_t> loadRasterU32(const std::string& path, Index& height,
                                         Index& width) {
    const auto rc = readContainer(path);
    if (rc.dtype != "u32" || rc.bands != 1)
        throw CorruptHeaderError("'" + path + "': expected single-band u32 raster");
    height = rc.height;
    width = rc.width;
    std::vector<std::uint32_t> vals(static_cast<std::size_t>(rc.height) * rc.width);
    std::memcpy(vals.data(), rc.payload.data(), rc.payload.size());
    return vals;
}

} // namespace acmamba
