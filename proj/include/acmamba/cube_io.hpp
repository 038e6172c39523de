#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acmamba/cube.hpp"

namespace acmamba {

// HSC1 container. Layout:
//   bytes 0..3    magic "HSC1"
//   bytes 4..7    header length L, little-endian u32
//   bytes 8..8+L  UTF-8 JSON {"height":H,"width":W,"bands":C,"dtype":...,"layout":"bip"}
//   payload       H*W*C values, little-endian, pixel-major, band-innermost
// dtype is one of "f32", "u32", "u8".

void saveCube(const HsiCube& cube, const std::string& path);
HsiCube loadCube(const std::string& path);

void saveMask(const GroundTruthMask& mask, const std::string& path);
GroundTruthMask loadMask(const std::string& path);

// Single-band f32 raster (detection maps).
void saveRasterF32(const MatXd& raster, const std::string& path);
MatXd loadRasterF32(const std::string& path);

// Single-band u32 raster (region maps).
void saveRasterU32(const std::vector<std::uint32_t>& raster, Index height,
                   Index width, const std::string& path);
std::vector<std::uint32_t> loadRasterU32(const std::string& path, Index& height,
                                         Index& width);

} // namespace acmamba
