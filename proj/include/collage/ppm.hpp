#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "collage/image.hpp"

namespace collage {

/// Parses a binary PPM (P6, maxval 255). Comment lines (`#` to end of line)
/// are allowed between header tokens; exactly one whitespace byte separates
/// maxval from the payload. Bytes after the payload are ignored.
/// Throws ParseError carrying the failing byte offset.
RasterImage read_ppm(std::span<const std::uint8_t> bytes);

/// Canonical encoding: "P6\n<w> <h>\n255\n" followed by raw RGB.
std::vector<std::uint8_t> write_ppm(const RasterImage& img);

RasterImage load_ppm(const std::filesystem::path& path);
void save_ppm(const RasterImage& img, const std::filesystem::path& path);

}  // namespace collage
