#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "collage/geometry.hpp"

namespace collage {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row-major.
class RasterImage {
 public:
  RasterImage() = default;
  /// Throws DomainError on a zero dimension.
  RasterImage(std::size_t width, std::size_t height, Rgb fill = {0, 0, 0});
  /// Throws DomainError when pixels.size() != width * height.
  RasterImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  const Rgb& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  Rgb& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

  std::span<const Rgb> pixels() const noexcept { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Rgb> pixels_;
};

/// Pixel sizing of a collage: every cell is cell_w x cell_h.
struct CollageLayout {
  GridSpec spec{1};
  std::size_t cell_w = 1;
  std::size_t cell_h = 1;

  std::size_t collage_w() const noexcept { return spec.side() * cell_w; }
  std::size_t collage_h() const noexcept { return spec.side() * cell_h; }
};

/// Bilinear resampling with half-pixel-center alignment.
///
/// For destination column dx the source coordinate is
/// (dx + 0.5) * src_w / dst_w - 0.5, clamped to [0, src_w - 1] (rows alike).
/// The four neighbours are blended horizontally then vertically and each
/// channel is rounded half away from zero. Evaluation is carried out in exact
/// integer arithmetic, so the output is bit-reproducible everywhere.
///
/// Throws DomainError when out_w or out_h is zero or the source is empty.
RasterImage resize_bilinear(const RasterImage& img, std::size_t out_w, std::size_t out_h);

/// Resizes image i to the cell size and places it at cell i (row-major).
/// Throws ArityError unless images.size() == layout.spec.cells(), DomainError on an empty image.
RasterImage compose_collage(std::span<const RasterImage> images, const CollageLayout& layout);

}  // namespace collage
