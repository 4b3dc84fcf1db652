#include "collage/image.hpp"

#include <algorithm>
#include <string>

#include "collage/errors.hpp"

namespace collage {

RasterImage::RasterImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) throw DomainError("image dimensions must be positive");
  pixels_.assign(width * height, fill);
}

RasterImage::RasterImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) throw DomainError("image dimensions must be positive");
  if (pixels_.size() != width * height) throw DomainError("pixel count does not match dimensions");
}

namespace {

// Source sample position for one destination index, as an integer part plus a
// fraction frac/denom with denom = 2 * dst.
struct Tap {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::int64_t frac = 0;
};

std::vector<Tap> make_taps(std::size_t src, std::size_t dst) {
  // (d + 0.5) * src / dst - 0.5 == ((2d + 1) * src - dst) / (2 * dst)
  const auto denom = static_cast<std::int64_t>(2 * dst);
  const auto max_num = static_cast<std::int64_t>(src - 1) * denom;
  std::vector<Tap> taps(dst);
  for (std::size_t d = 0; d < dst; ++d) {
    std::int64_t num = static_cast<std::int64_t>(2 * d + 1) * static_cast<std::int64_t>(src) -
                       static_cast<std::int64_t>(dst);
    num = std::clamp<std::int64_t>(num, 0, max_num);
    Tap t;
    t.lo = static_cast<std::size_t>(num / denom);
    t.frac = num % denom;
    t.hi = std::min(t.lo + 1, src - 1);
    taps[d] = t;
  }
  return taps;
}

// round(num / den) half away from zero, for num >= 0 and den > 0.
std::int64_t round_div(std::int64_t num, std::int64_t den) { return (2 * num + den) / (2 * den); }

}  // namespace

RasterImage resize_bilinear(const RasterImage& img, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw DomainError("resize target must be at least 1x1");
  if (img.empty()) throw DomainError("cannot resize an empty image");

  const auto xt = make_taps(img.width(), out_w);
  const auto yt = make_taps(img.height(), out_h);
  const auto dx = static_cast<std::int64_t>(2 * out_w);
  const auto dy = static_cast<std::int64_t>(2 * out_h);

  std::vector<Rgb> out(out_w * out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    const Tap& ty = yt[y];
    for (std::size_t x = 0; x < out_w; ++x) {
      const Tap& tx = xt[x];
      const Rgb& p00 = img.at(tx.lo, ty.lo);
      const Rgb& p01 = img.at(tx.hi, ty.lo);
      const Rgb& p10 = img.at(tx.lo, ty.hi);
      const Rgb& p11 = img.at(tx.hi, ty.hi);
      Rgb& dst = out[y * out_w + x];
      for (std::size_t c = 0; c < 3; ++c) {
        const std::int64_t top = (dx - tx.frac) * p00[c] + tx.frac * p01[c];
        const std::int64_t bot = (dx - tx.frac) * p10[c] + tx.frac * p11[c];
        const std::int64_t v = (dy - ty.frac) * top + ty.frac * bot;
        dst[c] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(round_div(v, dx * dy), 0, 255));
      }
    }
  }
  return RasterImage(out_w, out_h, std::move(out));
}

RasterImage compose_collage(std::span<const RasterImage> images, const CollageLayout& layout) {
  const GridSpec& spec = layout.spec;
  if (images.size() != spec.cells())
    throw ArityError("collage of " + std::to_string(spec.side()) + "x" +
                     std::to_string(spec.side()) + " needs " + std::to_string(spec.cells()) +
                     " images, got " + std::to_string(images.size()));
  if (layout.cell_w == 0 || layout.cell_h == 0) throw DomainError("cell size must be positive");

  RasterImage canvas(layout.collage_w(), layout.collage_h());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].empty()) throw DomainError("collage input " + std::to_string(i) + " is empty");
    const RasterImage cell = resize_bilinear(images[i], layout.cell_w, layout.cell_h);
    const std::size_t ox = spec.col(i) * layout.cell_w;
    const std::size_t oy = spec.row(i) * layout.cell_h;
    for (std::size_t y = 0; y < layout.cell_h; ++y)
      for (std::size_t x = 0; x < layout.cell_w; ++x) canvas.at(ox + x, oy + y) = cell.at(x, y);
  }
  return canvas;
}

}  // namespace collage
