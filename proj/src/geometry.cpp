#include "collage/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collage/errors.hpp"

namespace collage {

GridSpec::GridSpec(std::size_t side) : side_(side) {
  if (side_ < 1) throw DomainError("grid side must be >= 1");
}

void validate_rect(const Rect& r) {
  const bool ok = r.x >= 0.0 && r.y >= 0.0 && r.w >= 0.0 && r.h >= 0.0 &&
                  r.x + r.w <= 1.0 + kRectEpsilon && r.y + r.h <= 1.0 + kRectEpsilon;
  if (!ok) throw DomainError("rect outside the unit square");
}

void validate_box(const DetectionBox& b) {
  if (!(b.w > 0.0) || !(b.h > 0.0)) throw DomainError("detection box extents must be positive");
  if (!(b.confidence >= 0.0 && b.confidence <= 1.0))
    throw DomainError("detection box confidence must be in [0, 1]");
  if (!std::isfinite(b.cx) || !std::isfinite(b.cy) || !std::isfinite(b.w) || !std::isfinite(b.h))
    throw DomainError("detection box coordinates must be finite");
}

Rect cell_rect(const GridSpec& spec, std::size_t i) {
  if (i >= spec.cells())
    throw DomainError("cell index " + std::to_string(i) + " out of range for " +
                      std::to_string(spec.cells()) + " cells");
  const auto s = static_cast<double>(spec.side());
  return Rect{static_cast<double>(spec.col(i)) / s, static_cast<double>(spec.row(i)) / s, 1.0 / s,
              1.0 / s};
}

double intersection_area(const Rect& a, const Rect& b) noexcept {
  const double ox = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double oy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  return std::max(0.0, ox) * std::max(0.0, oy);
}

Rect box_to_rect(const DetectionBox& b) {
  if (!(b.w > 0.0) || !(b.h > 0.0)) throw DomainError("detection box extents must be positive");
  const double x0 = std::clamp(b.cx - b.w / 2.0, 0.0, 1.0);
  const double y0 = std::clamp(b.cy - b.h / 2.0, 0.0, 1.0);
  const double x1 = std::clamp(b.cx + b.w / 2.0, 0.0, 1.0);
  const double y1 = std::clamp(b.cy + b.h / 2.0, 0.0, 1.0);
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

std::size_t cell_containing(const GridSpec& spec, double x, double y) noexcept {
  const std::size_t s = spec.side();
  auto index = [s](double v) {
    v = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
    const auto k = static_cast<std::size_t>(std::floor(v * static_cast<double>(s)));
    return std::min(k, s - 1);
  };
  return index(y) * s + index(x);
}

}  // namespace collage
