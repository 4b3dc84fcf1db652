#pragma once

#include <cstddef>

namespace collage {

/// Square s x s collage layout. Cells are indexed row-major from the top-left:
/// i = row * s + col.
class GridSpec {
 public:
  /// Throws DomainError when side < 1.
  explicit GridSpec(std::size_t side);

  std::size_t side() const noexcept { return side_; }
  std::size_t cells() const noexcept { return side_ * side_; }

  std::size_t row(std::size_t cell) const noexcept { return cell / side_; }
  std::size_t col(std::size_t cell) const noexcept { return cell % side_; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::size_t side_;
};

/// Axis-aligned rectangle in normalized canvas coordinates (top-left corner + extent).
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const noexcept { return w * h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Detector output in center/extent form, normalized to the collage canvas.
struct DetectionBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  int class_id = 0;
  double confidence = 0.0;

  friend bool operator==(const DetectionBox&, const DetectionBox&) = default;
};

inline constexpr double kRectEpsilon = 1e-9;

/// Throws DomainError unless the rect satisfies the normalized-frame invariants.
void validate_rect(const Rect& r);

/// Throws DomainError unless w, h > 0 and confidence is in [0, 1].
void validate_box(const DetectionBox& b);

/// Normalized rect of cell i. Throws DomainError when i >= spec.cells().
Rect cell_rect(const GridSpec& spec, std::size_t i);

/// Overlap area of two rects; 0 when disjoint or touching.
double intersection_area(const Rect& a, const Rect& b) noexcept;

/// Converts to corner form and clips to the unit square. The result may have zero area.
/// Throws DomainError on non-positive extents.
Rect box_to_rect(const DetectionBox& b);

/// Cell containing the point (x, y) after clamping both coordinates to [0, 1].
/// Points on the far edge belong to the last row/column.
std::size_t cell_containing(const GridSpec& spec, double x, double y) noexcept;

}  // namespace collage
