#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "collage/geometry.hpp"

namespace collage {

struct CellPrediction {
  std::size_t cell = 0;
  int class_id = 0;
  double confidence = 0.0;

  friend bool operator==(const CellPrediction&, const CellPrediction&) = default;
};

/// One backup answer slot per grid cell; std::nullopt marks a MISSING cell.
struct DecodedCollage {
  GridSpec spec{1};
  std::vector<std::optional<CellPrediction>> slots;

  bool decoded(std::size_t cell) const { return slots.at(cell).has_value(); }
  friend bool operator==(const DecodedCollage&, const DecodedCollage&) = default;
};

/// Overlap scores closer than this are treated as equal, so that cells a box
/// fully covers tie exactly despite rounding in their boundaries.
inline constexpr double kOverlapTieTolerance = 1e-12;

/// Cell with the largest overlap with the clipped box, lowest index on ties.
/// Boxes clipped to zero area fall back to the cell containing the clamped
/// center. Returns std::nullopt only for a box with non-positive extents.
std::optional<std::size_t> assign_box_to_cell(const DetectionBox& box, const GridSpec& spec);

/// Assigns every box to a cell and keeps the most confident box per cell
/// (earliest in input order on equal confidence). Boxes below min_confidence
/// are dropped first.
DecodedCollage decode_collage(std::span<const DetectionBox> boxes, const GridSpec& spec,
                              double min_confidence = 0.0);

/// Parses a JSON array of {cx, cy, w, h, class_id, confidence} objects.
/// Unknown keys are ignored. Throws ParseError (byte offset) for malformed
/// text and BoxFileError (1-based line of the offending object) for boxes
/// that violate their invariants.
std::vector<DetectionBox> parse_boxes_json(std::string_view text);

class BoxFileError : public std::runtime_error {
 public:
  BoxFileError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// 1-based line number of a byte offset within text.
std::size_t line_of_offset(std::string_view text, std::size_t offset) noexcept;

}  // namespace collage
