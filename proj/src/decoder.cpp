#include "collage/decoder.hpp"

#include <json.hpp>

#include "collage/errors.hpp"

namespace collage {

std::optional<std::size_t> assign_box_to_cell(const DetectionBox& box, const GridSpec& spec) {
  if (!(box.w > 0.0) || !(box.h > 0.0)) return std::nullopt;
  const Rect r = box_to_rect(box);
  if (!(r.area() > 0.0)) return cell_containing(spec, box.cx, box.cy);

  std::size_t best = 0;
  double best_area = -1.0;
  for (std::size_t i = 0; i < spec.cells(); ++i) {
    const double a = intersection_area(r, cell_rect(spec, i));
    if (a > best_area + kOverlapTieTolerance) {
      best = i;
      best_area = a;
    }
  }
  return best;
}

DecodedCollage decode_collage(std::span<const DetectionBox> boxes, const GridSpec& spec,
                              double min_confidence) {
  DecodedCollage out{spec, std::vector<std::optional<CellPrediction>>(spec.cells())};
  for (const DetectionBox& b : boxes) {
    if (b.confidence < min_confidence) continue;
    const auto cell = assign_box_to_cell(b, spec);
    if (!cell) continue;
    auto& slot = out.slots[*cell];
    if (!slot || b.confidence > slot->confidence) slot = CellPrediction{*cell, b.class_id, b.confidence};
  }
  return out;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) noexcept {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

namespace {

// Lines on which each top-level array element object begins.
std::vector<std::size_t> element_lines(std::string_view text) {
  std::vector<std::size_t> lines;
  std::size_t line = 1;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : text) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') {
      if (depth == 1) lines.push_back(line);
      ++depth;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return lines;
}

}  // namespace

std::vector<DetectionBox> parse_boxes_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError("invalid JSON on line " + std::to_string(line_of_offset(text, off)), off);
  }
  if (!doc.is_array()) throw BoxFileError("boxes document must be a JSON array", 1);

  const auto lines = element_lines(text);
  std::vector<DetectionBox> boxes;
  boxes.reserve(doc.size());
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const std::size_t line = k < lines.size() ? lines[k] : 1;
    const auto& o = doc[k];
    if (!o.is_object()) throw BoxFileError("box " + std::to_string(k) + " is not an object", line);
    DetectionBox b;
    try {
      b.cx = o.at("cx").get<double>();
      b.cy = o.at("cy").get<double>();
      b.w = o.at("w").get<double>();
      b.h = o.at("h").get<double>();
      const auto& cls = o.at("class_id");
      if (!cls.is_number_integer()) throw DomainError("class_id must be an integer");
      b.class_id = cls.get<int>();
      b.confidence = o.at("confidence").get<double>();
      validate_box(b);
    } catch (const nlohmann::json::exception& e) {
      throw BoxFileError("box " + std::to_string(k) + ": " + e.what(), line);
    } catch (const DomainError& e) {
      throw BoxFileError("box " + std::to_string(k) + ": " + e.what(), line);
    }
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace collage
