#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "collage/geometry.hpp"
#include "collage/protocol.hpp"
#include "collage/prng.hpp"

namespace collage {

/// Synthetic stand-ins for a single-image classifier and a collage detector.
struct MockModelParams {
  int num_classes = 10;
  double acc_single = 0.9;
  double acc_collage = 0.8;
  double p_miss = 0.0;
  double box_jitter = 0.0;  // fraction of the cell size, in [0, 0.5)

  void validate() const;
};

/// Uniforms consumed per cell by mock_collage_boxes, whether or not the cell
/// emits a box: miss coin, x jitter, y jitter, two for the class, confidence.
inline constexpr std::size_t kCollageDrawsPerCell = 6;

/// Returns truth with probability acc, otherwise a uniformly chosen different
/// class. Always consumes two uniforms. Throws DomainError when K < 2 or truth
/// is outside [0, K).
int mock_classify(int truth, double acc, int num_classes, Prng& prng);

/// Ground-truth label drawn uniformly from [0, K). One uniform.
int draw_truth(int num_classes, Prng& prng);

/// One detector-style box per cell in index order, unless the miss coin fires.
/// Boxes sit at the cell center offset by up to box_jitter / s on each axis,
/// with extents 0.8 / s and confidence uniform in [0.5, 1].
/// Throws ArityError when truths.size() != spec.cells().
std::vector<DetectionBox> mock_collage_boxes(std::span<const int> truths, const MockModelParams& params,
                                             const GridSpec& spec, Prng& prng);

struct AccuracyReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  // Indexed by Source.
  std::array<std::size_t, 3> total_by_source{};
  std::array<std::size_t, 3> correct_by_source{};

  /// Accuracy within one source; 0 when that source served nothing.
  double source_accuracy(Source s) const;
  /// Fraction of requests served by a source.
  double source_fraction(Source s) const;
};

struct ServedAnswer {
  Source source = Source::Single;
  int class_id = 0;
};

/// Throws DomainError on a length mismatch.
AccuracyReport end_to_end_accuracy(std::span<const ServedAnswer> answers, std::span<const int> truths);

}  // namespace collage
