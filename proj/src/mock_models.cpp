#include "collage/mock_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collage/errors.hpp"

namespace collage {

void MockModelParams::validate() const {
  if (num_classes < 2) throw ConfigError("accuracy.num_classes", "must be >= 2");
  auto prob = [](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(field, "must be a probability in [0, 1]");
  };
  prob(acc_single, "accuracy.acc_single");
  prob(acc_collage, "accuracy.acc_collage");
  prob(p_miss, "accuracy.p_miss");
  if (!(box_jitter >= 0.0 && box_jitter < 0.5)) throw ConfigError("accuracy.box_jitter", "must be in [0, 0.5)");
}

int mock_classify(int truth, double acc, int num_classes, Prng& prng) {
  if (num_classes < 2) throw DomainError("mock_classify needs at least 2 classes");
  if (truth < 0 || truth >= num_classes) throw DomainError("truth label out of range");
  const double hit = prng.uniform();
  const double pick = prng.uniform();
  if (hit < acc) return truth;
  auto wrong = static_cast<int>(std::floor(pick * (num_classes - 1)));
  wrong = std::min(wrong, num_classes - 2);
  return wrong >= truth ? wrong + 1 : wrong;
}

int draw_truth(int num_classes, Prng& prng) {
  const auto k = static_cast<int>(std::floor(prng.uniform() * num_classes));
  return std::min(k, num_classes - 1);
}

std::vector<DetectionBox> mock_collage_boxes(std::span<const int> truths, const MockModelParams& params,
                                             const GridSpec& spec, Prng& prng) {
  if (truths.size() != spec.cells())
    throw ArityError("mock_collage_boxes needs " + std::to_string(spec.cells()) + " truths, got " +
                     std::to_string(truths.size()));
  const double cell = 1.0 / static_cast<double>(spec.side());
  std::vector<DetectionBox> boxes;
  for (std::size_t i = 0; i < spec.cells(); ++i) {
    const double miss = prng.uniform();
    const double jx = prng.uniform();
    const double jy = prng.uniform();
    const int cls = mock_classify(truths[i], params.acc_collage, params.num_classes, prng);
    const double conf = prng.uniform();
    if (miss < params.p_miss) continue;

    const Rect r = cell_rect(spec, i);
    DetectionBox b;
    b.cx = r.x + r.w / 2.0 + (2.0 * jx - 1.0) * params.box_jitter * cell;
    b.cy = r.y + r.h / 2.0 + (2.0 * jy - 1.0) * params.box_jitter * cell;
    b.w = 0.8 * cell;
    b.h = 0.8 * cell;
    b.class_id = cls;
    b.confidence = 0.5 + 0.5 * conf;
    boxes.push_back(b);
  }
  return boxes;
}

double AccuracyReport::source_accuracy(Source s) const {
  const auto k = static_cast<std::size_t>(s);
  return total_by_source[k] == 0 ? 0.0
                                 : static_cast<double>(correct_by_source[k]) /
                                       static_cast<double>(total_by_source[k]);
}

double AccuracyReport::source_fraction(Source s) const {
  return total == 0 ? 0.0
                    : static_cast<double>(total_by_source[static_cast<std::size_t>(s)]) /
                          static_cast<double>(total);
}

AccuracyReport end_to_end_accuracy(std::span<const ServedAnswer> answers, std::span<const int> truths) {
  if (answers.size() != truths.size())
    throw DomainError("answers and truths differ in length (" + std::to_string(answers.size()) +
                      " vs " + std::to_string(truths.size()) + ")");
  AccuracyReport r;
  r.total = answers.size();
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto k = static_cast<std::size_t>(answers[i].source);
    const bool ok = answers[i].class_id == truths[i];
    ++r.total_by_source[k];
    if (ok) {
      ++r.correct;
      ++r.correct_by_source[k];
    }
  }
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

}  // namespace collage
