#pragma once

// Random recovery-protocol scenarios on an integer time grid, so that exact
// ties between singles, the collage, deadlines and reissues happen often.

#include <random>
#include <vector>

#include "collage/protocol.hpp"

namespace collage::scenario {

struct Scenario {
  ProtocolConfig config;
  OracleInputs inputs;
  std::vector<DetectionBox> boxes;  // decode to exactly inputs.decoded
  std::vector<int> single_classes;
  std::vector<int> reissue_classes;
  std::vector<int> collage_classes;
};

inline Scenario random_scenario(std::mt19937_64& rng, FillPolicy policy) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  Scenario sc;
  const auto s = static_cast<std::size_t>(pick(1, 4));
  sc.config.spec = GridSpec(s);
  sc.config.policy = policy;
  sc.config.straggler_deadline = pick(2, 10);
  sc.config.reissue_deadline = sc.config.straggler_deadline + pick(1, 10);

  const std::size_t n = s * s;
  auto& in = sc.inputs;
  in.single_times.resize(n);
  for (auto& t : in.single_times) t = coin(0.25) ? kNever : double(pick(0, 25));
  in.collage_time = coin(0.2) ? kNever : double(pick(0, 25));
  in.decoded.resize(n);
  in.reissue_durations.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.decoded[i] = coin(0.75);
    in.reissue_durations[i] = coin(0.1) ? kNever : double(pick(1, 10));
    sc.single_classes.push_back(pick(0, 9));
    sc.reissue_classes.push_back(pick(0, 9));
    sc.collage_classes.push_back(pick(0, 9));
    if (in.decoded[i]) {
      const Rect r = cell_rect(sc.config.spec, i);
      sc.boxes.push_back({r.x + r.w / 2, r.y + r.h / 2, 0.8 * r.w, 0.8 * r.h, sc.collage_classes[i], 0.9});
    }
  }
  std::shuffle(sc.boxes.begin(), sc.boxes.end(), rng);
  return sc;
}

}  // namespace collage::scenario
