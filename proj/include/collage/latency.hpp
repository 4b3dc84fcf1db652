#pragma once

#include <span>

#include "collage/prng.hpp"

namespace collage {

/// floor + LogNormal(mu, sigma), multiplied by straggler_multiplier with
/// probability p_straggler. Units are milliseconds.
struct LatencyModel {
  double mu = 0.0;
  double sigma = 0.0;
  double p_straggler = 0.0;
  double straggler_multiplier = 1.0;
  double floor = 0.0;

  /// Throws ConfigError naming `field_prefix`.<field> on an invalid parameter.
  void validate(const char* field_prefix = "latency_model") const;
};

/// Draws three uniforms, always in this order: the straggler coin, then the
/// Box-Muller pair.
double sample_latency(const LatencyModel& model, Prng& prng);

/// Nearest-rank percentile: the element at 1-based rank ceil(q/100 * N) of the
/// sorted values. Throws DomainError on an empty list or q outside (0, 100].
double percentile_nearest_rank(std::span<const double> values, double q);

/// Same as percentile_nearest_rank for input already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double q);

}  // namespace collage
