#include "collage/latency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "collage/errors.hpp"

namespace collage {

double Prng::normal() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void LatencyModel::validate(const char* prefix) const {
  const std::string p(prefix);
  if (!std::isfinite(mu)) throw ConfigError(p + ".mu", "must be finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError(p + ".sigma", "must be >= 0");
  if (!(p_straggler >= 0.0 && p_straggler <= 1.0))
    throw ConfigError(p + ".p_straggler", "must be in [0, 1]");
  if (!(straggler_multiplier >= 1.0) || !std::isfinite(straggler_multiplier))
    throw ConfigError(p + ".straggler_multiplier", "must be >= 1");
  if (!(floor >= 0.0) || !std::isfinite(floor)) throw ConfigError(p + ".floor", "must be >= 0");
}

double sample_latency(const LatencyModel& m, Prng& prng) {
  const double coin = prng.uniform();
  const double z = prng.normal();
  const double base = std::exp(m.mu + m.sigma * z);
  return m.floor + base * (coin < m.p_straggler ? m.straggler_multiplier : 1.0);
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("percentile of an empty list");
  if (!(q > 0.0 && q <= 100.0)) throw DomainError("percentile must be in (0, 100]");
  const auto n = static_cast<double>(sorted.size());
  // q is usually a decimal like 99.9 that binary floating point cannot hold
  // exactly; a relative slack keeps ceil() from jumping a whole rank.
  const double x = q * n / 100.0;
  auto rank = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double percentile_nearest_rank(std::span<const double> values, double q) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return percentile_sorted(v, q);
}

}  // namespace collage
