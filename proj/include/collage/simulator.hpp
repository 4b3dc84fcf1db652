#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "collage/latency.hpp"
#include "collage/mock_models.hpp"
#include "collage/protocol.hpp"

namespace collage {

struct NoRedundancy {};

struct Replication {
  int replicas = 2;
};

struct CollageCoding {
  ProtocolConfig protocol;
  LatencyModel collage_latency;
  double collage_cost = 1.0;  // worker-equivalents per collage inference
};

using Scheme = std::variant<NoRedundancy, Replication, CollageCoding>;

/// e.g. "NO_REDUNDANCY", "REPLICATION_2", "COLLAGE_3x3".
std::string scheme_id(const Scheme& scheme);

/// Recorded per-task latencies replayed in place of parametric draws. Values
/// are consumed in order and wrap around.
struct LatencyTrace {
  std::vector<double> single;
  std::vector<double> collage;
};

struct Workload {
  std::size_t num_batches = 1;
  GridSpec spec{3};
  LatencyModel single_latency;
  MockModelParams accuracy;
  std::optional<LatencyTrace> trace;

  void validate() const;
};

struct SchemeReport {
  std::string scheme;
  std::size_t requests = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double p999 = 0.0;
  double max = 0.0;
  double accuracy = 0.0;
  double frac_single = 0.0;
  double frac_collage = 0.0;
  double frac_reissue = 0.0;
  double overhead = 1.0;
  AccuracyReport accuracy_detail;
};

/// Raw draws and outcome of one simulated batch.
struct BatchRecord {
  OracleInputs inputs;           // collage fields unused outside COLLAGE
  std::vector<int> truths;
  std::vector<Completion> completions;
};

struct SimulationRun {
  SchemeReport report;
  std::vector<BatchRecord> batches;
};

/// Simulates num_batches batches of n requests under one scheme.
///
/// Every batch consumes the PRNG in a fixed order regardless of scheme or
/// outcome (r = replica count, 1 for non-replicated schemes):
///   1. n * r single latencies, request by request;
///   2. one collage latency;
///   3. n ground-truth labels;
///   4. n single-model predictions (two uniforms each);
///   5. n collage cells (kCollageDrawsPerCell uniforms each);
///   6. n reissue latencies;
///   7. n reissue predictions (two uniforms each).
/// Each latency draw uses three uniforms. When a trace is attached the drawn
/// latency is replaced by the next trace value, the draw itself still happens.
///
/// Throws ConfigError before simulating when the scheme or workload is invalid.
SimulationRun run_scheme_detailed(const Scheme& scheme, const Workload& workload, std::uint64_t seed);

SchemeReport run_scheme(const Scheme& scheme, const Workload& workload, std::uint64_t seed);

/// Worker-equivalents per request: 1, r, or (n + collage_cost) / n.
double resource_overhead(const Scheme& scheme, const GridSpec& spec);

struct CollageReplay {
  std::vector<std::optional<Completion>> completions;  // nullopt = never resolved
  std::vector<ProtocolEvent> events;                    // in the order applied
  std::vector<std::size_t> complete_actions;            // COMPLETE count per request
};

/// Event-driven replay of one collage batch through the recovery protocol.
/// Single results, the collage result and deadline ticks at T_d and T_r are
/// queued by (time, event_rank); each ISSUE_REISSUE enqueues a reissue result
/// at T_r + reissue_durations[i]. Entries equal to kNever are never delivered.
CollageReplay replay_collage_batch(const OracleInputs& inputs, const std::vector<DetectionBox>& boxes,
                                   const std::vector<int>& single_classes,
                                   const std::vector<int>& reissue_classes, const ProtocolConfig& config);

}  // namespace collage
