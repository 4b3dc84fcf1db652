#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collage/protocol.hpp"

namespace collage {

/// Milliseconds since an arbitrary epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_ms() = 0;
};

class SteadyClock final : public Clock {
 public:
  double now_ms() override;
};

enum class ReadStatus { Line, Timeout, Closed };

struct ReadResult {
  ReadStatus status = ReadStatus::Timeout;
  std::string line;
};

/// A line-oriented duplex channel to one model backend. send_line and
/// read_line may be called concurrently from two different threads.
class BackendConnection {
 public:
  virtual ~BackendConnection() = default;
  /// Writes one line (newline appended). Returns false when the peer is gone.
  virtual bool send_line(std::string_view line) = 0;
  /// Waits up to `timeout` for the next complete line.
  virtual ReadResult read_line(std::chrono::milliseconds timeout) = 0;
};

/// Child process spoken to over its stdin/stdout (`/bin/sh -c command`).
/// Stderr is inherited. The child is terminated on destruction.
class ProcessBackend final : public BackendConnection {
 public:
  explicit ProcessBackend(const std::string& command);
  ~ProcessBackend() override;
  ProcessBackend(const ProcessBackend&) = delete;
  ProcessBackend& operator=(const ProcessBackend&) = delete;

  bool send_line(std::string_view line) override;
  ReadResult read_line(std::chrono::milliseconds timeout) override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
};

struct LiveBatch {
  std::string id = "batch";
  std::vector<std::string> images;  // one per request, n = spec.cells()
  std::string collage_image;
};

struct LiveConfig {
  ProtocolConfig protocol;
  /// Requests still unanswered this long after T_r fail.
  double reissue_timeout_ms = 1000.0;
};

enum class LiveStatus { Ok, Failed };

struct LiveCompletion {
  LiveStatus status = LiveStatus::Failed;
  std::optional<Completion> completion;  // protocol time, ms after dispatch
  double wall_ms = 0.0;                  // clock reading when the answer was settled
  std::string error;
};

struct LiveResult {
  std::vector<LiveCompletion> requests;
  std::vector<ProtocolEvent> events;      // exactly as applied to the state machine
  std::vector<std::string> diagnostics;   // dropped lines, backend errors, send failures
  std::vector<LateResult> late_results;
};

/// Runs one batch against live backends: request i goes to
/// singles[i % singles.size()], the collage to `collage`, and a reissue of
/// request i to singles[(i + 1) % singles.size()]. Arrivals and deadline ticks
/// drive the same state machine the simulator uses. Backend EOF and error
/// responses count as a result that never arrives.
/// Throws ConfigError on an invalid config or batch shape.
LiveResult dispatch_live(const LiveBatch& batch, std::span<BackendConnection* const> singles,
                         BackendConnection& collage, const LiveConfig& config, Clock& clock);

/// Applies a recorded event sequence to a fresh state.
BatchState replay_events(std::size_t n, std::span<const ProtocolEvent> events, const ProtocolConfig& config);

}  // namespace collage
