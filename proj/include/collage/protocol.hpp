#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "collage/decoder.hpp"
#include "collage/geometry.hpp"

namespace collage {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

enum class Source { Single, Collage, Reissue };
enum class FillPolicy { FillAfterDeadline, FillOnArrival };

std::string_view to_string(Source s) noexcept;
std::string_view to_string(FillPolicy p) noexcept;

/// Deadlines are offsets from batch dispatch, in the caller's time unit.
struct ProtocolConfig {
  GridSpec spec{1};
  double straggler_deadline = 1.0;  // T_d
  double reissue_deadline = 2.0;    // T_r
  FillPolicy policy = FillPolicy::FillAfterDeadline;
  double min_confidence = 0.0;

  /// Throws ConfigError unless 0 < T_d < T_r and min_confidence is in [0, 1].
  void validate() const;
};

struct SingleResult {
  std::size_t request = 0;
  double time = 0.0;
  int class_id = 0;
};
struct CollageResult {
  double time = 0.0;
  std::vector<DetectionBox> boxes;
};
struct DeadlineTick {
  double time = 0.0;
};
struct ReissueResult {
  std::size_t request = 0;
  double time = 0.0;
  int class_id = 0;
};
using ProtocolEvent = std::variant<SingleResult, CollageResult, DeadlineTick, ReissueResult>;

double event_time(const ProtocolEvent& ev) noexcept;

/// Ordering rank for events that share a timestamp. Drivers replay
/// simultaneous events in increasing rank so that ties resolve as
/// single > collage > reissue.
int event_rank(const ProtocolEvent& ev) noexcept;

struct Completion {
  Source source = Source::Single;
  double time = 0.0;
  int class_id = 0;

  friend bool operator==(const Completion&, const Completion&) = default;
};

struct Complete {
  std::size_t request = 0;
  Completion completion;
};
struct IssueReissue {
  std::size_t request = 0;
};
using Action = std::variant<Complete, IssueReissue>;

/// A result that arrived for a request already answered.
struct LateResult {
  std::size_t request = 0;
  Source source = Source::Single;
  double time = 0.0;
  int class_id = 0;
};

/// Bookkeeping for one batch of n single tasks plus one collage task.
struct BatchState {
  explicit BatchState(std::size_t n)
      : requests(n), reissued(n, false) {}

  std::vector<std::optional<Completion>> requests;  // nullopt = PENDING
  std::vector<bool> reissued;
  std::optional<double> collage_arrival;
  std::optional<DecodedCollage> collage;
  double clock = 0.0;
  std::vector<LateResult> audit;

  bool pending(std::size_t i) const { return !requests.at(i).has_value(); }
  bool all_done() const;
  std::size_t size() const noexcept { return requests.size(); }
};

struct Transition {
  BatchState state;
  std::vector<Action> actions;
};

/// Pure transition: returns the successor state and the actions it emits.
/// Throws ProtocolError on time regression, negative times, or an
/// out-of-range request index.
///
/// Drivers must feed DeadlineTick at T_d and at T_r; any later event also
/// applies deadlines that strictly precede it.
Transition on_event(BatchState state, const ProtocolConfig& config, const ProtocolEvent& ev);

/// In-place form of on_event; appends emitted actions to `actions`.
void apply_event(BatchState& state, const ProtocolConfig& config, const ProtocolEvent& ev,
                 std::vector<Action>& actions);

/// Raw per-batch timings from which completions follow in closed form.
struct OracleInputs {
  std::vector<double> single_times;      // kNever = never arrives
  double collage_time = kNever;
  std::vector<bool> decoded;             // slot mask of the decoded collage
  std::vector<double> reissue_durations; // measured from T_r; kNever = never returns
};

struct OracleCompletion {
  double time = kNever;
  std::optional<Source> source;  // nullopt = never completes

  friend bool operator==(const OracleCompletion&, const OracleCompletion&) = default;
};

/// t_i = min(single_i, c_i, r_i) with c_i = max(T_d, t_collage) (or t_collage
/// under FillOnArrival) when slot i decodes, and r_i = T_r + duration_i when
/// both earlier paths miss T_r. Ties prefer single, then collage, then reissue.
std::vector<OracleCompletion> completion_oracle(const OracleInputs& in, const ProtocolConfig& config);

}  // namespace collage
