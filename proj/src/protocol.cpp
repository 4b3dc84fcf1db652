#include "collage/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collage/errors.hpp"

namespace collage {

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::Single: return "SINGLE";
    case Source::Collage: return "COLLAGE";
    case Source::Reissue: return "REISSUE";
  }
  return "?";
}

std::string_view to_string(FillPolicy p) noexcept {
  switch (p) {
    case FillPolicy::FillAfterDeadline: return "fill_after_deadline";
    case FillPolicy::FillOnArrival: return "fill_on_arrival";
  }
  return "?";
}

void ProtocolConfig::validate() const {
  if (!(straggler_deadline > 0.0) || !std::isfinite(straggler_deadline))
    throw ConfigError("protocol.straggler_deadline_ms", "must be a positive finite number");
  if (!(reissue_deadline > straggler_deadline) || !std::isfinite(reissue_deadline))
    throw ConfigError("protocol.reissue_deadline_ms", "must be finite and greater than straggler_deadline_ms");
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0))
    throw ConfigError("protocol.min_confidence", "must be in [0, 1]");
}

double event_time(const ProtocolEvent& ev) noexcept {
  return std::visit([](const auto& e) { return e.time; }, ev);
}

int event_rank(const ProtocolEvent& ev) noexcept {
  // variant order already encodes single < collage < tick < reissue
  return static_cast<int>(ev.index());
}

bool BatchState::all_done() const {
  return std::all_of(requests.begin(), requests.end(), [](const auto& r) { return r.has_value(); });
}

namespace {

void complete(BatchState& st, std::size_t i, Completion c, std::vector<Action>& actions) {
  st.requests[i] = c;
  actions.push_back(Complete{i, c});
}

void fill_from_collage(BatchState& st, double at, std::vector<Action>& actions) {
  const DecodedCollage& dc = *st.collage;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (!st.pending(i) || !dc.slots[i]) continue;
    complete(st, i, Completion{Source::Collage, at, dc.slots[i]->class_id}, actions);
  }
}

// Applies deadline consequences up to `now`. With `inclusive`, deadlines equal
// to now fire too; otherwise only those strictly before it.
void advance(BatchState& st, const ProtocolConfig& cfg, double now, bool inclusive,
             std::vector<Action>& actions) {
  auto reached = [&](double deadline) { return inclusive ? now >= deadline : now > deadline; };

  if (cfg.policy == FillPolicy::FillAfterDeadline && st.collage &&
      reached(cfg.straggler_deadline))
    fill_from_collage(st, std::max(cfg.straggler_deadline, *st.collage_arrival), actions);

  if (reached(cfg.reissue_deadline)) {
    for (std::size_t i = 0; i < st.size(); ++i) {
      if (st.pending(i) && !st.reissued[i]) {
        st.reissued[i] = true;
        actions.push_back(IssueReissue{i});
      }
    }
  }
}

void check_request(const BatchState& st, std::size_t i) {
  if (i >= st.size())
    throw ProtocolError("request index " + std::to_string(i) + " out of range for batch of " +
                        std::to_string(st.size()));
}

}  // namespace

void apply_event(BatchState& st, const ProtocolConfig& cfg, const ProtocolEvent& ev,
                 std::vector<Action>& actions) {
  const double t = event_time(ev);
  if (!(t >= 0.0)) throw ProtocolError("event time must be non-negative");
  if (t < st.clock)
    throw ProtocolError("event time " + std::to_string(t) + " precedes current time " +
                        std::to_string(st.clock));
  st.clock = t;

  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, DeadlineTick>) {
          advance(st, cfg, t, /*inclusive=*/true, actions);
          return;
        } else {
          advance(st, cfg, t, /*inclusive=*/false, actions);
        }

        if constexpr (std::is_same_v<E, SingleResult> || std::is_same_v<E, ReissueResult>) {
          constexpr Source src = std::is_same_v<E, SingleResult> ? Source::Single : Source::Reissue;
          check_request(st, e.request);
          if (st.pending(e.request))
            complete(st, e.request, Completion{src, t, e.class_id}, actions);
          else
            st.audit.push_back(LateResult{e.request, src, t, e.class_id});
        } else if constexpr (std::is_same_v<E, CollageResult>) {
          if (st.collage) return;  // duplicate collage answer
          st.collage_arrival = t;
          st.collage = decode_collage(e.boxes, cfg.spec, cfg.min_confidence);
          if (cfg.policy == FillPolicy::FillOnArrival || t >= cfg.straggler_deadline)
            fill_from_collage(st, t, actions);
        }
      },
      ev);
}

Transition on_event(BatchState state, const ProtocolConfig& config, const ProtocolEvent& ev) {
  Transition tr{std::move(state), {}};
  apply_event(tr.state, config, ev, tr.actions);
  return tr;
}

std::vector<OracleCompletion> completion_oracle(const OracleInputs& in, const ProtocolConfig& cfg) {
  const std::size_t n = in.single_times.size();
  std::vector<OracleCompletion> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ts = in.single_times[i];
    double tc = kNever;
    if (i < in.decoded.size() && in.decoded[i] && in.collage_time != kNever)
      tc = cfg.policy == FillPolicy::FillAfterDeadline
               ? std::max(cfg.straggler_deadline, in.collage_time)
               : in.collage_time;
    double tr = kNever;
    if (std::min(ts, tc) > cfg.reissue_deadline && i < in.reissue_durations.size())
      tr = cfg.reissue_deadline + in.reissue_durations[i];

    OracleCompletion& c = out[i];
    if (ts != kNever && ts <= tc && ts <= tr) c = {ts, Source::Single};
    else if (tc != kNever && tc <= tr) c = {tc, Source::Collage};
    else if (tr != kNever) c = {tr, Source::Reissue};
  }
  return out;
}

}  // namespace collage
