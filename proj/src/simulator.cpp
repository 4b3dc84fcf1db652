#include "collage/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "collage/errors.hpp"

namespace collage {

std::string scheme_id(const Scheme& scheme) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, NoRedundancy>) return "NO_REDUNDANCY";
        else if constexpr (std::is_same_v<S, Replication>) return "REPLICATION_" + std::to_string(s.replicas);
        else {
          const auto side = std::to_string(s.protocol.spec.side());
          return "COLLAGE_" + side + "x" + side;
        }
      },
      scheme);
}

void Workload::validate() const {
  if (num_batches < 1) throw ConfigError("num_batches", "must be >= 1");
  single_latency.validate("single_model");
  accuracy.validate();
  if (trace) {
    if (trace->single.empty()) throw ConfigError("trace", "needs at least one single-task latency");
    auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
    if (std::any_of(trace->single.begin(), trace->single.end(), bad) ||
        std::any_of(trace->collage.begin(), trace->collage.end(), bad))
      throw ConfigError("trace", "latencies must be positive and finite");
  }
}

double resource_overhead(const Scheme& scheme, const GridSpec& spec) {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, NoRedundancy>) return 1.0;
        else if constexpr (std::is_same_v<S, Replication>) return static_cast<double>(s.replicas);
        else {
          const auto n = static_cast<double>(spec.cells());
          return (n + s.collage_cost) / n;
        }
      },
      scheme);
}

namespace {

void validate_scheme(const Scheme& scheme, const Workload& w) {
  if (const auto* r = std::get_if<Replication>(&scheme); r && r->replicas < 1)
    throw ConfigError("schemes.r", "replica count must be >= 1");
  if (const auto* c = std::get_if<CollageCoding>(&scheme)) {
    c->protocol.validate();
    if (!(c->protocol.spec == w.spec))
      throw ConfigError("protocol.spec", "collage grid must match the workload grid");
    c->collage_latency.validate("collage_model");
    if (!(c->collage_cost >= 0.0) || !std::isfinite(c->collage_cost))
      throw ConfigError("schemes.collage_cost", "must be >= 0");
    if (w.trace && w.trace->collage.empty())
      throw ConfigError("trace", "collage scheme needs at least one collage latency");
  }
}

class LatencySource {
 public:
  LatencySource(const LatencyModel& model, const std::vector<double>* trace)
      : model_(model), trace_(trace) {}

  double next(Prng& prng) {
    const double v = sample_latency(model_, prng);
    if (trace_ == nullptr || trace_->empty()) return v;
    const double t = (*trace_)[cursor_];
    cursor_ = (cursor_ + 1) % trace_->size();
    return t;
  }

 private:
  LatencyModel model_;
  const std::vector<double>* trace_;
  std::size_t cursor_ = 0;
};

struct QueuedEvent {
  double time;
  int rank;
  std::size_t seq;
  ProtocolEvent event;
};

struct LaterFirst {
  bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.rank != b.rank) return a.rank > b.rank;
    return a.seq > b.seq;
  }
};

}  // namespace

CollageReplay replay_collage_batch(const OracleInputs& in, const std::vector<DetectionBox>& boxes,
                                   const std::vector<int>& single_classes,
                                   const std::vector<int>& reissue_classes, const ProtocolConfig& cfg) {
  const std::size_t n = in.single_times.size();
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, LaterFirst> queue;
  std::size_t seq = 0;
  auto push = [&](ProtocolEvent ev) {
    const double t = event_time(ev);
    const int rank = event_rank(ev);
    queue.push(QueuedEvent{t, rank, seq++, std::move(ev)});
  };

  for (std::size_t i = 0; i < n; ++i)
    if (in.single_times[i] != kNever) push(SingleResult{i, in.single_times[i], single_classes.at(i)});
  if (in.collage_time != kNever) push(CollageResult{in.collage_time, boxes});
  push(DeadlineTick{cfg.straggler_deadline});
  push(DeadlineTick{cfg.reissue_deadline});

  CollageReplay out;
  out.complete_actions.assign(n, 0);
  BatchState state(n);
  std::vector<Action> actions;
  while (!queue.empty()) {
    QueuedEvent qe = queue.top();
    queue.pop();
    actions.clear();
    apply_event(state, cfg, qe.event, actions);
    out.events.push_back(std::move(qe.event));
    for (const Action& a : actions) {
      if (const auto* c = std::get_if<Complete>(&a)) {
        ++out.complete_actions[c->request];
      } else {
        const std::size_t i = std::get<IssueReissue>(a).request;
        const double d = i < in.reissue_durations.size() ? in.reissue_durations[i] : kNever;
        if (d != kNever) push(ReissueResult{i, state.clock + d, reissue_classes.at(i)});
      }
    }
  }
  out.completions = state.requests;
  return out;
}

SimulationRun run_scheme_detailed(const Scheme& scheme, const Workload& w, std::uint64_t seed) {
  w.validate();
  validate_scheme(scheme, w);

  const std::size_t n = w.spec.cells();
  const auto* rep = std::get_if<Replication>(&scheme);
  const auto* col = std::get_if<CollageCoding>(&scheme);
  const std::size_t replicas = rep ? static_cast<std::size_t>(rep->replicas) : 1;
  const int K = w.accuracy.num_classes;

  Prng prng(seed);
  LatencySource single_src(w.single_latency, w.trace ? &w.trace->single : nullptr);
  // Without a collage scheme the collage draw only keeps the stream aligned.
  LatencySource collage_src(col ? col->collage_latency : w.single_latency,
                            w.trace && col ? &w.trace->collage : nullptr);

  SimulationRun run;
  run.batches.reserve(w.num_batches);
  std::vector<double> latencies;
  latencies.reserve(w.num_batches * n);
  std::vector<ServedAnswer> answers;
  std::vector<int> all_truths;
  answers.reserve(w.num_batches * n);
  all_truths.reserve(w.num_batches * n);

  std::vector<int> single_cls(n), reissue_cls(n);
  for (std::size_t b = 0; b < w.num_batches; ++b) {
    BatchRecord rec;
    OracleInputs& in = rec.inputs;
    in.single_times.assign(n, kNever);
    for (std::size_t i = 0; i < n; ++i) {
      double best = kNever;
      for (std::size_t k = 0; k < replicas; ++k) best = std::min(best, single_src.next(prng));
      in.single_times[i] = best;
    }
    in.collage_time = collage_src.next(prng);

    rec.truths.resize(n);
    for (auto& t : rec.truths) t = draw_truth(K, prng);
    for (std::size_t i = 0; i < n; ++i)
      single_cls[i] = mock_classify(rec.truths[i], w.accuracy.acc_single, K, prng);
    const auto boxes = mock_collage_boxes(rec.truths, w.accuracy, w.spec, prng);

    in.reissue_durations.resize(n);
    for (auto& d : in.reissue_durations) d = single_src.next(prng);
    for (std::size_t i = 0; i < n; ++i)
      reissue_cls[i] = mock_classify(rec.truths[i], w.accuracy.acc_single, K, prng);

    if (col) {
      const DecodedCollage dc = decode_collage(boxes, w.spec, col->protocol.min_confidence);
      in.decoded.resize(n);
      for (std::size_t i = 0; i < n; ++i) in.decoded[i] = dc.decoded(i);
      const CollageReplay replay = replay_collage_batch(in, boxes, single_cls, reissue_cls, col->protocol);
      rec.completions.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        // Reissue durations are finite, so every request resolves.
        rec.completions.push_back(replay.completions[i].value());
      }
    } else {
      in.collage_time = kNever;
      in.decoded.assign(n, false);
      for (std::size_t i = 0; i < n; ++i)
        rec.completions.push_back(Completion{Source::Single, in.single_times[i], single_cls[i]});
    }

    for (std::size_t i = 0; i < n; ++i) {
      latencies.push_back(rec.completions[i].time);
      answers.push_back(ServedAnswer{rec.completions[i].source, rec.completions[i].class_id});
      all_truths.push_back(rec.truths[i]);
    }
    run.batches.push_back(std::move(rec));
  }

  SchemeReport& r = run.report;
  r.scheme = scheme_id(scheme);
  r.requests = latencies.size();
  // Left-to-right summation in request order keeps the mean reproducible.
  r.mean = std::accumulate(latencies.begin(), latencies.end(), 0.0) / static_cast<double>(latencies.size());
  std::vector<double> sorted = latencies;
  std::sort(sorted.begin(), sorted.end());
  r.p50 = percentile_sorted(sorted, 50.0);
  r.p95 = percentile_sorted(sorted, 95.0);
  r.p99 = percentile_sorted(sorted, 99.0);
  r.p999 = percentile_sorted(sorted, 99.9);
  r.max = sorted.back();
  r.accuracy_detail = end_to_end_accuracy(answers, all_truths);
  r.accuracy = r.accuracy_detail.accuracy;
  r.frac_single = r.accuracy_detail.source_fraction(Source::Single);
  r.frac_collage = r.accuracy_detail.source_fraction(Source::Collage);
  r.frac_reissue = r.accuracy_detail.source_fraction(Source::Reissue);
  r.overhead = resource_overhead(scheme, w.spec);
  return run;
}

SchemeReport run_scheme(const Scheme& scheme, const Workload& workload, std::uint64_t seed) {
  return run_scheme_detailed(scheme, workload, seed).report;
}

}  // namespace collage
