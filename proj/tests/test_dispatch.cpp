#include <gtest/gtest.h>

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>

#include "collage/bridge.hpp"
#include "collage/dispatch.hpp"
#include "collage/errors.hpp"

using namespace collage;
using namespace std::chrono_literals;

namespace {

struct Scripted {
  std::optional<int> delay_ms;  // nullopt = never answer
  BridgeResponse response;
};

// In-process backend: each request is answered by `script` after a delay.
class ScriptedBackend final : public BackendConnection {
 public:
  using Script = std::function<Scripted(const BridgeRequest&)>;
  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  bool send_line(std::string_view line) override {
    const BridgeRequest req = decode_request(line);
    Scripted s = script_(req);
    std::lock_guard lk(mu_);
    sent_.push_back(req.id);
    if (s.delay_ms)
      pending_.push_back({std::chrono::steady_clock::now() + std::chrono::milliseconds(*s.delay_ms),
                          encode_response(s.response)});
    cv_.notify_all();
    return true;
  }

  ReadResult read_line(std::chrono::milliseconds timeout) override {
    std::unique_lock lk(mu_);
    const auto until = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const auto now = std::chrono::steady_clock::now();
      auto best = pending_.end();
      for (auto it = pending_.begin(); it != pending_.end(); ++it)
        if (best == pending_.end() || it->first < best->first) best = it;
      if (best != pending_.end() && best->first <= now) {
        std::string line = std::move(best->second);
        pending_.erase(best);
        return {ReadStatus::Line, std::move(line)};
      }
      if (closed_ && pending_.empty()) return {ReadStatus::Closed, {}};
      if (now >= until) return {ReadStatus::Timeout, {}};
      const auto wake = best != pending_.end() ? std::min(best->first, until) : until;
      cv_.wait_until(lk, wake);
    }
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    cv_.notify_all();
  }

  std::vector<std::string> sent() {
    std::lock_guard lk(mu_);
    return sent_;
  }

 private:
  Script script_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::pair<std::chrono::steady_clock::time_point, std::string>> pending_;
  std::vector<std::string> sent_;
  bool closed_ = false;
};

BridgeResponse single_answer(const std::string& id, int cls) {
  BridgeResponse r;
  r.id = id;
  r.class_id = cls;
  return r;
}

BridgeResponse collage_answer(const std::string& id, std::size_t s, int cls) {
  BridgeResponse r;
  r.id = id;
  std::vector<DetectionBox> boxes;
  for (std::size_t i = 0; i < s * s; ++i)
    boxes.push_back({((i % s) + 0.5) / s, ((i / s) + 0.5) / s, 0.5 / s, 0.5 / s, cls + static_cast<int>(i), 0.9});
  r.boxes = std::move(boxes);
  return r;
}

bool contains(const std::string& id, const std::string& part) { return id.find(part) != std::string::npos; }

LiveConfig make_config(std::size_t s) {
  LiveConfig cfg;
  cfg.protocol.spec = GridSpec(s);
  cfg.protocol.straggler_deadline = 150.0;
  cfg.protocol.reissue_deadline = 400.0;
  cfg.reissue_timeout_ms = 300.0;
  return cfg;
}

LiveBatch make_batch(std::size_t n) {
  LiveBatch b;
  b.id = "t";
  for (std::size_t i = 0; i < n; ++i) b.images.push_back("img" + std::to_string(i) + ".ppm");
  b.collage_image = "collage.ppm";
  return b;
}

// Singles answer `7` promptly except for ids matching `stall`; the collage
// answers at `collage_delay` (nullopt = never).
ScriptedBackend::Script singles_script(std::string stall = "") {
  return [stall](const BridgeRequest& req) {
    if (!stall.empty() && contains(req.id, stall)) return Scripted{std::nullopt, {}};
    return Scripted{5, single_answer(req.id, 7)};
  };
}

ScriptedBackend::Script collage_script(std::optional<int> delay, std::size_t s) {
  return [delay, s](const BridgeRequest& req) { return Scripted{delay, collage_answer(req.id, s, 100)}; };
}

}  // namespace

TEST(Dispatch, PromptBackendsAnswerEverythingFromSingles) {
  const auto cfg = make_config(2);
  ScriptedBackend a(singles_script()), b(singles_script()), coll(collage_script(5, 2));
  std::array<BackendConnection*, 2> pool{&a, &b};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(4), pool, coll, cfg, clock);
  for (const auto& lc : r.requests) {
    ASSERT_EQ(lc.status, LiveStatus::Ok);
    EXPECT_EQ(lc.completion->source, Source::Single);
    EXPECT_EQ(lc.completion->class_id, 7);
    EXPECT_LT(lc.completion->time, cfg.protocol.straggler_deadline);
  }
  EXPECT_EQ(a.sent(), (std::vector<std::string>{"t/single/0", "t/single/2"}));
  EXPECT_EQ(b.sent(), (std::vector<std::string>{"t/single/1", "t/single/3"}));
}

TEST(Dispatch, StalledSingleIsFilledFromCollageAfterDeadline) {
  const auto cfg = make_config(2);
  ScriptedBackend singles(singles_script("/single/2")), coll(collage_script(20, 2));
  std::array<BackendConnection*, 1> pool{&singles};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(4), pool, coll, cfg, clock);
  ASSERT_EQ(r.requests[2].status, LiveStatus::Ok);
  EXPECT_EQ(r.requests[2].completion->source, Source::Collage);
  EXPECT_EQ(r.requests[2].completion->class_id, 102);
  EXPECT_GE(r.requests[2].completion->time, cfg.protocol.straggler_deadline);
  EXPECT_GE(r.requests[2].wall_ms, cfg.protocol.straggler_deadline);
  for (std::size_t i : {0u, 1u, 3u}) EXPECT_EQ(r.requests[i].completion->source, Source::Single);
}

TEST(Dispatch, ReissueAnswersWhenCollageNeverArrives) {
  const auto cfg = make_config(2);
  ScriptedBackend s0(singles_script()), s1(singles_script("/single/1"));
  ScriptedBackend coll(collage_script(std::nullopt, 2));
  std::array<BackendConnection*, 2> pool{&s0, &s1};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(4), pool, coll, cfg, clock);
  // Request 1 lives on s1; its reissue goes to the next backend in the pool.
  ASSERT_EQ(r.requests[1].status, LiveStatus::Ok);
  EXPECT_EQ(r.requests[1].completion->source, Source::Reissue);
  EXPECT_GE(r.requests[1].completion->time, cfg.protocol.reissue_deadline);
  const auto sent0 = s0.sent();
  EXPECT_NE(std::find(sent0.begin(), sent0.end(), "t/reissue/1"), sent0.end());
}

TEST(Dispatch, EverythingStalledFailsAfterTimeout) {
  const auto cfg = make_config(2);
  ScriptedBackend singles(singles_script("t/")), coll(collage_script(std::nullopt, 2));
  std::array<BackendConnection*, 1> pool{&singles};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(4), pool, coll, cfg, clock);
  for (const auto& lc : r.requests) {
    EXPECT_EQ(lc.status, LiveStatus::Failed);
    EXPECT_FALSE(lc.completion);
    EXPECT_GE(lc.wall_ms, cfg.protocol.reissue_deadline + cfg.reissue_timeout_ms);
  }
}

TEST(Dispatch, ErrorResponseCountsAsNeverArriving) {
  const auto cfg = make_config(2);
  ScriptedBackend singles([](const BridgeRequest& req) {
    if (req.id == "t/single/0") {
      BridgeResponse e;
      e.id = req.id;
      e.error = "oom";
      return Scripted{5, e};
    }
    return Scripted{5, single_answer(req.id, 7)};
  });
  ScriptedBackend coll(collage_script(10, 2));
  std::array<BackendConnection*, 1> pool{&singles};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(4), pool, coll, cfg, clock);
  EXPECT_EQ(r.requests[0].completion->source, Source::Collage);
  EXPECT_TRUE(std::any_of(r.diagnostics.begin(), r.diagnostics.end(),
                          [](const std::string& d) { return contains(d, "oom"); }));
}

TEST(Dispatch, ClosedBackendIsDiagnosedNotFatal) {
  const auto cfg = make_config(1);
  ScriptedBackend singles(singles_script("t/")), coll(collage_script(10, 1));
  singles.close();
  std::array<BackendConnection*, 1> pool{&singles};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(1), pool, coll, cfg, clock);
  EXPECT_EQ(r.requests[0].completion->source, Source::Collage);
  EXPECT_TRUE(std::any_of(r.diagnostics.begin(), r.diagnostics.end(),
                          [](const std::string& d) { return contains(d, "closed"); }));
}

TEST(Dispatch, EventLogReplaysToSameOutcome) {
  const auto cfg = make_config(2);
  ScriptedBackend singles(singles_script("/single/3")), coll(collage_script(30, 2));
  std::array<BackendConnection*, 1> pool{&singles};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(4), pool, coll, cfg, clock);

  std::vector<ProtocolEvent> decoded;
  for (const auto& ev : r.events) decoded.push_back(decode_event(encode_event(ev)));
  const BatchState replayed = replay_events(4, decoded, cfg.protocol);
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_TRUE(replayed.requests[i]);
    EXPECT_EQ(*replayed.requests[i], *r.requests[i].completion);
  }
}

TEST(Dispatch, RejectsBadShapes) {
  const auto cfg = make_config(2);
  ScriptedBackend s(singles_script()), coll(collage_script(5, 2));
  std::array<BackendConnection*, 1> pool{&s};
  SteadyClock clock;
  EXPECT_THROW(dispatch_live(make_batch(3), pool, coll, cfg, clock), ConfigError);
  EXPECT_THROW(dispatch_live(make_batch(4), std::span<BackendConnection* const>{}, coll, cfg, clock), ConfigError);
}

TEST(ProcessBackendTest, FakeBackendsOverPipes) {
  const auto cfg = make_config(2);
  const std::string exe = COLLAGE_FAKE_BACKEND;
  ProcessBackend a(exe + " --class 3"), b(exe + " --class 3 --stall /single/3 --garbage");
  ProcessBackend coll(exe + " --class 5 --delay-ms 20");
  std::array<BackendConnection*, 2> pool{&a, &b};
  SteadyClock clock;
  const auto r = dispatch_live(make_batch(4), pool, coll, cfg, clock);
  for (std::size_t i : {0u, 1u, 2u}) {
    ASSERT_EQ(r.requests[i].status, LiveStatus::Ok);
    EXPECT_EQ(r.requests[i].completion->source, Source::Single);
    EXPECT_EQ(r.requests[i].completion->class_id, 3);
  }
  ASSERT_EQ(r.requests[3].status, LiveStatus::Ok);
  EXPECT_EQ(r.requests[3].completion->source, Source::Collage);
  EXPECT_EQ(r.requests[3].completion->class_id, 5);
  EXPECT_FALSE(r.diagnostics.empty());  // the malformed line
}

TEST(ProcessBackendTest, ExitedChildReadsAsClosed) {
  ProcessBackend p("exit 0");
  ReadResult r;
  for (int k = 0; k < 100 && r.status != ReadStatus::Closed; ++k) r = p.read_line(50ms);
  EXPECT_EQ(r.status, ReadStatus::Closed);
}
