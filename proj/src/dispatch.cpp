#include "collage/dispatch.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "collage/bridge.hpp"
#include "collage/errors.hpp"

extern char** environ;

namespace collage {

double SteadyClock::now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

// ---------------------------------------------------------------------------
// ProcessBackend

ProcessBackend::ProcessBackend(const std::string& command) {
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw std::runtime_error("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw std::runtime_error("pipe failed");
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw std::runtime_error("cannot spawn backend: " + command);
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ProcessBackend::~ProcessBackend() {
  if (to_child_ >= 0) ::close(to_child_);
  if (pid_ > 0) {
    int status = 0;
    bool reaped = false;
    for (int k = 0; k < 20 && !reaped; ++k) {
      reaped = ::waitpid(pid_, &status, WNOHANG) == pid_;
      if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    if (!reaped) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }
  if (from_child_ >= 0) ::close(from_child_);
}

bool ProcessBackend::send_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

ReadResult ProcessBackend::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      ReadResult r{ReadStatus::Line, buffer_.substr(0, nl)};
      if (!r.line.empty() && r.line.back() == '\r') r.line.pop_back();
      buffer_.erase(0, nl + 1);
      return r;
    }
    if (eof_) return {ReadStatus::Closed, {}};

    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return {ReadStatus::Timeout, {}};
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) return {ReadStatus::Timeout, {}};

    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      eof_ = true;
      continue;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

// ---------------------------------------------------------------------------
// dispatch_live

namespace {

struct Arrival {
  std::size_t connection = 0;
  double time = 0.0;
  bool closed = false;
  std::string line;
};

enum class TaskKind { Single, Collage, Reissue };

struct Outstanding {
  TaskKind kind = TaskKind::Single;
  std::size_t request = 0;
};

class ArrivalQueue {
 public:
  void push(Arrival a, Clock& clock, double t0) {
    {
      std::lock_guard lk(mu_);
      // Stamped under the lock so queue order and timestamps agree.
      a.time = clock.now_ms() - t0;
      items_.push_back(std::move(a));
    }
    cv_.notify_one();
  }

  std::optional<Arrival> pop_for(double wait_ms) {
    std::unique_lock lk(mu_);
    const auto dur = std::chrono::duration<double, std::milli>(std::max(0.0, wait_ms));
    cv_.wait_for(lk, dur, [&] { return !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    Arrival a = std::move(items_.front());
    items_.pop_front();
    return a;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Arrival> items_;
};

}  // namespace

LiveResult dispatch_live(const LiveBatch& batch, std::span<BackendConnection* const> singles,
                         BackendConnection& collage, const LiveConfig& config, Clock& clock) {
  const ProtocolConfig& pc = config.protocol;
  pc.validate();
  if (!(config.reissue_timeout_ms >= 0.0)) throw ConfigError("reissue_timeout_ms", "must be >= 0");
  const std::size_t n = pc.spec.cells();
  if (batch.images.size() != n)
    throw ConfigError("batch", "needs " + std::to_string(n) + " images, got " + std::to_string(batch.images.size()));
  if (singles.empty() || std::any_of(singles.begin(), singles.end(), [](auto* b) { return b == nullptr; }))
    throw ConfigError("single_backends", "at least one single backend is required");

  // Distinct connections, one reader each.
  std::vector<BackendConnection*> conns;
  for (auto* b : singles)
    if (std::find(conns.begin(), conns.end(), b) == conns.end()) conns.push_back(b);
  if (std::find(conns.begin(), conns.end(), &collage) == conns.end()) conns.push_back(&collage);

  LiveResult result;
  result.requests.resize(n);
  const double t0 = clock.now_ms();
  ArrivalQueue queue;

  std::vector<std::jthread> readers;
  readers.reserve(conns.size());
  for (std::size_t k = 0; k < conns.size(); ++k) {
    readers.emplace_back([&, k](std::stop_token stop) {
      while (!stop.stop_requested()) {
        ReadResult r = conns[k]->read_line(std::chrono::milliseconds(10));
        if (r.status == ReadStatus::Timeout) continue;
        const bool closed = r.status == ReadStatus::Closed;
        queue.push(Arrival{k, 0.0, closed, std::move(r.line)}, clock, t0);
        if (closed) return;
      }
    });
  }

  std::map<std::string, Outstanding> outstanding;
  auto send = [&](BackendConnection& conn, const BridgeRequest& req, Outstanding what) {
    outstanding[req.id] = what;
    if (!conn.send_line(encode_request(req)))
      result.diagnostics.push_back("send failed for " + req.id + " (backend gone)");
  };

  for (std::size_t i = 0; i < n; ++i)
    send(*singles[i % singles.size()],
         BridgeRequest{batch.id + "/single/" + std::to_string(i), RequestKind::Single, batch.images[i], std::nullopt},
         {TaskKind::Single, i});
  send(collage,
       BridgeRequest{batch.id + "/collage", RequestKind::Collage, batch.collage_image,
                     static_cast<int>(pc.spec.side())},
       {TaskKind::Collage, 0});

  BatchState state(n);
  std::vector<Action> actions;
  auto apply = [&](const ProtocolEvent& ev) {
    actions.clear();
    apply_event(state, pc, ev, actions);
    result.events.push_back(ev);
    for (const Action& a : actions) {
      if (const auto* c = std::get_if<Complete>(&a)) {
        LiveCompletion& lc = result.requests[c->request];
        lc.status = LiveStatus::Ok;
        lc.completion = c->completion;
        lc.wall_ms = clock.now_ms() - t0;
      } else {
        const std::size_t i = std::get<IssueReissue>(a).request;
        send(*singles[(i + 1) % singles.size()],
             BridgeRequest{batch.id + "/reissue/" + std::to_string(i), RequestKind::Single, batch.images[i],
                           std::nullopt},
             {TaskKind::Reissue, i});
      }
    }
  };

  const std::array<double, 2> deadlines{pc.straggler_deadline, pc.reissue_deadline};
  std::size_t ticked = 0;
  auto tick_before = [&](double t) {
    while (ticked < deadlines.size() && deadlines[ticked] < t) {
      apply(DeadlineTick{std::max(deadlines[ticked], state.clock)});
      ++ticked;
    }
  };
  const double give_up = pc.reissue_deadline + config.reissue_timeout_ms;

  while (!state.all_done()) {
    const double next = ticked < deadlines.size() ? deadlines[ticked] : give_up;
    const double now = clock.now_ms() - t0;
    std::optional<Arrival> arrival = queue.pop_for(next - now);
    if (!arrival) {
      if (clock.now_ms() - t0 < next) continue;
      if (ticked < deadlines.size()) {
        apply(DeadlineTick{std::max(deadlines[ticked], state.clock)});
        ++ticked;
        continue;
      }
      break;
    }

    if (arrival->closed) {
      result.diagnostics.push_back("backend connection " + std::to_string(arrival->connection) + " closed");
      continue;
    }
    const double t = std::max(arrival->time, state.clock);
    BridgeResponse resp;
    try {
      resp = decode_response(arrival->line);
    } catch (const ProtocolError& e) {
      result.diagnostics.push_back(e.what());
      continue;
    }
    const auto it = outstanding.find(resp.id);
    if (it == outstanding.end()) {
      result.diagnostics.push_back("response for unknown request id '" + resp.id + "'");
      continue;
    }
    const Outstanding what = it->second;
    outstanding.erase(it);
    if (resp.error) {
      result.diagnostics.push_back("backend error for " + resp.id + ": " + *resp.error);
      continue;
    }

    tick_before(t);
    switch (what.kind) {
      case TaskKind::Single:
      case TaskKind::Reissue:
        if (!resp.class_id) {
          result.diagnostics.push_back("expected class_id in response " + resp.id);
          continue;
        }
        if (what.kind == TaskKind::Single) apply(SingleResult{what.request, t, *resp.class_id});
        else apply(ReissueResult{what.request, t, *resp.class_id});
        break;
      case TaskKind::Collage:
        if (!resp.boxes) {
          result.diagnostics.push_back("expected boxes in response " + resp.id);
          continue;
        }
        apply(CollageResult{t, *resp.boxes});
        break;
    }
  }

  for (auto& r : readers) r.request_stop();
  readers.clear();

  for (std::size_t i = 0; i < n; ++i) {
    LiveCompletion& lc = result.requests[i];
    if (lc.status != LiveStatus::Ok) {
      lc.status = LiveStatus::Failed;
      lc.wall_ms = clock.now_ms() - t0;
      lc.error = "no answer within the reissue timeout";
    }
  }
  result.late_results = state.audit;
  return result;
}

BatchState replay_events(std::size_t n, std::span<const ProtocolEvent> events, const ProtocolConfig& config) {
  BatchState state(n);
  std::vector<Action> actions;
  for (const auto& ev : events) {
    actions.clear();
    apply_event(state, config, ev, actions);
  }
  return state;
}

}  // namespace collage
