#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "psim/model.hpp"
#include "psim/schedulers.hpp"
#include "psim/workloads.hpp"

namespace psim {

template <class Num>
struct ServerSlot {
  bool busy = false;
  QueuedTask<Num> task;
  Num start{};
  Num completion{};
};

/// m identical non-preemptive servers.
template <class Num>
class ServerPool {
 public:
  explicit ServerPool(int m) {
    if (m < 1) throw std::invalid_argument("server pool needs m >= 1");
    slots_.resize(static_cast<std::size_t>(m));
  }

  std::size_t size() const { return slots_.size(); }
  std::size_t busy() const { return busy_; }

  /// Lowest-numbered idle slot.
  std::optional<std::size_t> idle_slot() const {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!slots_[i].busy) return i;
    }
    return std::nullopt;
  }

  const ServerSlot<Num>& slot(std::size_t i) const { return slots_.at(i); }

  const ServerSlot<Num>& occupy(std::size_t i, QueuedTask<Num> task, const Num& start) {
    auto& s = slots_.at(i);
    if (s.busy) throw std::logic_error("server already busy");
    s.busy = true;
    s.start = start;
    s.completion = start + task.task.duration;
    s.task = std::move(task);
    ++busy_;
    return s;
  }

  ServerSlot<Num> release(std::size_t i) {
    auto& s = slots_.at(i);
    if (!s.busy) throw std::logic_error("releasing an idle server");
    ServerSlot<Num> out = std::move(s);
    s = ServerSlot<Num>{};
    --busy_;
    return out;
  }

 private:
  std::vector<ServerSlot<Num>> slots_;
  std::size_t busy_ = 0;
};

template <class Num>
struct Assignment {
  std::size_t server = 0;
  TaskId task_id = 0;
  Num start{};
  Num completion{};
};

/// Starts the strategy's chosen task at `now` while an idle server and a
/// waiting task coexist. Chosen tasks are removed from `queue`.
template <class Num>
std::vector<Assignment<Num>> dispatch(std::vector<QueuedTask<Num>>& queue, ServerPool<Num>& pool, const Num& now,
                                      StrategyId strategy, PasKey pas_key = PasKey::Dynamic) {
  std::vector<Assignment<Num>> out;
  while (!queue.empty()) {
    const auto slot = pool.idle_slot();
    if (!slot) break;
    const std::size_t pick = choose<Num>(strategy, std::span<const QueuedTask<Num>>(queue), now, pas_key);
    QueuedTask<Num> task = std::move(queue[pick]);
    queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(pick));
    const auto& s = pool.occupy(*slot, std::move(task), now);
    out.push_back({*slot, s.task.task.id, s.start, s.completion});
  }
  return out;
}

enum class EventKind : int { Completion = 0, Population = 1, Arrival = 2 };

/// Ordered by time, then kind (completions first), then sequence number.
template <class Num>
struct Event {
  Num time{};
  EventKind kind = EventKind::Arrival;
  std::uint64_t seq = 0;
  std::size_t ref = 0;  // server slot, curve segment, user or stream index

  friend bool operator>(const Event& a, const Event& b) {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
    return a.seq > b.seq;
  }
};

template <class Num>
struct HappinessChange {
  Num time{};
  UserId user = 0;
  Num value{};
};

template <class Num>
struct ToleranceChange {
  Num time{};
  UserId user = 0;
  Num value{};
};

template <class Num>
struct Abandonment {
  UserId user = 0;
  Num time{};
};

template <class Num>
struct ActiveSample {
  Num time{};
  int active = 0;
};

/// Everything a run produced. Happiness and tolerance series are stored as
/// change events over `initial_happiness` / `initial_tolerance`.
template <class Num>
struct SimTrace {
  std::vector<CompletionRecord<Num>> completions;
  HappinessState<Num> initial_happiness;
  std::vector<HappinessChange<Num>> happiness_series;
  std::vector<Num> initial_tolerance;
  std::vector<ToleranceChange<Num>> tolerance_series;
  std::vector<Abandonment<Num>> abandonments;
  std::vector<ActiveSample<Num>> active_timeline;

  std::vector<Num> critical;
  std::vector<int> groups;
  std::vector<double> thresholds;
  std::vector<bool> final_active;
  HappinessState<Num> final_happiness;

  std::uint64_t submitted = 0;
  std::uint64_t cancelled = 0;
  std::uint64_t clamp_events = 0;
  std::uint64_t timestamps = 0;

  std::size_t user_count() const { return critical.size(); }
  int active_at_end() const {
    int n = 0;
    for (bool a : final_active) n += a ? 1 : 0;
    return n;
  }
};

/// Rebuilds s at time t (after every change with time <= t).
template <class Num>
HappinessState<Num> happiness_state_at(const SimTrace<Num>& trace, const Num& t) {
  HappinessState<Num> s = trace.initial_happiness;
  for (const auto& c : trace.happiness_series) {
    if (t < c.time) break;
    s.set(c.user, c.value);
  }
  return s;
}

/// State after all events at one timestamp have been handled and dispatched.
struct EngineSnapshot {
  double now = 0.0;
  std::size_t servers = 0;
  std::size_t busy = 0;
  std::size_t queued = 0;
  std::uint64_t submitted = 0;
  std::uint64_t completed = 0;
  std::uint64_t cancelled = 0;
};

using EventObserver = std::function<void(const EngineSnapshot&)>;

/// Runs one deterministic simulation. Throws std::invalid_argument on an
/// invalid config or malformed workload (e.g. a nonpositive task duration).
/// Instantiated for double and Rational; Rational requires a scripted
/// workload with ExpectationSource::Tolerance.
template <class Num>
SimTrace<Num> run_simulation(const SimConfig& config, const WorkloadSource<Num>& workload, StrategyId strategy,
                             const EventObserver& observer = {});

extern template SimTrace<double> run_simulation<double>(const SimConfig&, const WorkloadSource<double>&, StrategyId,
                                                        const EventObserver&);
extern template SimTrace<Rational> run_simulation<Rational>(const SimConfig&, const WorkloadSource<Rational>&,
                                                            StrategyId, const EventObserver&);

}  // namespace psim
