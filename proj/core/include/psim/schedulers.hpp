#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

#include "psim/model.hpp"

namespace psim {

/// A waiting task plus the provider-side keys stamped when it arrived.
template <class Num>
struct QueuedTask {
  TaskRequest<Num> task;
  Num expected_rt{};                // provider's estimate of the user's expectation
  double historical_patience = 1.0;  // provider's mean past patience index for the user
  Num tolerance{};                  // w(u) at submission
};

namespace detail {

template <class Num>
bool earlier(const QueuedTask<Num>& a, const QueuedTask<Num>& b) {
  if (a.task.arrival != b.task.arrival) return a.task.arrival < b.task.arrival;
  return a.task.id < b.task.id;
}

template <class Num, class Less>
std::size_t argmin(std::span<const QueuedTask<Num>> queue, Less less) {
  if (queue.empty()) throw std::invalid_argument("cannot choose from an empty queue");
  std::size_t best = 0;
  for (std::size_t i = 1; i < queue.size(); ++i) {
    if (less(queue[i], queue[best])) best = i;
  }
  return best;
}

}  // namespace detail

/// Minimal arrival, ties by task id.
template <class Num>
std::size_t choose_fifo(std::span<const QueuedTask<Num>> queue) {
  return detail::argmin<Num>(queue, detail::earlier<Num>);
}

/// Minimal dynamic patience expected_rt / ((now - a) + Δ), i.e. the task whose
/// user would be least patient if served right now. Ties by arrival, then id.
template <class Num>
std::size_t choose_pas(std::span<const QueuedTask<Num>> queue, const Num& now) {
  return detail::argmin<Num>(queue, [&now](const QueuedTask<Num>& a, const QueuedTask<Num>& b) {
    // Cross-multiplied ratio comparison; both denominators are positive.
    const Num da = (now - a.task.arrival) + a.task.duration;
    const Num db = (now - b.task.arrival) + b.task.duration;
    const Num lhs = a.expected_rt * db;
    const Num rhs = b.expected_rt * da;
    if (lhs != rhs) return lhs < rhs;
    return detail::earlier(a, b);
  });
}

/// PAS variant keyed on each user's historical mean patience index.
template <class Num>
std::size_t choose_pas_historical(std::span<const QueuedTask<Num>> queue) {
  return detail::argmin<Num>(queue, [](const QueuedTask<Num>& a, const QueuedTask<Num>& b) {
    if (a.historical_patience != b.historical_patience) return a.historical_patience < b.historical_patience;
    return detail::earlier(a, b);
  });
}

/// Earliest soft deadline a(t) + expected_rt. Ties by arrival, then id.
template <class Num>
std::size_t choose_eas(std::span<const QueuedTask<Num>> queue) {
  return detail::argmin<Num>(queue, [](const QueuedTask<Num>& a, const QueuedTask<Num>& b) {
    const Num da = a.task.arrival + a.expected_rt;
    const Num db = b.task.arrival + b.expected_rt;
    if (da != db) return da < db;
    return detail::earlier(a, b);
  });
}

template <class Num>
std::size_t choose(StrategyId strategy, std::span<const QueuedTask<Num>> queue, const Num& now,
                   PasKey pas_key = PasKey::Dynamic) {
  switch (strategy) {
    case StrategyId::Fifo: return choose_fifo<Num>(queue);
    case StrategyId::Pas:
      return pas_key == PasKey::Dynamic ? choose_pas<Num>(queue, now) : choose_pas_historical<Num>(queue);
    case StrategyId::Eas: return choose_eas<Num>(queue);
  }
  throw std::logic_error("unknown strategy");
}

}  // namespace psim
