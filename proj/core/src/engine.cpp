#include "psim/engine.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "psim/user_behavior.hpp"

namespace psim {

namespace {

template <class Num>
struct UserState {
  UserProfile<Num> profile;
  int group = 0;
  HappinessImpactSpec<Num> impact = StepImpact<Num>{};
  ToleranceModel<Num> tolerance;
  ExpectationModel user_model;
  ExpectationModel provider_model;
  double patience_sum = 0.0;  // provider-side patience history
  std::uint64_t patience_count = 0;
  Rng rng;
  bool in_population = false;
  bool pending = false;  // closed loop: an arrival is scheduled or a request is outstanding
};

template <class Num>
class Engine {
 public:
  Engine(const SimConfig& cfg, const WorkloadSource<Num>& workload, StrategyId strategy, const EventObserver& observer)
      : cfg_(cfg), workload_(workload), strategy_(strategy), observer_(observer), pool_(cfg.servers) {}

  SimTrace<Num> run() {
    cfg_.validate();
    if (const auto* daily = std::get_if<DailyWorkload>(&workload_.body)) {
      setup_daily(*daily);
    } else {
      setup_scripted(std::get<ScriptedWorkload<Num>>(workload_.body));
    }
    finish_setup();
    loop();
    return finish();
  }

 private:
  using Ev = Event<Num>;

  ExpectationModel::Params model_params(bool with_margin) const {
    ExpectationModel::Params p;
    p.alpha = cfg_.ewma_alpha;
    p.ewma_window = static_cast<std::size_t>(cfg_.ewma_window);
    p.outlier_window = static_cast<std::size_t>(cfg_.outlier_window);
    p.outlier_cutoff = cfg_.outlier_cutoff;
    p.margin = with_margin ? cfg_.tolerance_margin : 0.0;
    return p;
  }

  UserState<Num> make_user(UserId id) const {
    UserState<Num> u;
    u.profile.id = id;
    u.profile.history_window = static_cast<std::size_t>(cfg_.ewma_window);
    const bool user_margin = cfg_.margin_target != MarginTarget::Provider;
    const bool provider_margin = cfg_.margin_target != MarginTarget::User;
    u.user_model = ExpectationModel(model_params(user_margin));
    u.provider_model = ExpectationModel(model_params(provider_margin));
    return u;
  }

  void setup_daily(const DailyWorkload& daily) {
    if constexpr (is_exact_v<Num>) {
      throw std::invalid_argument("daily workloads run with floating-point time only");
    } else {
      daily_ = &daily;
      horizon_ = daily.horizon;
      const int n = std::max(daily.max_users, daily.curve.max_users());
      for (int i = 0; i < n; ++i) {
        auto u = make_user(static_cast<UserId>(i));
        u.rng = make_user_rng(daily.seed, static_cast<UserId>(i));
        u.profile.threshold = sample_threshold(u.rng, cfg_.threshold_low, cfg_.threshold_high);
        u.profile.initial_happiness = Num(cfg_.initial_happiness);
        u.profile.happiness = Num(cfg_.initial_happiness);
        u.profile.critical = Num(cfg_.critical_level);
        if (cfg_.happiness_enabled) {
          if (cfg_.history_window < 2) throw std::invalid_argument("happiness dynamics need history_window >= 2");
          u.impact = step_above_alpha(Num(0), cfg_.history_window);
        }
        u.tolerance = ToleranceModel<Num>(cfg_.history_window, Num(0), Num(0));
        users_.push_back(std::move(u));
      }
      const auto& segs = daily.curve.segments();
      for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].start < horizon_) push(Num(segs[i].start), EventKind::Population, i);
      }
    }
  }

  void setup_scripted(const ScriptedWorkload<Num>& w) {
    scripted_ = &w;
    for (std::size_t i = 0; i < w.users.size(); ++i) {
      const auto& su = w.users[i];
      auto u = make_user(static_cast<UserId>(i));
      u.group = su.group;
      u.impact = su.impact;
      u.profile.initial_happiness = su.initial_happiness;
      u.profile.happiness = su.initial_happiness;
      u.profile.critical = su.critical;
      u.profile.threshold = su.threshold;
      u.profile.tolerance = su.initial_tolerance;
      u.tolerance = ToleranceModel<Num>(cfg_.history_window, su.initial_tolerance, su.tolerance_padding);
      u.in_population = true;
      users_.push_back(std::move(u));
    }
    stream_fired_.assign(w.streams.size(), 0);
    for (std::size_t s = 0; s < w.streams.size(); ++s) {
      const auto& st = w.streams[s];
      if (st.user >= w.users.size()) {
        throw std::invalid_argument("malformed workload: stream " + std::to_string(s) + " names unknown user");
      }
      if (!(st.duration > Num(0))) {
        throw std::invalid_argument("malformed workload: stream " + std::to_string(s) +
                                    " has a nonpositive task duration");
      }
      if (st.first < Num(0) || st.period < Num(0) || st.count < 0) {
        throw std::invalid_argument("malformed workload: stream " + std::to_string(s) +
                                    " has negative time, period or count");
      }
      if (st.count > 1 && !(st.period > Num(0))) {
        throw std::invalid_argument("malformed workload: repeating stream " + std::to_string(s) +
                                    " needs a positive period");
      }
      if (st.count > 0) push(st.first, EventKind::Arrival, s);
    }
  }

  void finish_setup() {
    if constexpr (is_exact_v<Num>) {
      if (cfg_.expectation_source != ExpectationSource::Tolerance) {
        throw std::invalid_argument("exact runs require ExpectationSource::Tolerance");
      }
    }
    trace_.initial_happiness = HappinessState<Num>(users_.size(), Num(0));
    for (std::size_t i = 0; i < users_.size(); ++i) {
      trace_.initial_happiness.set(i, users_[i].profile.happiness);
      trace_.initial_tolerance.push_back(users_[i].tolerance.value());
      trace_.critical.push_back(users_[i].profile.critical);
      trace_.groups.push_back(users_[i].group);
      trace_.thresholds.push_back(users_[i].profile.threshold);
    }
    if (scripted_) trace_.active_timeline.push_back({Num(0), count_active()});
  }

  void push(const Num& time, EventKind kind, std::size_t ref) { events_.push(Ev{time, kind, seq_++, ref}); }

  int count_active() const {
    int n = 0;
    for (const auto& u : users_) n += (u.in_population && u.profile.active) ? 1 : 0;
    return n;
  }

  void loop() {
    while (!events_.empty()) {
      const Num now = events_.top().time;
      while (!events_.empty() && events_.top().time == now) {
        const Ev ev = events_.top();
        events_.pop();
        switch (ev.kind) {
          case EventKind::Completion: on_completion(now, ev.ref); break;
          case EventKind::Population: on_population(now, ev.ref); break;
          case EventKind::Arrival: on_arrival(now, ev.ref); break;
        }
      }
      for (const auto& a : dispatch(queue_, pool_, now, strategy_, cfg_.pas_key)) {
        push(a.completion, EventKind::Completion, a.server);
      }
      ++trace_.timestamps;
      if (observer_) {
        observer_(EngineSnapshot{to_double(now), pool_.size(), pool_.busy(), queue_.size(), trace_.submitted,
                                 static_cast<std::uint64_t>(trace_.completions.size()), trace_.cancelled});
      }
    }
  }

  void schedule_think(const Num& now, UserState<Num>& u) {
    if constexpr (!is_exact_v<Num>) {
      const Num next = now + sample_think_time(u.rng, cfg_.think_time_max);
      if (next < horizon_) {
        u.pending = true;
        push(next, EventKind::Arrival, u.profile.id);
        return;
      }
    }
    u.pending = false;
  }

  void on_population(const Num& now, std::size_t segment) {
    const int target = daily_->curve.segments()[segment].users;
    for (std::size_t i = 0; i < users_.size(); ++i) {
      auto& u = users_[i];
      if (static_cast<int>(i) < target) {
        if (!u.in_population) {
          u.in_population = true;
          if (!u.pending && u.profile.active) schedule_think(now, u);
        }
      } else {
        u.in_population = false;  // finishes any in-flight request, then stops
      }
    }
    trace_.active_timeline.push_back({now, count_active()});
  }

  void on_arrival(const Num& now, std::size_t ref) {
    if constexpr (!is_exact_v<Num>) {
      if (daily_) {
        auto& u = users_[ref];
        if (!u.in_population || !u.profile.active) {
          u.pending = false;
          return;
        }
        submit(now, u, Num(cfg_.job_length), -1);
        return;
      }
    }
    const auto& st = scripted_->streams[ref];
    auto& u = users_[st.user];
    if (!u.profile.active) return;  // stream ends with the user
    submit(now, u, st.duration, st.offset_index);
    if (++stream_fired_[ref] < st.count) {
      push(st.first + st.period * Num(stream_fired_[ref]), EventKind::Arrival, ref);
    }
  }

  Num provider_expected(const UserState<Num>& u, const Num& duration) const {
    if (cfg_.expectation_source == ExpectationSource::Tolerance) return duration + u.tolerance.value();
    if constexpr (is_exact_v<Num>) {
      return duration;  // unreachable: rejected in finish_setup
    } else {
      return expected_response_time(u.provider_model).value_or(cfg_.job_length);
    }
  }

  Num user_expected(const UserState<Num>& u, const QueuedTask<Num>& qt) const {
    if (cfg_.expectation_source == ExpectationSource::Tolerance) return qt.task.duration + qt.tolerance;
    if constexpr (is_exact_v<Num>) {
      return qt.task.duration;
    } else {
      return expected_response_time(u.user_model).value_or(cfg_.job_length);
    }
  }

  void submit(const Num& now, UserState<Num>& u, const Num& duration, int offset_index) {
    if (!(duration > Num(0))) throw std::invalid_argument("malformed workload: task with nonpositive duration");
    QueuedTask<Num> qt;
    qt.task = TaskRequest<Num>{next_task_id_++, u.profile.id, now, duration};
    qt.expected_rt = provider_expected(u, duration);
    qt.tolerance = u.tolerance.value();
    qt.historical_patience = u.patience_count ? u.patience_sum / static_cast<double>(u.patience_count) : 1.0;
    offsets_.resize(std::max<std::size_t>(offsets_.size(), qt.task.id + 1), -1);
    offsets_[qt.task.id] = offset_index;
    queue_.push_back(std::move(qt));
    ++trace_.submitted;
  }

  void on_completion(const Num& now, std::size_t server) {
    const ServerSlot<Num> slot = pool_.release(server);
    const QueuedTask<Num>& qt = slot.task;
    auto& u = users_[qt.task.user];

    CompletionRecord<Num> rec;
    rec.task_id = qt.task.id;
    rec.user_id = qt.task.user;
    rec.server = server;
    rec.arrival = qt.task.arrival;
    rec.start = slot.start;
    rec.completion = now;
    rec.duration = qt.task.duration;
    rec.response_time = response_time(qt.task.arrival, slot.start, qt.task.duration);
    rec.tolerance = qt.tolerance;
    rec.excess_delay = excess_delay(rec.response_time, qt.task.duration, qt.tolerance);
    rec.expected_rt = user_expected(u, qt);
    rec.provider_expected_rt = qt.expected_rt;
    rec.patience_index = patience_index(rec.expected_rt, rec.response_time);
    rec.over_threshold = to_double(rec.response_time) > u.profile.threshold;
    rec.offset_index = offsets_[qt.task.id];

    const double provider_patience = to_double(qt.expected_rt) / to_double(rec.response_time);
    u.patience_sum += provider_patience;
    ++u.patience_count;

    if constexpr (!is_exact_v<Num>) {
      if (cfg_.expectation_source == ExpectationSource::ProviderEwma) {
        if (u.user_model.observe(rec.response_time)) u.profile.remember(rec.response_time);
        u.provider_model = provider_penalty_update(std::move(u.provider_model), rec.response_time,
                                                   cfg_.provider_max_rt, cfg_.penalty_rt, strategy_);
      }
    }

    if (cfg_.happiness_enabled) {
      const auto upd = happiness_step(u.profile.happiness, u.impact, rec.excess_delay,
                                      u.profile.initial_happiness, u.profile.critical);
      if (upd.clamped) ++trace_.clamp_events;
      if (upd.value != u.profile.happiness) {
        u.profile.happiness = upd.value;
        trace_.happiness_series.push_back({now, u.profile.id, upd.value});
      }
      const Num before = u.tolerance.value();
      u.tolerance.observe(rec.response_time - rec.duration);
      u.profile.tolerance = u.tolerance.value();
      if (u.tolerance.value() != before) {
        trace_.tolerance_series.push_back({now, u.profile.id, u.tolerance.value()});
      }
    }
    rec.happiness_after = u.profile.happiness;
    rec.tolerance_after = u.tolerance.value();
    trace_.completions.push_back(rec);

    if (u.profile.active && !is_active(u.profile.happiness, u.profile.critical)) {
      u.profile.active = false;
      trace_.abandonments.push_back({u.profile.id, now});
      if (cfg_.cancel_queued_on_abandon) cancel_queued(u.profile.id);
      trace_.active_timeline.push_back({now, count_active()});
    }

    if (daily_) {
      if (u.in_population && u.profile.active) {
        schedule_think(now, u);
      } else {
        u.pending = false;
      }
    }
  }

  void cancel_queued(UserId user) {
    const auto before = queue_.size();
    std::erase_if(queue_, [user](const QueuedTask<Num>& q) { return q.task.user == user; });
    trace_.cancelled += before - queue_.size();
  }

  SimTrace<Num> finish() {
    trace_.final_happiness = HappinessState<Num>(users_.size(), Num(0));
    for (std::size_t i = 0; i < users_.size(); ++i) {
      trace_.final_happiness.set(i, users_[i].profile.happiness);
      trace_.final_active.push_back(users_[i].profile.active);
    }
    return std::move(trace_);
  }

  SimConfig cfg_;
  const WorkloadSource<Num>& workload_;
  StrategyId strategy_;
  const EventObserver& observer_;

  const DailyWorkload* daily_ = nullptr;
  const ScriptedWorkload<Num>* scripted_ = nullptr;
  Num horizon_{};

  std::vector<UserState<Num>> users_;
  std::vector<int> stream_fired_;
  std::vector<int> offsets_;
  std::vector<QueuedTask<Num>> queue_;
  ServerPool<Num> pool_;
  std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> events_;
  std::uint64_t seq_ = 0;
  TaskId next_task_id_ = 0;
  SimTrace<Num> trace_;
};

}  // namespace

template <class Num>
SimTrace<Num> run_simulation(const SimConfig& config, const WorkloadSource<Num>& workload, StrategyId strategy,
                             const EventObserver& observer) {
  return Engine<Num>(config, workload, strategy, observer).run();
}

template SimTrace<double> run_simulation<double>(const SimConfig&, const WorkloadSource<double>&, StrategyId,
                                                 const EventObserver&);
template SimTrace<Rational> run_simulation<Rational>(const SimConfig&, const WorkloadSource<Rational>&, StrategyId,
                                                     const EventObserver&);

}  // namespace psim
