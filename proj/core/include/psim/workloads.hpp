#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "psim/model.hpp"
#include "psim/user_behavior.hpp"

namespace psim {

enum class DailyShape { Flat, Normal, Peaky };

std::string_view to_string(DailyShape s);
DailyShape parse_daily_shape(std::string_view text);

struct CurveSegment {
  double start = 0.0;  // seconds since midnight
  int users = 0;
};

/// Piecewise-constant target of concurrently active closed-loop users.
class UserCountCurve {
 public:
  UserCountCurve() = default;
  /// Segments are sorted by start; overlapping starts keep the later entry.
  explicit UserCountCurve(std::vector<CurveSegment> segments);

  int at(double t) const;
  int max_users() const;
  const std::vector<CurveSegment>& segments() const { return segments_; }

 private:
  std::vector<CurveSegment> segments_;
};

/// Shape parameters of the three daily workloads. Defaults are artifact
/// choices; only the qualitative shapes are meaningful.
struct DailyCurveParams {
  double horizon = 24.0 * 3600.0;
  int max_users = 100;

  int flat_users = 60;

  int normal_baseline = 20;
  int normal_work_users = 60;
  double work_start = 8.0 * 3600.0;
  double work_end = 18.0 * 3600.0;
  int normal_peak_users = 100;
  double normal_peak_length = 30.0 * 60.0;
  std::vector<double> normal_peak_starts{9.0 * 3600.0, 13.0 * 3600.0, 17.5 * 3600.0};

  int peaky_baseline = 20;
  int peaky_spike_users = 100;
  double peaky_spike_length = 15.0 * 60.0;
  std::vector<double> peaky_spike_starts{3.0 * 3600.0, 10.5 * 3600.0, 14.0 * 3600.0, 20.0 * 3600.0};
};

struct DailyWorkload {
  DailyShape shape = DailyShape::Flat;
  UserCountCurve curve;
  double horizon = 24.0 * 3600.0;
  int max_users = 100;
  std::uint64_t seed = 1;
};

/// User of a scripted (non closed-loop) workload.
template <class Num>
struct ScriptedUser {
  int group = 0;
  Num initial_tolerance{};
  Num tolerance_padding{};
  Num initial_happiness{1};
  Num critical{};
  HappinessImpactSpec<Num> impact = StepImpact<Num>{};
  double threshold = 60.0;
};

/// `count` arrivals of one user at first, first + period, ... Stops early
/// once the user becomes inactive.
template <class Num>
struct ArrivalStream {
  UserId user = 0;
  Num first{};
  Num period{};
  int count = 1;
  Num duration{};
  int offset_index = -1;
};

template <class Num>
struct ScriptedWorkload {
  std::vector<ScriptedUser<Num>> users;
  std::vector<ArrivalStream<Num>> streams;
};

enum class WorkloadKind { Flat, Normal, Peaky, FamilyF, Scripted };

template <class Num>
struct WorkloadSource {
  WorkloadKind kind = WorkloadKind::Scripted;
  std::variant<DailyWorkload, ScriptedWorkload<Num>> body;
};

UserCountCurve daily_curve(DailyShape shape, const DailyCurveParams& params);
WorkloadSource<double> generate_daily(DailyShape shape, const DailyCurveParams& params, std::uint64_t seed);

/// One task per entry, each its own user unless `users` says otherwise.
template <class Num>
WorkloadSource<Num> scripted_batch(std::vector<ScriptedUser<Num>> users, const std::vector<TaskRequest<Num>>& tasks) {
  ScriptedWorkload<Num> w;
  w.users = std::move(users);
  for (const auto& t : tasks) {
    w.streams.push_back(ArrivalStream<Num>{t.user, t.arrival, Num(0), 1, t.duration, -1});
  }
  return {WorkloadKind::Scripted, std::move(w)};
}

// ---------------------------------------------------------------------------
// Family F: two equal groups of m users, uniform task length Δ
// ---------------------------------------------------------------------------

struct GroupSpec {
  std::vector<Rational> offsets;  // submission times within one period
  Rational initial_tolerance;
  Rational tolerance_padding;
  HappinessImpactSpec<Rational> impact = StepImpact<Rational>{};
};

struct ScenarioFamilyConfig {
  int proposition = 2;
  int m = 2;
  Rational delta{10};
  Rational epsilon{6};
  int b = 5;
  int periods = 7;
  Rational initial_happiness{1};
  Rational critical{1, 2};
  Rational period_length{30};
  std::array<GroupSpec, 2> groups;  // [0] = U1, [1] = U2
};

/// Fills offsets, period, tolerances and impact shapes for proposition 2, 3
/// or 4. `periods` defaults to b + 2.
ScenarioFamilyConfig make_family_f_config(int proposition, int m, Rational delta, Rational epsilon, int b,
                                          std::optional<int> periods = std::nullopt);

/// Throws std::invalid_argument naming the violated inequality.
void validate_family_f(const ScenarioFamilyConfig& cfg);

/// Users 0..m-1 form U1, m..2m-1 form U2.
WorkloadSource<Rational> generate_family_f(const ScenarioFamilyConfig& cfg);

}  // namespace psim
