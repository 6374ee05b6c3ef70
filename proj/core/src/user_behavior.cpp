#include "psim/user_behavior.hpp"

#include <numeric>

namespace psim {

bool ExpectationModel::observe(double rt) {
  bool accept = recent_.size() < params_.outlier_window;
  if (!accept) {
    const double mean = std::accumulate(recent_.begin(), recent_.end(), 0.0) / static_cast<double>(recent_.size());
    accept = rt >= (1.0 - params_.outlier_cutoff) * mean;
  }
  recent_.push_back(rt);
  while (recent_.size() > params_.outlier_window) recent_.pop_front();
  if (accept) push_accepted(rt);
  return accept;
}

void ExpectationModel::observe_override(double sample, double observed) {
  recent_.push_back(observed);
  while (recent_.size() > params_.outlier_window) recent_.pop_front();
  push_accepted(sample);
}

void ExpectationModel::push_accepted(double sample) {
  accepted_.push_back(sample);
  while (accepted_.size() > params_.ewma_window) accepted_.pop_front();
  ewma_ = ewma_ ? params_.alpha * sample + (1.0 - params_.alpha) * *ewma_ : sample;
}

ExpectationModel update_expectation(ExpectationModel model, double new_rt) {
  if (!(new_rt > 0.0)) throw std::invalid_argument("update_expectation: response time must be > 0");
  model.observe(new_rt);
  return model;
}

std::optional<double> expected_response_time(const ExpectationModel& model) {
  if (!model.ewma()) return std::nullopt;
  return *model.ewma() * (1.0 + model.params().margin);
}

ExpectationModel provider_penalty_update(ExpectationModel model, double actual_rt, double provider_max,
                                         double penalty_rt, StrategyId strategy) {
  const bool penalised = strategy == StrategyId::Pas || strategy == StrategyId::Eas;
  if (penalised && actual_rt > provider_max) {
    model.observe_override(penalty_rt, actual_rt);
  } else {
    model.observe(actual_rt);
  }
  return model;
}

Rng make_user_rng(std::uint64_t seed, UserId user) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(user), 0x5eedu};
  return Rng(seq);
}

double sample_think_time(Rng& rng, double think_time_max) {
  return std::uniform_real_distribution<double>(0.0, think_time_max)(rng);
}

double sample_threshold(Rng& rng, double low, double high) {
  if (low == high) return low;
  return std::uniform_real_distribution<double>(low, high)(rng);
}

}  // namespace psim
