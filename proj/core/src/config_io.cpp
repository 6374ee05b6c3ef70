#include "psim/config_io.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace psim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Field {
  const char* key;
  std::function<void(ResolvedConfig&, const json&)> set;
  std::function<ordered_json(const ResolvedConfig&)> get;
};

template <class T>
T as(const json& v, const char* key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
          throw std::invalid_argument("expected a nonnegative integer");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw std::invalid_argument("expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::invalid_argument("expected a string");
    }
    return v.get<T>();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
std::vector<T> as_list(const json& v, const char* key) {
  if (!v.is_array()) throw std::invalid_argument(std::string("config key '") + key + "': expected an array");
  std::vector<T> out;
  for (const auto& item : v) out.push_back(as<T>(item, key));
  return out;
}

template <class T, class Member>
Field scalar(const char* key, Member member) {
  return {key, [member, key](ResolvedConfig& c, const json& v) { std::invoke(member, c) = as<T>(v, key); },
          [member](const ResolvedConfig& c) { return ordered_json(std::invoke(member, c)); }};
}

template <class T, class Member>
Field list(const char* key, Member member) {
  return {key, [member, key](ResolvedConfig& c, const json& v) { std::invoke(member, c) = as_list<T>(v, key); },
          [member](const ResolvedConfig& c) { return ordered_json(std::invoke(member, c)); }};
}

template <class E, class Member>
Field choice(const char* key, Member member, std::vector<std::pair<E, std::string>> names) {
  return {key,
          [member, key, names](ResolvedConfig& c, const json& v) {
            const auto text = as<std::string>(v, key);
            for (const auto& [value, name] : names) {
              if (name == text) {
                std::invoke(member, c) = value;
                return;
              }
            }
            throw std::invalid_argument(std::string("config key '") + key + "': unknown value '" + text + "'");
          },
          [member, names](const ResolvedConfig& c) {
            for (const auto& [value, name] : names) {
              if (std::invoke(member, c) == value) return ordered_json(name);
            }
            return ordered_json(nullptr);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // Simulation
    f.push_back(scalar<int>("servers", [](auto& c) -> auto& { return c.sim.servers; }));
    f.push_back(scalar<std::uint64_t>("rng_seed", [](auto& c) -> auto& { return c.sim.rng_seed; }));
    f.push_back(scalar<int>("history_window", [](auto& c) -> auto& { return c.sim.history_window; }));
    f.push_back(scalar<double>("ewma_alpha", [](auto& c) -> auto& { return c.sim.ewma_alpha; }));
    f.push_back(scalar<int>("ewma_window", [](auto& c) -> auto& { return c.sim.ewma_window; }));
    f.push_back(scalar<int>("outlier_window", [](auto& c) -> auto& { return c.sim.outlier_window; }));
    f.push_back(scalar<double>("outlier_cutoff", [](auto& c) -> auto& { return c.sim.outlier_cutoff; }));
    f.push_back(scalar<double>("tolerance_margin", [](auto& c) -> auto& { return c.sim.tolerance_margin; }));
    f.push_back(scalar<double>("think_time_max", [](auto& c) -> auto& { return c.sim.think_time_max; }));
    f.push_back(scalar<double>("job_length", [](auto& c) -> auto& { return c.sim.job_length; }));
    f.push_back({"threshold_range",
                 [](ResolvedConfig& c, const json& v) {
                   const auto r = as_list<double>(v, "threshold_range");
                   if (r.size() != 2) throw std::invalid_argument("config key 'threshold_range': expected [low, high]");
                   c.sim.threshold_low = r[0];
                   c.sim.threshold_high = r[1];
                 },
                 [](const ResolvedConfig& c) { return ordered_json::array({c.sim.threshold_low, c.sim.threshold_high}); }});
    f.push_back(scalar<double>("provider_max_rt", [](auto& c) -> auto& { return c.sim.provider_max_rt; }));
    f.push_back(scalar<double>("penalty_rt", [](auto& c) -> auto& { return c.sim.penalty_rt; }));
    f.push_back(scalar<double>("patience_zero_cutoff", [](auto& c) -> auto& { return c.sim.patience_zero_cutoff; }));
    f.push_back(choice<ExpectationSource>("expectation_source", [](auto& c) -> auto& { return c.sim.expectation_source; },
                                          {{ExpectationSource::ProviderEwma, "provider_ewma"},
                                           {ExpectationSource::Tolerance, "tolerance"}}));
    f.push_back(choice<MarginTarget>("margin_target", [](auto& c) -> auto& { return c.sim.margin_target; },
                                     {{MarginTarget::User, "user"},
                                      {MarginTarget::Provider, "provider"},
                                      {MarginTarget::Both, "both"}}));
    f.push_back(choice<PasKey>("pas_key", [](auto& c) -> auto& { return c.sim.pas_key; },
                               {{PasKey::Dynamic, "dynamic"}, {PasKey::HistoricalAverage, "historical_average"}}));
    f.push_back(scalar<bool>("happiness_enabled", [](auto& c) -> auto& { return c.sim.happiness_enabled; }));
    f.push_back(
        scalar<bool>("cancel_queued_on_abandon", [](auto& c) -> auto& { return c.sim.cancel_queued_on_abandon; }));
    f.push_back(scalar<double>("initial_happiness", [](auto& c) -> auto& { return c.sim.initial_happiness; }));
    f.push_back(scalar<double>("critical_level", [](auto& c) -> auto& { return c.sim.critical_level; }));

    // Daily curves
    f.push_back(scalar<double>("curve.horizon", [](auto& c) -> auto& { return c.curve.horizon; }));
    f.push_back(scalar<int>("curve.max_users", [](auto& c) -> auto& { return c.curve.max_users; }));
    f.push_back(scalar<int>("curve.flat_users", [](auto& c) -> auto& { return c.curve.flat_users; }));
    f.push_back(scalar<int>("curve.normal_baseline", [](auto& c) -> auto& { return c.curve.normal_baseline; }));
    f.push_back(scalar<int>("curve.normal_work_users", [](auto& c) -> auto& { return c.curve.normal_work_users; }));
    f.push_back(scalar<double>("curve.work_start", [](auto& c) -> auto& { return c.curve.work_start; }));
    f.push_back(scalar<double>("curve.work_end", [](auto& c) -> auto& { return c.curve.work_end; }));
    f.push_back(scalar<int>("curve.normal_peak_users", [](auto& c) -> auto& { return c.curve.normal_peak_users; }));
    f.push_back(
        scalar<double>("curve.normal_peak_length", [](auto& c) -> auto& { return c.curve.normal_peak_length; }));
    f.push_back(list<double>("curve.normal_peak_starts", [](auto& c) -> auto& { return c.curve.normal_peak_starts; }));
    f.push_back(scalar<int>("curve.peaky_baseline", [](auto& c) -> auto& { return c.curve.peaky_baseline; }));
    f.push_back(scalar<int>("curve.peaky_spike_users", [](auto& c) -> auto& { return c.curve.peaky_spike_users; }));
    f.push_back(
        scalar<double>("curve.peaky_spike_length", [](auto& c) -> auto& { return c.curve.peaky_spike_length; }));
    f.push_back(list<double>("curve.peaky_spike_starts", [](auto& c) -> auto& { return c.curve.peaky_spike_starts; }));

    // Experiment matrix
    f.push_back({"matrix.strategies",
                 [](ResolvedConfig& c, const json& v) {
                   c.matrix.strategies.clear();
                   for (const auto& s : as_list<std::string>(v, "matrix.strategies")) {
                     c.matrix.strategies.push_back(parse_strategy(s));
                   }
                 },
                 [](const ResolvedConfig& c) {
                   auto a = ordered_json::array();
                   for (auto s : c.matrix.strategies) a.push_back(std::string(to_string(s)));
                   return a;
                 }});
    f.push_back({"matrix.workloads",
                 [](ResolvedConfig& c, const json& v) {
                   c.matrix.workloads.clear();
                   for (const auto& s : as_list<std::string>(v, "matrix.workloads")) {
                     c.matrix.workloads.push_back(parse_daily_shape(s));
                   }
                 },
                 [](const ResolvedConfig& c) {
                   auto a = ordered_json::array();
                   for (auto s : c.matrix.workloads) a.push_back(std::string(to_string(s)));
                   return a;
                 }});
    f.push_back(list<int>("matrix.resources", [](auto& c) -> auto& { return c.matrix.resources; }));
    f.push_back(list<std::uint64_t>("matrix.seeds", [](auto& c) -> auto& { return c.matrix.seeds; }));
    f.push_back(scalar<int>("family.proposition", [](auto& c) -> auto& { return c.family.proposition; }));
    f.push_back(scalar<int>("family.m", [](auto& c) -> auto& { return c.family.m; }));
    f.push_back(scalar<std::string>("family.delta", [](auto& c) -> auto& { return c.family.delta; }));
    f.push_back(scalar<std::string>("family.epsilon", [](auto& c) -> auto& { return c.family.epsilon; }));
    f.push_back(scalar<int>("family.b", [](auto& c) -> auto& { return c.family.b; }));
    f.push_back(scalar<int>("family.periods", [](auto& c) -> auto& { return c.family.periods; }));
    f.push_back({"matrix.output_dir",
                 [](ResolvedConfig& c, const json& v) { c.matrix.output_dir = as<std::string>(v, "matrix.output_dir"); },
                 [](const ResolvedConfig& c) { return ordered_json(c.matrix.output_dir.string()); }});
    return f;
  }();
  return table;
}

}  // namespace

ResolvedConfig parse_config(const std::string& json_text, ResolvedConfig base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->set(base, value);
  }
  base.sim.validate();
  base.matrix.validate();
  return base;
}

ResolvedConfig load_config(const std::filesystem::path& path, ResolvedConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::string config_to_json(const ResolvedConfig& config) {
  ordered_json j = ordered_json::object();
  for (const auto& f : fields()) j[f.key] = f.get(config);
  return j.dump(2);
}

std::string config_echo(const ResolvedConfig& config, const CellSpec* cell) {
  std::string out;
  ResolvedConfig resolved = config;
  if (cell) {
    resolved.sim.servers = cell->resources;
    resolved.sim.rng_seed = cell->seed;
    out += "cell " + cell->name() + ": strategy=" + std::string(to_string(cell->strategy)) +
           " workload=" + std::string(to_string(cell->workload)) + " resources=" + std::to_string(cell->resources) +
           " seed=" + std::to_string(cell->seed) + "\n";
  }
  ordered_json j = ordered_json::parse(config_to_json(resolved));
  j.erase("matrix.output_dir");
  out += "config " + j.dump(2);
  return out;
}

}  // namespace psim
