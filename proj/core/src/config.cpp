#include "pvsc/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "pvsc/csv_io.hpp"
#include "pvsc/hashing.hpp"

namespace pvsc {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigParseError("config: bad numeric value for '" + key + "': '" +
                           value + "'");
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ConfigMap parse_flat_config(const std::string& text, const std::string& origin) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigParseError(origin + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigParseError(origin + ":" + std::to_string(line_no) +
                             ": empty key or value");
    }
    if (!map.emplace(key, value).second) {
      throw ConfigParseError(origin + ":" + std::to_string(line_no) +
                             ": duplicate key '" + key + "'");
    }
  }
  return map;
}

ConfigMap read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_flat_config(buf.str(), path);
}

std::string serialize_flat_config(const ConfigMap& map) {
  std::string out;
  for (const auto& [key, value] : map) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

namespace {

SeasonalSpec seasonal_from_map(const ConfigMap& map, const std::string& prefix,
                               std::vector<std::string>& consumed) {
  SeasonalSpec spec;
  if (auto it = map.find(prefix + ".intercept"); it != map.end()) {
    spec.intercept = to_double(it->first, it->second);
    consumed.push_back(it->first);
  }
  for (int h = 1;; ++h) {
    const std::string base = prefix + ".h" + std::to_string(h);
    const auto freq = map.find(base + ".freq");
    if (freq == map.end()) break;
    Harmonic harmonic;
    harmonic.frequency = to_double(freq->first, freq->second);
    consumed.push_back(freq->first);
    if (auto it = map.find(base + ".sin"); it != map.end()) {
      harmonic.sine_amp = to_double(it->first, it->second);
      consumed.push_back(it->first);
    }
    if (auto it = map.find(base + ".cos"); it != map.end()) {
      harmonic.cosine_amp = to_double(it->first, it->second);
      consumed.push_back(it->first);
    }
    spec.harmonics.push_back(harmonic);
  }
  return spec;
}

}  // namespace

ModelConfig model_config_from_map(const ConfigMap& map) {
  ModelConfig config;
  std::vector<std::string> consumed;
  const auto scalar = [&](const char* key, double& target) {
    if (auto it = map.find(key); it != map.end()) {
      target = to_double(it->first, it->second);
      consumed.push_back(it->first);
    }
  };

  config.price_seasonal = seasonal_from_map(map, "price", consumed);
  config.demand_seasonal = seasonal_from_map(map, "demand", consumed);
  scalar("pv.amplitude_mw", config.pv_seasonal.amplitude_mw);
  scalar("pv.freq", config.pv_seasonal.frequency);
  scalar("pv.phase_hours", config.pv_seasonal.phase_hours);
  scalar("price.ou.xi", config.price_ou.mean_reversion);
  scalar("price.ou.sigma", config.price_ou.volatility);
  scalar("demand.ou.xi", config.demand_ou.mean_reversion);
  scalar("demand.ou.sigma", config.demand_ou.volatility);
  scalar("pv.ou.xi", config.pv_ou.mean_reversion);
  scalar("pv.ou.sigma", config.pv_ou.volatility);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c <= r; ++c) {
      const std::string key =
          "corr." + std::to_string(r + 1) + std::to_string(c + 1);
      scalar(key.c_str(), config.noise_corr[r][c]);
    }
  }
  scalar("battery.eta_c", config.battery.eta_c);
  scalar("battery.eta_d", config.battery.eta_d);
  scalar("battery.max_charge_mw", config.battery.max_charge_mw);
  scalar("battery.max_discharge_mw", config.battery.max_discharge_mw);
  scalar("battery.soc_min_mwh", config.battery.soc_min_mwh);
  scalar("battery.soc_max_mwh", config.battery.soc_max_mwh);
  scalar("incentive_eur_mwh", config.incentive_eur_mwh);
  scalar("discount_rate", config.discount_rate);
  scalar("fixed_log_price", config.fixed_log_price);
  scalar("fixed_log_demand", config.fixed_log_demand);
  scalar("horizon_hours", config.horizon_hours);

  for (const auto& [key, value] : map) {
    (void)value;
    if (key.rfind("grid.", 0) == 0) continue;
    if (ends_with(key, ".se")) continue;
    bool known = false;
    for (const auto& k : consumed) {
      if (k == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigParseError("config: unknown key '" + key + "'");
  }
  return config;
}

ConfigMap model_config_to_map(const ModelConfig& config) {
  ConfigMap map;
  const auto put = [&map](const std::string& key, double value) {
    map[key] = format_full(value);
  };
  const auto put_seasonal = [&](const std::string& prefix, const SeasonalSpec& s) {
    put(prefix + ".intercept", s.intercept);
    for (std::size_t h = 0; h < s.harmonics.size(); ++h) {
      const std::string base = prefix + ".h" + std::to_string(h + 1);
      put(base + ".freq", s.harmonics[h].frequency);
      put(base + ".sin", s.harmonics[h].sine_amp);
      put(base + ".cos", s.harmonics[h].cosine_amp);
    }
  };
  put_seasonal("price", config.price_seasonal);
  put_seasonal("demand", config.demand_seasonal);
  put("pv.amplitude_mw", config.pv_seasonal.amplitude_mw);
  put("pv.freq", config.pv_seasonal.frequency);
  put("pv.phase_hours", config.pv_seasonal.phase_hours);
  put("price.ou.xi", config.price_ou.mean_reversion);
  put("price.ou.sigma", config.price_ou.volatility);
  put("demand.ou.xi", config.demand_ou.mean_reversion);
  put("demand.ou.sigma", config.demand_ou.volatility);
  put("pv.ou.xi", config.pv_ou.mean_reversion);
  put("pv.ou.sigma", config.pv_ou.volatility);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c <= r; ++c) {
      put("corr." + std::to_string(r + 1) + std::to_string(c + 1),
          config.noise_corr[r][c]);
    }
  }
  put("battery.eta_c", config.battery.eta_c);
  put("battery.eta_d", config.battery.eta_d);
  put("battery.max_charge_mw", config.battery.max_charge_mw);
  put("battery.max_discharge_mw", config.battery.max_discharge_mw);
  put("battery.soc_min_mwh", config.battery.soc_min_mwh);
  put("battery.soc_max_mwh", config.battery.soc_max_mwh);
  put("incentive_eur_mwh", config.incentive_eur_mwh);
  put("discount_rate", config.discount_rate);
  put("fixed_log_price", config.fixed_log_price);
  put("fixed_log_demand", config.fixed_log_demand);
  put("horizon_hours", config.horizon_hours);
  return map;
}

SolverGrid solver_grid_from_map(const ConfigMap& map, const ModelConfig& config) {
  double tau = 0.024, p_min = -0.6, p_max = 0.6, p_step = 0.04, s_step = 0.005;
  const auto pick = [&map](const char* key, double& target) {
    if (auto it = map.find(key); it != map.end()) {
      target = to_double(it->first, it->second);
    }
  };
  pick("grid.time_step_hours", tau);
  pick("grid.p_min", p_min);
  pick("grid.p_max", p_max);
  pick("grid.p_step", p_step);
  pick("grid.s_step", s_step);
  return make_solver_grid(config, tau, p_min, p_max, p_step, s_step);
}

double parse_time_hours(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string hh = text.substr(0, colon);
    const std::string mm = text.substr(colon + 1);
    if (hh.empty() || mm.empty()) {
      throw ConfigParseError("bad time '" + text + "', expected HH:MM");
    }
    const double hours = to_double("time", hh);
    const double minutes = to_double("time", mm);
    if (minutes < 0.0 || minutes >= 60.0) {
      throw ConfigParseError("bad minutes in time '" + text + "'");
    }
    return hours + minutes / 60.0;
  }
  return to_double("time", text);
}

std::uint64_t config_hash(const ModelConfig& config) {
  return fnv1a64(serialize_flat_config(model_config_to_map(config)));
}

}  // namespace pvsc
