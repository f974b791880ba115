#pragma once

// INI-style scenario files: sections scenario, channel, phy, rlc, app,
// headers and sweep. Every key is registered below; anything else is an
// error naming the offending key path. Environment variables named
// MMV2V_<SECTION>_<KEY> (upper case) override file values before sweeps apply.

#include "mmv2v/scenario.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mmv2v {

namespace config_detail {

inline std::string trim(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

inline std::string lower(std::string s) {
  boost::algorithm::to_lower(s);
  return s;
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const std::string s = trim(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  return out;
}

inline long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const std::string s = trim(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = lower(trim(v));
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    return true;
  if (s == "false" || s == "0" || s == "no" || s == "off")
    return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

template <class E>
E to_enum(const std::string& key, const std::string& v, const std::map<std::string, E>& names) {
  const std::string s = lower(trim(v));
  auto it = names.find(s);
  if (it != names.end())
    return it->second;
  std::string allowed;
  for (const auto& [n, _] : names)
    allowed += (allowed.empty() ? "" : "|") + n;
  throw ConfigError(key + ": expected one of " + allowed + ", got '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, v, boost::algorithm::is_any_of(","));
  for (auto& p : parts)
    p = trim(p);
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const std::string& p) { return p.empty(); }),
              parts.end());
  return parts;
}

inline PathlossCoefficients to_coefficients(const std::string& key, const std::string& v) {
  const auto parts = split_list(v);
  if (parts.size() != 3)
    throw ConfigError(key + ": expected 'intercept, distance_slope, frequency_slope'");
  return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])};
}

inline void set_antenna(const std::string& key, const std::string& v, ScenarioParams& s) {
  const std::string t = lower(trim(v));
  const auto x = t.find('x');
  if (x == std::string::npos)
    throw ConfigError(key + ": expected <rows>x<cols>, got '" + t + "'");
  const auto r = to_int(key, t.substr(0, x));
  const auto c = to_int(key, t.substr(x + 1));
  if (r < 1 || c < 1 || r > 64 || c > 64)
    throw ConfigError(key + ": array dimensions must lie in [1, 64]");
  s.antenna_rows = static_cast<int>(r);
  s.antenna_cols = static_cast<int>(c);
}

inline void set_mcs(const std::string& key, const std::string& v, PhyConfig& p) {
  const std::string t = lower(trim(v));
  if (t == "adaptive") {
    p.mcs_mode = McsMode::Adaptive;
    return;
  }
  const std::string idx = t.rfind("fixed:", 0) == 0 ? t.substr(6) : t;
  const auto m = to_int(key, idx);
  if (m < 0)
    throw ConfigError(key + ": mcs index must be nonnegative");
  p.mcs_mode = McsMode::Fixed;
  p.mcs = static_cast<int>(m);
}

using Setter = std::function<void(SimulationConfig&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& registry() {
  static const std::map<std::string, Setter> r = [] {
    std::map<std::string, Setter> m;
    auto num = [&m](const std::string& k, auto member) {
      m[k] = [member](SimulationConfig& c, const std::string& key, const std::string& v) {
        member(c) = to_double(key, v);
      };
    };
    auto integer = [&m](const std::string& k, auto member) {
      m[k] = [member](SimulationConfig& c, const std::string& key, const std::string& v) {
        member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_int(key, v));
      };
    };

    m["scenario.kind"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.scenario.kind = to_enum<ScenarioKind>(k, v, {{"a", ScenarioKind::A}, {"b", ScenarioKind::B}});
    };
    num("scenario.duration_s", [](SimulationConfig& c) -> double& { return c.scenario.duration_s; });
    num("scenario.warmup_s", [](SimulationConfig& c) -> double& { return c.scenario.warmup_s; });
    num("scenario.drain_s", [](SimulationConfig& c) -> double& { return c.scenario.drain_s; });
    m["scenario.propagation"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.scenario.propagation = to_enum<PropagationScenario>(
          k, v, {{"highway", PropagationScenario::Highway}, {"urban", PropagationScenario::Urban}});
    };
    m["scenario.condition"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      const std::string s = lower(trim(v));
      if (s == "probabilistic") {
        c.scenario.condition = ConditionMode::probabilistic();
        return;
      }
      c.scenario.condition = ConditionMode::fixed_to(to_enum<ChannelCondition>(
          k, v,
          {{"los", ChannelCondition::Los}, {"nlosv", ChannelCondition::Nlosv}, {"nlos", ChannelCondition::Nlos}}));
    };
    num("scenario.speed_mps", [](SimulationConfig& c) -> double& { return c.scenario.speed_mps; });
    m["scenario.antenna"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      set_antenna(k, v, c.scenario);
    };
    num("scenario.distance_m", [](SimulationConfig& c) -> double& { return c.scenario.distance_m; });
    num("scenario.intra_group_distance_m",
        [](SimulationConfig& c) -> double& { return c.scenario.intra_group_distance_m; });
    num("scenario.inter_group_distance_m",
        [](SimulationConfig& c) -> double& { return c.scenario.inter_group_distance_m; });
    num("scenario.lane_offset_m", [](SimulationConfig& c) -> double& { return c.scenario.lane_offset_m; });
    m["scenario.interferer_condition"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.scenario.interferer_condition = to_enum<InterfererCondition>(
          k, v,
          {{"geometric", InterfererCondition::Geometric},
           {"los", InterfererCondition::Los},
           {"nlosv", InterfererCondition::Nlosv},
           {"serving", InterfererCondition::Serving}});
    };
    num("scenario.vehicle_length_m", [](SimulationConfig& c) -> double& { return c.scenario.vehicle_length_m; });
    num("scenario.vehicle_width_m", [](SimulationConfig& c) -> double& { return c.scenario.vehicle_width_m; });

    num("channel.carrier_ghz", [](SimulationConfig& c) -> double& { return c.channel.carrier_ghz; });
    num("channel.bandwidth_hz", [](SimulationConfig& c) -> double& { return c.channel.bandwidth_hz; });
    num("channel.tx_power_dbm", [](SimulationConfig& c) -> double& { return c.channel.tx_power_dbm; });
    num("channel.noise_figure_db", [](SimulationConfig& c) -> double& { return c.channel.noise_figure_db; });
    num("channel.thermal_noise_dbm_hz",
        [](SimulationConfig& c) -> double& { return c.channel.thermal_noise_dbm_hz; });
    for (const char* name : {"highway_los", "highway_nlos", "urban_los", "urban_nlos"}) {
      const std::string n = name;
      m["channel." + n] = [n](SimulationConfig& c, const std::string& k, const std::string& v) {
        auto& ch = c.channel;
        PathlossCoefficients& dst = n == "highway_los"    ? ch.highway_los
                                    : n == "highway_nlos" ? ch.highway_nlos
                                    : n == "urban_los"    ? ch.urban_los
                                                          : ch.urban_nlos;
        dst = to_coefficients(k, v);
      };
    }
    num("channel.shadowing_los_db", [](SimulationConfig& c) -> double& { return c.channel.shadowing_los_db; });
    num("channel.shadowing_nlosv_db", [](SimulationConfig& c) -> double& { return c.channel.shadowing_nlosv_db; });
    num("channel.shadowing_nlos_db", [](SimulationConfig& c) -> double& { return c.channel.shadowing_nlos_db; });
    num("channel.blockage_base_db", [](SimulationConfig& c) -> double& { return c.channel.blockage.base_db; });
    num("channel.blockage_slope_db", [](SimulationConfig& c) -> double& { return c.channel.blockage.slope_db; });
    num("channel.blockage_offset_db", [](SimulationConfig& c) -> double& { return c.channel.blockage.offset_db; });
    num("channel.blockage_sigma_db", [](SimulationConfig& c) -> double& { return c.channel.blockage.sigma_db; });
    num("channel.los_probability_d0_m",
        [](SimulationConfig& c) -> double& { return c.channel.los_probability_d0_m; });
    m["channel.fading"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.channel.fading_enabled = to_bool(k, v);
    };
    num("channel.rician_k_db", [](SimulationConfig& c) -> double& { return c.channel.rician_k_db; });
    num("channel.min_speed_mps", [](SimulationConfig& c) -> double& { return c.channel.min_speed_mps; });
    num("channel.backlobe_db", [](SimulationConfig& c) -> double& { return c.channel.backlobe_db; });
    num("channel.min_distance_m", [](SimulationConfig& c) -> double& { return c.channel.min_distance_m; });

    integer("phy.numerology", [](SimulationConfig& c) -> int& { return c.phy.numerology; });
    num("phy.guard_fraction", [](SimulationConfig& c) -> double& { return c.phy.guard_fraction; });
    integer("phy.control_symbols", [](SimulationConfig& c) -> int& { return c.phy.control_symbols; });
    m["phy.mcs"] = [](SimulationConfig& c, const std::string& k, const std::string& v) { set_mcs(k, v, c.phy); };
    m["phy.mode"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.phy.schedule =
          to_enum<ScheduleMode>(k, v, {{"shared", ScheduleMode::Shared}, {"dedicated", ScheduleMode::Dedicated}});
    };
    num("phy.bler_slope", [](SimulationConfig& c) -> double& { return c.phy.bler_slope; });
    num("phy.bler_gap_db", [](SimulationConfig& c) -> double& { return c.phy.bler_gap_db; });
    num("phy.target_bler", [](SimulationConfig& c) -> double& { return c.phy.target_bler; });
    m["phy.bler_override"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      const std::string s = lower(trim(v));
      if (s == "none" || s.empty())
        c.phy.bler_override.reset();
      else
        c.phy.bler_override = to_double(k, v);
    };
    m["phy.mcs_table"] = [](SimulationConfig& c, const std::string&, const std::string& v) {
      c.phy.mcs_table_path = trim(v);
    };

    num("rlc.t_reordering_ms", [](SimulationConfig& c) -> double& { return c.rlc.t_reordering_ms; });
    m["rlc.buffer_bytes"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      const auto b = to_int(k, v);
      if (b <= 0)
        throw ConfigError(k + ": must be positive");
      c.rlc.buffer_bytes = static_cast<std::size_t>(b);
    };
    integer("rlc.sn_bits", [](SimulationConfig& c) -> int& { return c.rlc.sn_bits; });

    m["app.kind"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.app.kind = to_enum<TrafficSource::Kind>(
          k, v, {{"cbr", TrafficSource::Kind::Cbr}, {"on_off", TrafficSource::Kind::OnOff}});
    };
    num("app.rate_bps", [](SimulationConfig& c) -> double& { return c.app.rate_bps; });
    integer("app.packet_bytes", [](SimulationConfig& c) -> int& { return c.app.packet_bytes; });
    m["app.on_ms"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.app.on_duration = SimTime::from_seconds(to_double(k, v) * 1e-3);
    };
    m["app.off_mean_ms"] = [](SimulationConfig& c, const std::string& k, const std::string& v) {
      c.app.off_mean = SimTime::from_seconds(to_double(k, v) * 1e-3);
    };

    integer("headers.udp", [](SimulationConfig& c) -> int& { return c.headers.udp; });
    integer("headers.ipv4", [](SimulationConfig& c) -> int& { return c.headers.ipv4; });
    integer("headers.pdcp", [](SimulationConfig& c) -> int& { return c.headers.pdcp; });
    integer("headers.rlc", [](SimulationConfig& c) -> int& { return c.headers.rlc; });
    integer("headers.rlc_per_extra_segment",
            [](SimulationConfig& c) -> int& { return c.headers.rlc_per_extra_segment; });
    return m;
  }();
  return r;
}

inline std::string env_name(const std::string& key) {
  std::string n = "MMV2V_" + key;
  for (char& ch : n)
    ch = ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return n;
}

} // namespace config_detail

/// All registered configuration keys, as `section.name`.
inline std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& [name, _] : config_detail::registry())
    k.push_back(name);
  return k;
}

/// Sets one key on `cfg`. Unknown keys and malformed values raise ConfigError
/// whose message starts with the key path.
inline void apply_key(SimulationConfig& cfg, const std::string& key, const std::string& value) {
  const auto& r = config_detail::registry();
  auto it = r.find(key);
  if (it == r.end())
    throw ConfigError(key + ": unknown configuration key");
  it->second(cfg, key, value);
}

/// Checks that do not need a scenario build, reported against their key.
inline void validate_config(const SimulationConfig& cfg) {
  const McsTable table = [&] {
    try {
      return cfg.phy.load_table();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("phy.mcs_table: ") + e.what());
    }
  }();
  if (cfg.phy.mcs_mode == McsMode::Fixed && (cfg.phy.mcs < 0 || cfg.phy.mcs >= table.size()))
    throw ConfigError("phy.mcs: index " + std::to_string(cfg.phy.mcs) + " outside table [0, " +
                      std::to_string(table.size() - 1) + "]");
  if (cfg.phy.numerology != 2 && cfg.phy.numerology != 3)
    throw ConfigError("phy.numerology: must be 2 or 3");
  if (cfg.phy.control_symbols < 0 || cfg.phy.control_symbols > 4)
    throw ConfigError("phy.control_symbols: must lie in [0, 4]");
  if (!(cfg.phy.target_bler > 0.0 && cfg.phy.target_bler < 1.0))
    throw ConfigError("phy.target_bler: must lie in (0, 1)");
  if (!(cfg.app.rate_bps > 0.0))
    throw ConfigError("app.rate_bps: must be positive");
  if (cfg.app.packet_bytes <= 0)
    throw ConfigError("app.packet_bytes: must be positive");
  if (cfg.rlc.sn_bits < 2 || cfg.rlc.sn_bits > 16)
    throw ConfigError("rlc.sn_bits: must lie in [2, 16]");
  if (cfg.rlc.t_reordering_ms < 0.0)
    throw ConfigError("rlc.t_reordering_ms: must be nonnegative");
  if (cfg.scenario.kind == ScenarioKind::A && !(cfg.scenario.distance_m > 0.0))
    throw ConfigError("scenario.distance_m: must be positive");
  if (!(cfg.channel.bandwidth_hz > 0.0))
    throw ConfigError("channel.bandwidth_hz: must be positive");
  if (!(cfg.channel.carrier_ghz > 0.0))
    throw ConfigError("channel.carrier_ghz: must be positive");
}

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

struct SweepPoint {
  std::vector<std::string> values; // one per axis, as written in the file
  SimulationConfig config;
};

struct SweepSpec {
  SimulationConfig base;
  std::vector<SweepAxis> axes;
  std::vector<std::uint64_t> seeds;
  double confidence = 0.95;

  std::size_t point_count() const {
    std::size_t n = 1;
    for (const auto& a : axes)
      n *= a.values.size();
    return n;
  }
  std::size_t run_count() const { return point_count() * seeds.size(); }

  /// Cross product; the first axis varies slowest.
  std::vector<SweepPoint> points() const {
    std::vector<SweepPoint> out;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t n = 0; n < point_count(); ++n) {
      SweepPoint p;
      p.config = base;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        p.values.push_back(axes[a].values[idx[a]]);
        apply_key(p.config, axes[a].key, axes[a].values[idx[a]]);
      }
      validate_config(p.config);
      out.push_back(std::move(p));
      for (std::size_t a = axes.size(); a-- > 0;) {
        if (++idx[a] < axes[a].values.size())
          break;
        idx[a] = 0;
      }
    }
    return out;
  }
};

/// `n` gives seeds 1..n; a comma list gives those seeds verbatim.
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  const auto parts = config_detail::split_list(text);
  if (parts.empty())
    throw ConfigError("seeds: empty seed specification");
  std::vector<std::uint64_t> seeds;
  if (parts.size() == 1 && text.find(',') == std::string::npos) {
    const auto n = config_detail::to_int("seeds", parts[0]);
    if (n < 1)
      throw ConfigError("seeds: count must be positive");
    for (long long i = 1; i <= n; ++i)
      seeds.push_back(static_cast<std::uint64_t>(i));
    return seeds;
  }
  for (const auto& p : parts) {
    const auto s = config_detail::to_int("seeds", p);
    if (s < 0)
      throw ConfigError("seeds: seeds must be nonnegative");
    seeds.push_back(static_cast<std::uint64_t>(s));
  }
  return seeds;
}

using EnvLookup = std::function<const char*(const char*)>;

inline EnvLookup process_env() {
  return [](const char* n) { return std::getenv(n); };
}

/// Scenario-specific defaults applied before the file: Scenario B switches
/// to 10 Mbps ON-OFF traffic with a 2x2 array.
inline SimulationConfig defaults_for(ScenarioKind kind) {
  SimulationConfig c;
  c.scenario.kind = kind;
  if (kind == ScenarioKind::B) {
    c.app = TrafficSource::on_off(10e6, 100);
    c.scenario.antenna_rows = c.scenario.antenna_cols = 2;
  }
  return c;
}

inline SweepSpec parse_config_stream(std::istream& in, const EnvLookup& env = process_env()) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::vector<std::string> sections{"scenario", "channel", "phy", "rlc", "app", "headers", "sweep"};
  for (const auto& [name, sub] : tree) {
    if (std::find(sections.begin(), sections.end(), name) == sections.end())
      throw ConfigError(name + ": unknown configuration section");
    if (sub.empty() && !sub.data().empty())
      throw ConfigError(name + ": key outside any section");
  }

  ScenarioKind kind = ScenarioKind::A;
  if (auto k = tree.get_optional<std::string>("scenario.kind"))
    kind = config_detail::to_enum<ScenarioKind>("scenario.kind", *k, {{"a", ScenarioKind::A}, {"b", ScenarioKind::B}});
  if (const char* e = env("MMV2V_SCENARIO_KIND"))
    kind = config_detail::to_enum<ScenarioKind>("scenario.kind", e, {{"a", ScenarioKind::A}, {"b", ScenarioKind::B}});

  SweepSpec spec;
  spec.base = defaults_for(kind);
  for (const auto& [section, sub] : tree) {
    if (section == "sweep")
      continue;
    for (const auto& [name, value] : sub)
      apply_key(spec.base, section + "." + name, value.data());
  }
  for (const std::string& key : config_keys())
    if (const char* v = env(config_detail::env_name(key).c_str()))
      apply_key(spec.base, key, v);

  spec.seeds = parse_seeds("20");
  if (auto sweep = tree.get_child_optional("sweep")) {
    for (const auto& [name, value] : *sweep) {
      if (name == "seeds") {
        spec.seeds = parse_seeds(value.data());
        continue;
      }
      if (name == "confidence") {
        spec.confidence = config_detail::to_double("sweep.confidence", value.data());
        if (!(spec.confidence > 0.0 && spec.confidence < 1.0))
          throw ConfigError("sweep.confidence: must lie in (0, 1)");
        continue;
      }
      const auto& r = config_detail::registry();
      if (!r.count(name))
        throw ConfigError("sweep." + name + ": unknown configuration key");
      SweepAxis axis{name, config_detail::split_list(value.data())};
      if (axis.values.empty())
        throw ConfigError("sweep." + name + ": empty value list");
      for (const auto& a : spec.axes)
        if (a.key == name)
          throw ConfigError("sweep." + name + ": duplicate axis");
      spec.axes.push_back(std::move(axis));
    }
  }
  validate_config(spec.base);
  (void)spec.points();
  return spec;
}

inline SweepSpec parse_config(const std::string& path, const EnvLookup& env = process_env()) {
  std::ifstream f(path);
  if (!f)
    throw ConfigError("cannot open config file '" + path + "'");
  return parse_config_stream(f, env);
}

inline SweepSpec parse_config_string(const std::string& text, const EnvLookup& env = process_env()) {
  std::istringstream in(text);
  return parse_config_stream(in, env);
}

} // namespace mmv2v
