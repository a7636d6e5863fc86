#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcost/errors.hpp"
#include "fedcost/market.hpp"
#include "fedcost/rng.hpp"
#include "fedcost/scheduler.hpp"
#include "fedcost/types.hpp"
#include "fedcost/workload.hpp"

namespace fedcost {

struct MarketConfig {
  std::vector<Zone> zones;
  std::map<ZoneId, PriceTrace> traces;
  double billing_increment_s = 1.0;
};

// Full experiment description: clients, market, models, policy, seed.
struct ScenarioConfig {
  std::string name = "unnamed";
  int rounds = 0;
  std::uint64_t seed = 0;
  std::vector<ClientProfile> clients;
  MarketConfig market;
  ProvisioningModel provisioning;
  PreemptionModel preemption;
  PolicyParams policy;
  std::optional<std::string> outputs_dir;
};

namespace cfg_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path, "unknown field '" + item.key() + "'");
  }
}

inline const json& require(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing required field '" + std::string(key) + "'");
  return *it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline double number_field(const json& j, const char* key, const std::string& path) {
  return as_number(require(j, key, path), path + "." + key);
}

inline double number_or(const json& j, const char* key, const std::string& path, double dflt) {
  auto it = j.find(key);
  return it == j.end() ? dflt : as_number(*it, path + "." + key);
}

inline std::string string_field(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  return cells;
}

inline double parse_csv_number(const std::string& cell, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(where, "cannot parse number '" + cell + "'");
  }
}

}  // namespace cfg_detail

// CSV columns: zone_id, effective_from_seconds, spot_price_per_hour,
// on_demand_price_per_hour. Header row required; on-demand must be constant
// per zone.
inline std::map<ZoneId, PriceTrace> load_price_trace_csv(std::istream& in,
                                                         const std::string& where) {
  using cfg_detail::fail;
  std::string line;
  if (!std::getline(in, line)) fail(where, "empty price trace file");
  auto header = cfg_detail::split_csv_line(line);
  const std::vector<std::string> expected = {"zone_id", "effective_from_seconds",
                                             "spot_price_per_hour", "on_demand_price_per_hour"};
  if (std::vector<std::string>(header.begin(), header.end()) != expected) {
    fail(where, "bad header row; expected zone_id,effective_from_seconds,"
                "spot_price_per_hour,on_demand_price_per_hour");
  }
  std::map<ZoneId, PriceTrace> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = cfg_detail::split_csv_line(line);
    std::string at = where + " line " + std::to_string(lineno);
    if (cells.size() != 4) fail(at, "expected 4 columns");
    ZoneId zone = cells[0];
    double from = cfg_detail::parse_csv_number(cells[1], at);
    double spot = cfg_detail::parse_csv_number(cells[2], at);
    double od = cfg_detail::parse_csv_number(cells[3], at);
    PriceTrace& trace = out[zone];
    if (!trace.points.empty() && trace.on_demand_per_hour != od) {
      fail(at, "on-demand price for zone " + zone + " is not constant");
    }
    trace.on_demand_per_hour = od;
    trace.points.push_back({from, spot});
  }
  return out;
}

inline std::map<ZoneId, PriceTrace> load_price_trace_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open price trace csv " + path);
  return load_price_trace_csv(f, path);
}

// CSV columns: zone_id, fire_at_seconds. Header row required.
inline std::vector<PreemptionEventSpec> load_preemption_trace_csv(std::istream& in,
                                                                  const std::string& where) {
  using cfg_detail::fail;
  std::string line;
  if (!std::getline(in, line)) fail(where, "empty preemption trace file");
  auto header = cfg_detail::split_csv_line(line);
  if (header != std::vector<std::string>{"zone_id", "fire_at_seconds"}) {
    fail(where, "bad header row; expected zone_id,fire_at_seconds");
  }
  std::vector<PreemptionEventSpec> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = cfg_detail::split_csv_line(line);
    std::string at = where + " line " + std::to_string(lineno);
    if (cells.size() != 2) fail(at, "expected 2 columns");
    out.push_back({cells[0], cfg_detail::parse_csv_number(cells[1], at)});
  }
  return out;
}

inline std::vector<PreemptionEventSpec> load_preemption_trace_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open preemption trace csv " + path);
  return load_preemption_trace_csv(f, path);
}

namespace cfg_detail {

inline DurationNoise parse_noise(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "half_width", "sigma"});
  DurationNoise n;
  std::string kind = string_field(j, "kind", path);
  if (kind == "none") {
    n.kind = DurationNoise::Kind::None;
  } else if (kind == "uniform") {
    n.kind = DurationNoise::Kind::Uniform;
    n.half_width = number_field(j, "half_width", path);
  } else if (kind == "lognormal") {
    n.kind = DurationNoise::Kind::LogNormal;
    n.sigma = number_field(j, "sigma", path);
  } else {
    fail(path + ".kind", "expected none|uniform|lognormal, got '" + kind + "'");
  }
  return n;
}

inline ClientProfile parse_client(const json& j, const std::string& path) {
  check_keys(j, path,
             {"id", "epoch_cold_s", "epoch_warm_s", "noise", "budget",
              "checkpoint_interval_s", "zones"});
  ClientProfile c;
  c.id = string_field(j, "id", path);
  c.epoch_cold_s = number_field(j, "epoch_cold_s", path);
  c.epoch_warm_s = number_field(j, "epoch_warm_s", path);
  if (auto it = j.find("noise"); it != j.end()) c.noise = parse_noise(*it, path + ".noise");
  if (auto it = j.find("budget"); it != j.end() && !it->is_null()) {
    c.budget = as_number(*it, path + ".budget");
  }
  c.checkpoint_interval_s = number_or(j, "checkpoint_interval_s", path, 300.0);
  const json& zones = require(j, "zones", path);
  if (!zones.is_array()) fail(path + ".zones", "expected an array of zone ids");
  for (const auto& z : zones) {
    if (!z.is_string()) fail(path + ".zones", "expected zone ids as strings");
    c.zones.push_back(z.get<std::string>());
  }
  return c;
}

inline MarketConfig parse_market(const json& j, const std::string& path,
                                 const std::filesystem::path& base_dir) {
  check_keys(j, path, {"zones", "price_trace_csv", "billing_increment_s"});
  MarketConfig m;
  m.billing_increment_s = number_or(j, "billing_increment_s", path, 1.0);

  std::map<ZoneId, PriceTrace> csv_traces;
  if (auto it = j.find("price_trace_csv"); it != j.end()) {
    if (!it->is_string()) fail(path + ".price_trace_csv", "expected a path string");
    std::filesystem::path p = it->get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    csv_traces = load_price_trace_csv_file(p.string());
  }

  const json& zones = require(j, "zones", path);
  if (!zones.is_array() || zones.empty()) fail(path + ".zones", "expected a non-empty array");
  int idx = 0;
  for (const auto& zj : zones) {
    std::string zpath = path + ".zones[" + std::to_string(idx++) + "]";
    check_keys(zj, zpath, {"id", "instance_type", "on_demand_price_per_hour", "spot_trace"});
    Zone z;
    z.id = string_field(zj, "id", zpath);
    z.instance_type = zj.contains("instance_type") ? string_field(zj, "instance_type", zpath) : "";
    bool inline_trace = zj.contains("spot_trace") || zj.contains("on_demand_price_per_hour");
    if (inline_trace && csv_traces.count(z.id)) {
      fail(zpath, "zone " + z.id + " priced both inline and by price_trace_csv");
    }
    if (inline_trace) {
      PriceTrace trace;
      trace.on_demand_per_hour = number_field(zj, "on_demand_price_per_hour", zpath);
      const json& pts = require(zj, "spot_trace", zpath);
      if (!pts.is_array() || pts.empty()) fail(zpath + ".spot_trace", "expected a non-empty array");
      int pidx = 0;
      for (const auto& pj : pts) {
        std::string ppath = zpath + ".spot_trace[" + std::to_string(pidx++) + "]";
        check_keys(pj, ppath, {"at_s", "price_per_hour"});
        trace.points.push_back({number_field(pj, "at_s", ppath),
                                number_field(pj, "price_per_hour", ppath)});
      }
      m.traces.emplace(z.id, std::move(trace));
    } else {
      auto it = csv_traces.find(z.id);
      if (it == csv_traces.end()) fail(zpath, "zone " + z.id + " has no price data");
      m.traces.emplace(z.id, it->second);
    }
    m.zones.push_back(std::move(z));
  }
  return m;
}

inline ProvisioningModel parse_provisioning(const json& j, const std::string& path) {
  check_keys(j, path, {"base_delay_s", "jitter", "seed"});
  ProvisioningModel p;
  p.base_delay_s = number_or(j, "base_delay_s", path, 120.0);
  if (auto it = j.find("jitter"); it != j.end()) {
    std::string jpath = path + ".jitter";
    check_keys(*it, jpath, {"kind", "half_width_s", "mu", "sigma"});
    std::string kind = string_field(*it, "kind", jpath);
    if (kind == "none") {
      p.jitter.kind = ProvisioningJitter::Kind::None;
    } else if (kind == "uniform") {
      p.jitter.kind = ProvisioningJitter::Kind::Uniform;
      p.jitter.half_width_s = number_field(*it, "half_width_s", jpath);
    } else if (kind == "lognormal") {
      p.jitter.kind = ProvisioningJitter::Kind::LogNormal;
      p.jitter.mu = number_or(*it, "mu", jpath, 0.0);
      p.jitter.sigma = number_field(*it, "sigma", jpath);
    } else {
      fail(jpath + ".kind", "expected none|uniform|lognormal, got '" + kind + "'");
    }
  }
  if (auto it = j.find("seed"); it != j.end()) p.seed = it->get<std::uint64_t>();
  return p;
}

inline PreemptionModel parse_preemption(const json& j, const std::string& path,
                                        const std::filesystem::path& base_dir) {
  check_keys(j, path, {"kind", "rate_per_hour", "events", "trace_csv", "seed"});
  PreemptionModel p;
  std::string kind = string_field(j, "kind", path);
  if (kind == "none") {
    p.kind = PreemptionModel::Kind::None;
  } else if (kind == "poisson") {
    p.kind = PreemptionModel::Kind::Poisson;
    p.rate_per_hour = number_field(j, "rate_per_hour", path);
  } else if (kind == "trace") {
    p.kind = PreemptionModel::Kind::Trace;
    if (auto it = j.find("events"); it != j.end()) {
      if (!it->is_array()) fail(path + ".events", "expected an array");
      int idx = 0;
      for (const auto& ej : *it) {
        std::string epath = path + ".events[" + std::to_string(idx++) + "]";
        check_keys(ej, epath, {"zone", "at_s"});
        p.events.push_back({string_field(ej, "zone", epath), number_field(ej, "at_s", epath)});
      }
    }
    if (auto it = j.find("trace_csv"); it != j.end()) {
      if (!it->is_string()) fail(path + ".trace_csv", "expected a path string");
      std::filesystem::path csv = it->get<std::string>();
      if (csv.is_relative()) csv = base_dir / csv;
      auto loaded = load_preemption_trace_csv_file(csv.string());
      p.events.insert(p.events.end(), loaded.begin(), loaded.end());
    }
  } else {
    fail(path + ".kind", "expected none|poisson|trace, got '" + kind + "'");
  }
  if (auto it = j.find("seed"); it != j.end()) p.seed = it->get<std::uint64_t>();
  return p;
}

inline PolicyParams parse_policy(const json& j, const std::string& path) {
  check_keys(j, path,
             {"mode", "ema_alpha", "t_threshold_s", "t_buffer_s", "transfer_latency_s",
              "resume_overhead"});
  PolicyParams p;
  if (auto it = j.find("mode"); it != j.end()) {
    if (!it->is_string()) fail(path + ".mode", "expected a string");
    auto mode = policy_mode_from_string(it->get<std::string>());
    if (!mode) {
      fail(path + ".mode",
           "expected fedcostaware|plainspot|ondemand, got '" + it->get<std::string>() + "'");
    }
    p.mode = *mode;
  }
  p.ema_alpha = number_or(j, "ema_alpha", path, 0.3);
  p.t_threshold_s = number_or(j, "t_threshold_s", path, 60.0);
  p.t_buffer_s = number_or(j, "t_buffer_s", path, 30.0);
  p.transfer_latency_s = number_or(j, "transfer_latency_s", path, 0.0);
  p.resume_overhead = number_or(j, "resume_overhead", path, 1.0);
  return p;
}

}  // namespace cfg_detail

inline void validate(const ScenarioConfig& cfg) {
  using cfg_detail::fail;
  if (cfg.rounds < 1) fail("rounds", "must be >= 1");
  if (cfg.policy.mode == PolicyMode::FedCostAware && cfg.rounds < 3) {
    fail("rounds", "fedcostaware needs two calibration rounds plus at least one "
                   "optimized round (rounds >= 3)");
  }
  if (cfg.clients.empty()) fail("clients", "at least one client required");

  std::set<ZoneId> zone_ids;
  for (const auto& z : cfg.market.zones) {
    if (!zone_ids.insert(z.id).second) fail("market.zones", "duplicate zone id " + z.id);
  }
  for (const auto& [zone, trace] : cfg.market.traces) {
    std::string p = "market.zones(" + zone + ")";
    if (trace.points.empty()) fail(p, "empty spot trace");
    if (trace.points.front().effective_from != 0.0) fail(p, "first spot point must be at t=0");
    if (!(trace.on_demand_per_hour > 0.0)) fail(p, "on-demand price must be positive");
    SimTime prev = -1.0;
    for (const auto& pt : trace.points) {
      if (pt.effective_from <= prev) fail(p, "spot trace times must be strictly ascending");
      prev = pt.effective_from;
      if (!(pt.spot_per_hour > 0.0)) fail(p, "spot price must be positive");
      if (pt.spot_per_hour > trace.on_demand_per_hour) {
        fail(p, "spot price above the on-demand price");
      }
    }
  }
  if (!(cfg.market.billing_increment_s > 0.0)) {
    fail("market.billing_increment_s", "must be positive");
  }

  std::set<ClientId> client_ids;
  int idx = 0;
  for (const auto& c : cfg.clients) {
    std::string p = "clients[" + std::to_string(idx++) + "]";
    if (c.id.empty()) fail(p + ".id", "must be non-empty");
    if (!client_ids.insert(c.id).second) fail(p + ".id", "duplicate client id " + c.id);
    if (!(c.epoch_warm_s > 0.0)) fail(p + ".epoch_warm_s", "must be positive");
    if (c.epoch_cold_s < c.epoch_warm_s) {
      fail(p + ".epoch_cold_s", "cold epoch must be at least as long as the warm epoch");
    }
    if (c.budget && *c.budget < 0.0) fail(p + ".budget", "must be non-negative");
    if (!(c.checkpoint_interval_s > 0.0)) fail(p + ".checkpoint_interval_s", "must be positive");
    if (c.zones.empty()) fail(p + ".zones", "must list at least one candidate zone");
    for (const auto& z : c.zones) {
      if (!zone_ids.count(z)) fail(p + ".zones", "unknown zone " + z);
    }
    if (c.noise.kind == DurationNoise::Kind::Uniform &&
        !(c.noise.half_width >= 0.0 && c.noise.half_width < 1.0)) {
      fail(p + ".noise.half_width", "must be in [0, 1)");
    }
    if (c.noise.kind == DurationNoise::Kind::LogNormal && c.noise.sigma < 0.0) {
      fail(p + ".noise.sigma", "must be non-negative");
    }
  }

  if (!(cfg.provisioning.base_delay_s > 0.0)) fail("provisioning.base_delay_s", "must be positive");
  if (cfg.provisioning.jitter.kind == ProvisioningJitter::Kind::Uniform) {
    if (cfg.provisioning.jitter.half_width_s < 0.0 ||
        cfg.provisioning.jitter.half_width_s >= cfg.provisioning.base_delay_s) {
      fail("provisioning.jitter.half_width_s",
           "must be in [0, base_delay_s) so sampled delays stay positive");
    }
  }
  if (cfg.provisioning.jitter.kind == ProvisioningJitter::Kind::LogNormal &&
      cfg.provisioning.jitter.sigma < 0.0) {
    fail("provisioning.jitter.sigma", "must be non-negative");
  }

  if (cfg.preemption.kind == PreemptionModel::Kind::Poisson &&
      !(cfg.preemption.rate_per_hour > 0.0)) {
    fail("preemption.rate_per_hour", "must be positive");
  }
  if (cfg.preemption.kind == PreemptionModel::Kind::Trace) {
    int eidx = 0;
    for (const auto& ev : cfg.preemption.events) {
      std::string p = "preemption.events[" + std::to_string(eidx++) + "]";
      if (!zone_ids.count(ev.zone)) fail(p + ".zone", "unknown zone " + ev.zone);
      if (ev.fire_at < 0.0) fail(p + ".at_s", "must be non-negative");
    }
  }

  if (!(cfg.policy.ema_alpha > 0.0 && cfg.policy.ema_alpha <= 1.0)) {
    fail("policy.ema_alpha", "must be in (0, 1]");
  }
  if (cfg.policy.t_threshold_s < 0.0) fail("policy.t_threshold_s", "must be non-negative");
  if (cfg.policy.t_buffer_s < 0.0) fail("policy.t_buffer_s", "must be non-negative");
  if (cfg.policy.transfer_latency_s < 0.0) fail("policy.transfer_latency_s", "must be non-negative");
  if (!(cfg.policy.resume_overhead > 0.0)) fail("policy.resume_overhead", "must be positive");
}

inline ScenarioConfig parse_scenario_json(const nlohmann::json& j,
                                          const std::filesystem::path& base_dir) {
  using namespace cfg_detail;
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
  check_keys(j, "scenario",
             {"name", "rounds", "seed", "clients", "market", "provisioning", "preemption",
              "policy", "outputs"});
  ScenarioConfig cfg;
  if (j.contains("name")) cfg.name = string_field(j, "name", "scenario");
  const json& rounds = require(j, "rounds", "scenario");
  if (!rounds.is_number_integer()) fail("rounds", "expected an integer");
  cfg.rounds = rounds.get<int>();
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !it->is_number_integer()) fail("seed", "expected an integer");
    cfg.seed = it->get<std::uint64_t>();
  }
  const json& clients = require(j, "clients", "scenario");
  if (!clients.is_array() || clients.empty()) fail("clients", "expected a non-empty array");
  int idx = 0;
  for (const auto& cj : clients) {
    cfg.clients.push_back(parse_client(cj, "clients[" + std::to_string(idx++) + "]"));
  }
  cfg.market = parse_market(require(j, "market", "scenario"), "market", base_dir);
  if (auto it = j.find("provisioning"); it != j.end()) {
    cfg.provisioning = parse_provisioning(*it, "provisioning");
  }
  if (auto it = j.find("preemption"); it != j.end()) {
    cfg.preemption = parse_preemption(*it, "preemption", base_dir);
  }
  if (auto it = j.find("policy"); it != j.end()) cfg.policy = parse_policy(*it, "policy");
  if (auto it = j.find("outputs"); it != j.end()) {
    if (!it->is_string()) fail("outputs", "expected a path string");
    cfg.outputs_dir = it->get<std::string>();
  }
  validate(cfg);
  return cfg;
}

inline ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario_json(j, std::filesystem::path(path).parent_path());
}

// Canonical resolved form: CSV traces merged, defaults applied, sorted keys.
// The policy mode and output dir stay out so per-policy runs of one scenario
// share a digest.
inline nlohmann::json canonical_json(const ScenarioConfig& cfg, bool include_policy_mode) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["rounds"] = cfg.rounds;
  j["seed"] = cfg.seed;
  for (const auto& c : cfg.clients) {
    nlohmann::json cj;
    cj["epoch_cold_s"] = c.epoch_cold_s;
    cj["epoch_warm_s"] = c.epoch_warm_s;
    switch (c.noise.kind) {
      case DurationNoise::Kind::None: cj["noise"] = "none"; break;
      case DurationNoise::Kind::Uniform:
        cj["noise"] = {{"uniform", c.noise.half_width}};
        break;
      case DurationNoise::Kind::LogNormal:
        cj["noise"] = {{"lognormal", c.noise.sigma}};
        break;
    }
    if (c.budget) cj["budget"] = *c.budget;
    cj["checkpoint_interval_s"] = c.checkpoint_interval_s;
    cj["zones"] = c.zones;
    j["clients"][c.id] = std::move(cj);
  }
  for (const auto& z : cfg.market.zones) {
    nlohmann::json zj;
    zj["instance_type"] = z.instance_type;
    const PriceTrace& trace = cfg.market.traces.at(z.id);
    zj["on_demand_per_hour"] = trace.on_demand_per_hour;
    for (const auto& p : trace.points) {
      zj["spot"].push_back({p.effective_from, p.spot_per_hour});
    }
    j["market"][z.id] = std::move(zj);
  }
  j["billing_increment_s"] = cfg.market.billing_increment_s;
  j["provisioning"] = {{"base_delay_s", cfg.provisioning.base_delay_s},
                       {"jitter_kind", static_cast<int>(cfg.provisioning.jitter.kind)},
                       {"half_width_s", cfg.provisioning.jitter.half_width_s},
                       {"mu", cfg.provisioning.jitter.mu},
                       {"sigma", cfg.provisioning.jitter.sigma}};
  if (cfg.provisioning.seed) j["provisioning"]["seed"] = *cfg.provisioning.seed;
  j["preemption"] = {{"kind", static_cast<int>(cfg.preemption.kind)},
                     {"rate_per_hour", cfg.preemption.rate_per_hour}};
  for (const auto& ev : cfg.preemption.events) {
    j["preemption"]["events"].push_back({ev.zone, ev.fire_at});
  }
  if (cfg.preemption.seed) j["preemption"]["seed"] = *cfg.preemption.seed;
  j["policy"] = {{"ema_alpha", cfg.policy.ema_alpha},
                 {"t_threshold_s", cfg.policy.t_threshold_s},
                 {"t_buffer_s", cfg.policy.t_buffer_s},
                 {"transfer_latency_s", cfg.policy.transfer_latency_s},
                 {"resume_overhead", cfg.policy.resume_overhead}};
  if (include_policy_mode) j["policy"]["mode"] = to_string(cfg.policy.mode);
  return j;
}

inline std::string config_digest(const ScenarioConfig& cfg) {
  std::uint64_t h = fnv1a64(canonical_json(cfg, /*include_policy_mode=*/false).dump());
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << h;
  return os.str();
}

}  // namespace fedcost
