#include "vbspool/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace vbspool {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing \"" + key + "\"");
  return *it;
}

int as_int(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError(what + " must be an integer");
  const auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(what + " is out of range");
  return static_cast<int>(v);
}

double as_real(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

Discipline parse_discipline(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": discipline must be a string");
  const auto s = j.get<std::string>();
  if (s == "per_session") return Discipline::PerSession;
  if (s == "shared") return Discipline::SharedCapacity;
  throw ConfigError(where + ": discipline must be \"per_session\" or \"shared\", got \"" + s + "\"");
}

json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"half_width_95", e.half_width}};
}

}  // namespace

PoolConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  const json& classes = require(doc, "classes", "config");
  if (!classes.is_array()) throw ConfigError("config: \"classes\" must be an array");
  PoolConfig config;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string where = "class " + std::to_string(i + 1);
    const json& c = classes[i];
    if (!c.is_object()) throw ConfigError(where + ": must be an object");
    ClassSpec spec;
    spec.count = as_int(require(c, "count", where), where + ": count");
    spec.radio_servers = as_int(require(c, "radio_servers", where), where + ": radio_servers");
    const bool has_load = c.contains("load");
    const bool has_rates = c.contains("arrival_rate") || c.contains("service_rate");
    if (has_load == has_rates)
      throw ConfigError(where + ": give either \"load\" or \"arrival_rate\" with \"service_rate\"");
    if (has_load) {
      spec.arrival_rate = as_real(c["load"], where + ": load");
      spec.service_rate = 1.0;
    } else {
      spec.arrival_rate = as_real(require(c, "arrival_rate", where), where + ": arrival_rate");
      spec.service_rate = as_real(require(c, "service_rate", where), where + ": service_rate");
    }
    spec.discipline = parse_discipline(require(c, "discipline", where), where);
    config.classes.push_back(spec);
  }
  config.compute_servers = as_int(require(doc, "compute_servers", "config"), "config: compute_servers");
  return validate_config(config);
}

PoolConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

PoolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

json to_json(const PoolConfig& config) {
  json classes = json::array();
  for (const auto& c : config.classes) {
    classes.push_back({{"count", c.count},
                       {"radio_servers", c.radio_servers},
                       {"arrival_rate", c.arrival_rate},
                       {"service_rate", c.service_rate},
                       {"discipline", c.discipline == Discipline::PerSession ? "per_session" : "shared"}});
  }
  return {{"classes", classes}, {"compute_servers", config.compute_servers}};
}

json to_json(const BlockingReport& report) {
  json classes = json::array();
  for (std::size_t v = 0; v < report.per_class_radio.size(); ++v) {
    classes.push_back({{"class", v + 1},
                       {"p_radio", report.per_class_radio[v]},
                       {"p_compute", report.computational},
                       {"p_overall", report.per_class_overall[v]}});
  }
  return {{"method", to_string(report.method)}, {"p_compute", report.computational}, {"classes", classes}};
}

json to_json(const SimStats& stats) {
  json classes = json::array();
  for (std::size_t v = 0; v < stats.offered.size(); ++v) {
    const auto& e = stats.blocking_estimates[v];
    classes.push_back({{"class", v + 1},
                       {"offered", stats.offered[v]},
                       {"blocked_radio", stats.blocked_radio[v]},
                       {"blocked_compute", stats.blocked_compute[v]},
                       {"p_radio", estimate_json(e.radio)},
                       {"p_compute", estimate_json(e.compute)},
                       {"p_overall", estimate_json(e.overall)}});
  }
  json reps = json::array();
  for (const auto& r : stats.replications) {
    reps.push_back({{"seed", r.seed}, {"events", r.events}, {"mean_utilization", r.mean_utilization}});
  }
  const auto u = utilization_estimate(stats);
  json util = {{"mean", u.mean}, {"replications", u.replications}};
  if (std::isfinite(u.half_width)) util["half_width_95"] = u.half_width;
  return {{"method", to_string(Method::Simulated)},
          {"service", to_string(stats.service)},
          {"warmup_time", stats.warmup_time},
          {"horizon_time", stats.horizon_time},
          {"classes", classes},
          {"utilization", util},
          {"occupancy_histogram", stats.occupancy_histogram},
          {"replications", reps}};
}

json to_json(const GainReport& g) {
  return {{"utilization_limit", g.utilization_limit},
          {"utilization_precondition", g.utilization_precondition},
          {"residual_gain", g.residual_gain},
          {"knee_alpha", g.knee_alpha},
          {"knee_servers", g.knee_servers},
          {"knee_gain", g.knee_gain},
          {"knee_gain_bracket", {g.knee_gain_low, g.knee_gain_high}},
          {"delta", g.delta},
          {"regime", to_string(g.regime.regime)},
          {"regime_indicator", g.regime.indicator},
          {"regime_exponent", g.regime.exponent}};
}

}  // namespace vbspool
