#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "vbspool/approx.hpp"
#include "vbspool/exact.hpp"
#include "vbspool/io.hpp"
#include "vbspool/kernels.hpp"
#include "vbspool/parallel.hpp"
#include "vbspool/recursive.hpp"
#include "vbspool/simulator.hpp"

namespace vbspool::cli {

namespace {

using nlohmann::json;

enum class Engine { Exact, Recursive, Approx, Simulate };

struct Options {
  std::string config_path;
  std::string engine = "recursive";
  std::string sweep_n;
  std::string sweep_pool;
  double delta = 1e-4;
  std::uint64_t seed = 1;
  double horizon = 1e4;
  std::optional<double> warmup;
  int replications = 1;
  std::string out;
  std::string format;
  std::string method = "exact-search";
  std::string moments = "exact";
  std::string service = "exponential";
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Engine parse_engine(const std::string& name) {
  if (name == "exact") return Engine::Exact;
  if (name == "recursive") return Engine::Recursive;
  if (name == "approx") return Engine::Approx;
  if (name == "simulate") return Engine::Simulate;
  throw UsageError("unknown engine \"" + name + "\"");
}

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::Exact:
      return "exact";
    case Engine::Recursive:
      return "recursive";
    case Engine::Approx:
      return "approx";
    case Engine::Simulate:
      break;
  }
  return "simulate";
}

std::vector<Engine> parse_engines(const std::string& list) {
  std::vector<Engine> engines;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) engines.push_back(parse_engine(item));
  if (engines.empty()) throw UsageError("no engine given");
  return engines;
}

MomentSource parse_moments(const std::string& s) {
  if (s == "exact") return MomentSource::Exact;
  if (s == "closed-form") return MomentSource::ClosedForm;
  throw UsageError("--moments must be exact or closed-form");
}

ServiceLaw parse_service(const std::string& s) {
  if (s == "exponential") return ServiceLaw::Exponential;
  if (s == "erlang2") return ServiceLaw::Erlang2;
  if (s == "hyperexponential") return ServiceLaw::Hyperexponential;
  throw UsageError("--service must be exponential, erlang2 or hyperexponential");
}

struct Row {
  long n = 0;
  double n_norm = 0.0;
  std::size_t cls = 0;  // 1-based
  double p_radio = 0.0;
  double p_compute = 0.0;
  double p_overall = 0.0;
  std::string method;
  long pool_size = 0;
};

SimConfig sim_config(const PoolConfig& pool, const Options& o) {
  SimConfig s;
  s.pool = pool;
  s.warmup_time = o.warmup;
  s.horizon_time = o.horizon;
  s.seed = o.seed;
  s.replications = o.replications;
  s.service = parse_service(o.service);
  return s;
}

std::vector<Row> evaluate(const PoolConfig& pool, Engine engine, const Options& o) {
  std::vector<Row> rows;
  const double total = static_cast<double>(pool.total_radio_servers());
  auto push = [&](std::size_t v, double r, double c, double p) {
    rows.push_back({pool.compute_servers, pool.compute_servers / total, v + 1, r, c, p, engine_name(engine),
                    pool.pool_size()});
  };
  if (engine == Engine::Simulate) {
    const auto stats = simulate(sim_config(pool, o));
    for (std::size_t v = 0; v < pool.num_classes(); ++v) {
      const auto& e = stats.blocking_estimates[v];
      push(v, e.radio.value, e.compute.value, e.overall.value);
    }
    return rows;
  }
  BlockingReport report;
  if (engine == Engine::Exact) {
    report = blocking_exact(pool);
  } else if (engine == Engine::Recursive) {
    report = blocking_recursive(pool);
  } else {
    const auto mom = class_moments(pool, parse_moments(o.moments));
    report = blocking_approx(pool, pool_moments(pool, mom, pool.compute_servers), mom);
  }
  for (std::size_t v = 0; v < pool.num_classes(); ++v)
    push(v, report.per_class_radio[v], report.computational, report.per_class_overall[v]);
  return rows;
}

PoolConfig scale_pool(const PoolConfig& base, long factor) {
  PoolConfig p = base;
  for (auto& c : p.classes) c.count = static_cast<int>(c.count * factor);
  p.compute_servers = static_cast<int>(base.compute_servers * factor);
  return validate_config(p);
}

json meta_json(const PoolConfig& config, const Options& o, const std::string& command) {
  json m = {{"tool", "vbspool"},
            {"version", VBSPOOL_VERSION},
            {"command", command},
            {"config", to_json(config)},
            {"engine", o.engine},
            {"delta", o.delta},
            {"moments", o.moments},
            {"kernel", kernels::to_string(kernels::active_backend())}};
  if (o.engine.find("simulate") != std::string::npos || command == "simulate") {
    m["seed"] = o.seed;
    m["generator"] = kGeneratorName;
    m["horizon"] = o.horizon;
    m["warmup"] = o.warmup ? *o.warmup : default_warmup(config);
    m["replications"] = o.replications;
    m["service"] = o.service;
  }
  if (!o.sweep_n.empty()) m["sweep_n"] = o.sweep_n;
  if (!o.sweep_pool.empty()) m["sweep_pool"] = o.sweep_pool;
  return m;
}

std::string csv_header(const json& meta) {
  std::string s;
  for (const auto& [key, value] : meta.items())
    s += "# " + key + ": " + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
  return s;
}

std::string rows_csv(const json& meta, const std::vector<Row>& rows, bool with_pool) {
  std::string s = csv_header(meta);
  s += "N,N_norm,class,p_radio,p_compute,p_overall,method";
  s += with_pool ? ",pool_size\n" : "\n";
  for (const auto& r : rows) {
    s += std::to_string(r.n) + "," + format_number(r.n_norm) + "," + std::to_string(r.cls) + "," +
         format_number(r.p_radio) + "," + format_number(r.p_compute) + "," + format_number(r.p_overall) + "," +
         r.method;
    s += with_pool ? "," + std::to_string(r.pool_size) + "\n" : "\n";
  }
  return s;
}

json rows_json(const json& meta, const std::vector<Row>& rows, bool with_pool) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j = {{"N", r.n},           {"N_norm", r.n_norm},       {"class", r.cls},     {"p_radio", r.p_radio},
              {"p_compute", r.p_compute}, {"p_overall", r.p_overall}, {"method", r.method}};
    if (with_pool) j["pool_size"] = r.pool_size;
    arr.push_back(j);
  }
  return {{"meta", meta}, {"rows", arr}};
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw IoError("cannot write " + o.out);
  f << text;
  if (!f) throw IoError("cannot write " + o.out);
}

std::string format_of(const Options& o, const char* fallback) {
  const std::string f = o.format.empty() ? fallback : o.format;
  if (f != "csv" && f != "json") throw UsageError("--format must be csv or json");
  return f;
}

void check_cap(const PoolConfig& pool) {
  const auto size = state_space_size(pool);
  if (size > kDefaultEnumerationCap) throw EnumerationCapExceeded(size, kDefaultEnumerationCap);
}

int cmd_blocking(const Options& o, std::ostream& out) {
  const PoolConfig config = load_config(o.config_path);
  const Engine engine = parse_engine(o.engine);
  if (engine == Engine::Exact) check_cap(config);
  const auto rows = evaluate(config, engine, o);
  const json meta = meta_json(config, o, "blocking");
  if (format_of(o, "json") == "csv") {
    emit(rows_csv(meta, rows, false), o, out);
  } else {
    emit(rows_json(meta, rows, false).dump(2) + "\n", o, out);
  }
  return kOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const PoolConfig base = load_config(o.config_path);
  const auto engines = parse_engines(o.engine);
  if (o.sweep_n.empty() == o.sweep_pool.empty()) throw UsageError("sweep needs exactly one of --sweep-n, --sweep-pool");
  const bool by_pool = !o.sweep_pool.empty();
  const Range range = parse_range(by_pool ? o.sweep_pool : o.sweep_n);
  std::vector<PoolConfig> points;
  for (long x = range.lo; x <= range.hi; x += range.step) {
    if (by_pool) {
      points.push_back(scale_pool(base, x));
    } else {
      PoolConfig p = base;
      p.compute_servers = static_cast<int>(x);
      points.push_back(validate_config(p));
    }
  }
  if (std::find(engines.begin(), engines.end(), Engine::Exact) != engines.end())
    for (const auto& p : points) check_cap(p);

  const MomentSource source = parse_moments(o.moments);
  std::vector<std::vector<Row>> results(points.size() * engines.size());
  parallel_for(results.size(), [&](std::size_t i) {
    const auto& pool = points[i / engines.size()];
    const Engine e = engines[i % engines.size()];
    if (e == Engine::Approx) {
      // Points left of |M| mu have no approximation; they are omitted.
      const auto mom = class_moments(pool, source);
      if (!(pool_moments(pool, mom, pool.compute_servers).normalized_compute > 0.0)) return;
    }
    results[i] = evaluate(pool, e, o);
  });
  std::vector<Row> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.pool_size != b.pool_size) return a.pool_size < b.pool_size;
    return a.n != b.n ? a.n < b.n : a.cls < b.cls;
  });
  const json meta = meta_json(base, o, "sweep");
  if (format_of(o, "csv") == "csv") {
    emit(rows_csv(meta, rows, by_pool), o, out);
  } else {
    emit(rows_json(meta, rows, by_pool).dump(2) + "\n", o, out);
  }
  return kOk;
}

json knee_point(const PoolConfig& pool, const Options& o) {
  const auto mom = class_moments(pool, parse_moments(o.moments));
  const GainReport g = gain_report(pool, mom, o.delta);
  long n_star = g.knee_servers;
  if (o.method == "exact-search")
    n_star = knee_servers_exact(pool, o.delta);
  else if (o.method != "approx")
    throw UsageError("--method must be exact-search or approx");
  const double total = static_cast<double>(pool.total_radio_servers());
  const double norm = n_star / total;
  return {{"pool_size", pool.pool_size()},
          {"N_star", n_star},
          {"N_star_norm", norm},
          {"alpha_star", g.knee_alpha},
          {"utilization_limit", g.utilization_limit},
          {"achieved_gain_fraction", (1.0 - norm) / (1.0 - g.utilization_limit)},
          {"knee_gain_approx", g.knee_gain},
          {"knee_gain_bracket", {g.knee_gain_low, g.knee_gain_high}},
          {"regime", to_string(g.regime.regime)},
          {"regime_indicator", g.regime.indicator},
          {"regime_exponent", g.regime.exponent},
          {"method", o.method}};
}

int cmd_knee(const Options& o, std::ostream& out) {
  const PoolConfig base = load_config(o.config_path);
  if (!(o.delta > 0.0)) throw UsageError("--delta must be positive");
  std::vector<PoolConfig> points{base};
  if (!o.sweep_pool.empty()) {
    points.clear();
    const Range range = parse_range(o.sweep_pool);
    for (long x = range.lo; x <= range.hi; x += range.step) {
      PoolConfig p = scale_pool(base, x);
      p.compute_servers = static_cast<int>(p.total_radio_servers());
      points.push_back(p);
    }
  }
  std::vector<json> results(points.size());
  parallel_for(points.size(), [&](std::size_t i) { results[i] = knee_point(points[i], o); });
  const json meta = meta_json(base, o, "knee");
  if (format_of(o, "json") == "json") {
    json doc = {{"meta", meta}};
    if (o.sweep_pool.empty())
      doc["knee"] = results.front();
    else
      doc["points"] = results;
    emit(doc.dump(2) + "\n", o, out);
    return kOk;
  }
  std::string s = csv_header(meta);
  s += "pool_size,N_star,N_star_norm,utilization_limit,achieved_gain_fraction,alpha_star,regime,method\n";
  for (const auto& r : results) {
    s += std::to_string(r["pool_size"].get<long>()) + "," + std::to_string(r["N_star"].get<long>()) + "," +
         format_number(r["N_star_norm"]) + "," + format_number(r["utilization_limit"]) + "," +
         format_number(r["achieved_gain_fraction"]) + "," + format_number(r["alpha_star"]) + "," +
         r["regime"].get<std::string>() + "," + o.method + "\n";
  }
  emit(s, o, out);
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const PoolConfig config = load_config(o.config_path);
  if (!(o.horizon > 0.0)) throw UsageError("--horizon must be positive");
  if (o.replications < 1) throw UsageError("--replications must be ≥ 1");
  const auto stats = simulate(sim_config(config, o));
  Options shown = o;
  shown.engine = "simulate";
  const json meta = meta_json(config, shown, "simulate");
  if (format_of(o, "json") == "json") {
    emit(json{{"meta", meta}, {"stats", to_json(stats)}}.dump(2) + "\n", o, out);
    return kOk;
  }
  std::vector<Row> rows;
  const double total = static_cast<double>(config.total_radio_servers());
  for (std::size_t v = 0; v < config.num_classes(); ++v) {
    const auto& e = stats.blocking_estimates[v];
    rows.push_back({config.compute_servers, config.compute_servers / total, v + 1, e.radio.value, e.compute.value,
                    e.overall.value, "simulate", config.pool_size()});
  }
  emit(rows_csv(meta, rows, false), o, out);
  return kOk;
}

}  // namespace

Range parse_range(const std::string& text) {
  std::vector<long> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      throw UsageError("bad range \"" + text + "\"");
    }
    if (used != item.size()) throw UsageError("bad range \"" + text + "\"");
    parts.push_back(v);
  }
  if (parts.size() < 2 || parts.size() > 3) throw UsageError("range must be LO:HI[:STEP], got \"" + text + "\"");
  Range r{parts[0], parts[1], parts.size() == 3 ? parts[2] : 1};
  if (r.step < 1 || r.lo > r.hi || r.lo < 1) throw UsageError("empty or invalid range \"" + text + "\"");
  return r;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blocking probabilities and pooling gains of virtual base station pools", "vbspool"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VBSPOOL_VERSION);
  Options o;
  std::string warmup_text;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON pool configuration")->required();
    sub->add_option("--out", o.out, "output file (default: standard output)");
    sub->add_option("--format", o.format, "csv or json");
    sub->add_option("--moments", o.moments, "single-VBS moments for the approximation: exact or closed-form");
    sub->add_option("--delta", o.delta, "knee tolerance on blocking");
  };
  auto sim_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--horizon", o.horizon, "measured simulated time per replication");
    sub->add_option("--warmup", warmup_text, "discarded simulated time (default 10 / min service rate)");
    sub->add_option("--replications", o.replications, "independent replications");
    sub->add_option("--service", o.service, "exponential, erlang2 or hyperexponential");
  };

  auto* blocking = app.add_subcommand("blocking", "blocking probabilities at the configured N");
  common(blocking);
  sim_flags(blocking);
  blocking->add_option("--engine", o.engine, "exact, recursive, approx or simulate");

  auto* sweep = app.add_subcommand("sweep", "sweep N or the pool size");
  common(sweep);
  sim_flags(sweep);
  sweep->add_option("--engine", o.engine, "comma-separated engines");
  sweep->add_option("--sweep-n", o.sweep_n, "LO:HI[:STEP] over compute servers");
  sweep->add_option("--sweep-pool", o.sweep_pool, "LO:HI[:STEP] multiplier on every class count and on N");

  auto* knee = app.add_subcommand("knee", "knee point and pooling gain");
  common(knee);
  knee->add_option("--method", o.method, "exact-search or approx");
  knee->add_option("--sweep-pool", o.sweep_pool, "LO:HI[:STEP] multiplier on every class count");

  auto* sim = app.add_subcommand("simulate", "discrete-event simulation");
  common(sim);
  sim_flags(sim);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (!warmup_text.empty()) {
      try {
        o.warmup = std::stod(warmup_text);
      } catch (const std::exception&) {
        throw UsageError("--warmup must be a number");
      }
    }
    if (blocking->parsed()) return cmd_blocking(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (knee->parsed()) return cmd_knee(o, out);
    return cmd_simulate(o, out);
  } catch (const ConfigError& e) {
    err << "vbspool: " << e.what() << "\n";
    return kConfigError;
  } catch (const UsageError& e) {
    err << "vbspool: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "vbspool: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "vbspool: " << e.what() << "\n";
    return kPreconditionFailed;
  }
}

}  // namespace vbspool::cli
