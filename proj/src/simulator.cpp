#include "vbspool/simulator.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "vbspool/parallel.hpp"

namespace vbspool {

const char* to_string(ServiceLaw s) {
  switch (s) {
    case ServiceLaw::Exponential:
      return "exponential";
    case ServiceLaw::Erlang2:
      return "erlang2";
    case ServiceLaw::Hyperexponential:
      break;
  }
  return "hyperexponential";
}

double default_warmup(const PoolConfig& pool) {
  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& c : pool.classes) slowest = std::min(slowest, c.service_rate);
  return 10.0 / slowest;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // 53 random bits in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
};

struct Session {
  std::size_t vbs;
  std::size_t cls;
  int phase;
  double rate;
};

class Simulation {
 public:
  Simulation(const SimConfig& cfg, std::uint64_t seed) : cfg_(cfg), pool_(cfg.pool), rng_(seed) {
    const std::size_t v_count = pool_.num_classes();
    for (std::size_t v = 0; v < v_count; ++v) {
      first_vbs_.push_back(occupancy_.size());
      occupancy_.resize(occupancy_.size() + pool_.classes[v].count, 0);
      for (int m = 0; m < pool_.classes[v].count; ++m) class_of_.push_back(v);
      arrival_rate_ += pool_.classes[v].count * pool_.classes[v].arrival_rate;
    }
    class_sessions_.resize(v_count);
    nonempty_.resize(v_count);
    nonempty_pos_.assign(occupancy_.size(), npos);
    stats_.seed = seed;
    stats_.offered.assign(v_count, 0);
    stats_.blocked_radio.assign(v_count, 0);
    stats_.blocked_compute.assign(v_count, 0);
    stats_.admitted.assign(v_count, 0);
    stats_.departed.assign(v_count, 0);
    stats_.final_occupancy.assign(v_count, 0);
    stats_.occupancy_time.assign(static_cast<std::size_t>(std::min<long>(pool_.compute_servers,
                                                                         pool_.total_radio_servers())) + 1,
                                 0.0);
    warmup_ = cfg.warmup_time ? *cfg.warmup_time : default_warmup(pool_);
    end_ = warmup_ + cfg.horizon_time;
  }

  ReplicationStats run() {
    double now = 0.0;
    while (true) {
      const double rate = arrival_rate_ + departure_rate();
      const double next = now + rng_.exponential(rate);
      accumulate(now, std::min(next, end_));
      if (next >= end_) break;
      now = next;
      ++stats_.events;
      double pick = rng_.uniform() * rate;
      if (pick < arrival_rate_)
        arrive(pick, now >= warmup_);
      else
        depart(pick - arrival_rate_);
    }
    for (std::size_t i = 0; i < occupancy_.size(); ++i) stats_.final_occupancy[class_of_[i]] += occupancy_[i];
    stats_.measured_time = cfg_.horizon_time;
    double busy = 0.0;
    for (std::size_t n = 0; n < stats_.occupancy_time.size(); ++n) busy += n * stats_.occupancy_time[n];
    stats_.mean_utilization =
        stats_.measured_time > 0.0 ? busy / (stats_.measured_time * pool_.compute_servers) : 0.0;
    return std::move(stats_);
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool exponential() const { return cfg_.service == ServiceLaw::Exponential; }
  bool shared(std::size_t v) const { return pool_.classes[v].discipline == Discipline::SharedCapacity; }

  double session_rate(const Session& s) const {
    return shared(s.cls) ? s.rate / occupancy_[s.vbs] : s.rate;
  }

  double class_departure_rate(std::size_t v) const {
    const double mu = pool_.classes[v].service_rate;
    return shared(v) ? mu * static_cast<double>(nonempty_[v].size())
                     : mu * static_cast<double>(class_sessions_[v].size());
  }

  double departure_rate() const {
    double r = 0.0;
    if (exponential()) {
      for (std::size_t v = 0; v < pool_.num_classes(); ++v) r += class_departure_rate(v);
    } else {
      for (const auto& s : sessions_) r += session_rate(s);
    }
    return r;
  }

  void accumulate(double from, double to) {
    const double lo = std::max(from, warmup_);
    if (to > lo) stats_.occupancy_time[static_cast<std::size_t>(total_)] += to - lo;
  }

  void arrive(double pick, bool measured) {
    std::size_t v = 0;
    for (; v + 1 < pool_.num_classes(); ++v) {
      const double r = pool_.classes[v].count * pool_.classes[v].arrival_rate;
      if (pick < r) break;
      pick -= r;
    }
    const std::size_t vbs = first_vbs_[v] + rng_.index(static_cast<std::size_t>(pool_.classes[v].count));
    if (measured) ++stats_.offered[v];
    if (total_ == pool_.compute_servers) {
      if (measured) ++stats_.blocked_compute[v];
      return;
    }
    if (occupancy_[vbs] == pool_.classes[v].radio_servers) {
      if (measured) ++stats_.blocked_radio[v];
      return;
    }
    ++stats_.admitted[v];
    ++total_;
    if (++occupancy_[vbs] == 1 && shared(v)) {
      nonempty_pos_[vbs] = nonempty_[v].size();
      nonempty_[v].push_back(vbs);
    }
    if (exponential()) {
      if (!shared(v)) class_sessions_[v].push_back(vbs);
      return;
    }
    const double mu = pool_.classes[v].service_rate;
    Session s{vbs, v, 0, mu};
    if (cfg_.service == ServiceLaw::Erlang2) {
      s.rate = 2.0 * mu;
    } else {
      const double p1 = 0.5 * (1.0 + std::sqrt((kHyperexpScv - 1.0) / (kHyperexpScv + 1.0)));
      const bool first = rng_.uniform() < p1;
      const double p = first ? p1 : 1.0 - p1;
      s.rate = 2.0 * p * mu;
    }
    sessions_.push_back(s);
  }

  void remove_from_vbs(std::size_t vbs) {
    const std::size_t v = class_of_[vbs];
    --total_;
    ++stats_.departed[v];
    if (--occupancy_[vbs] == 0 && shared(v)) {
      auto& list = nonempty_[v];
      const std::size_t pos = nonempty_pos_[vbs];
      list[pos] = list.back();
      nonempty_pos_[list[pos]] = pos;
      list.pop_back();
      nonempty_pos_[vbs] = npos;
    }
  }

  void depart(double pick) {
    if (exponential()) {
      std::size_t v = 0;
      for (; v + 1 < pool_.num_classes(); ++v) {
        const double r = class_departure_rate(v);
        if (pick < r) break;
        pick -= r;
      }
      // Rounding can land the pick on a class with nothing to serve.
      while (class_departure_rate(v) == 0.0) v = v == 0 ? pool_.num_classes() - 1 : v - 1;
      if (shared(v)) {
        remove_from_vbs(nonempty_[v][rng_.index(nonempty_[v].size())]);
      } else {
        auto& list = class_sessions_[v];
        const std::size_t i = rng_.index(list.size());
        const std::size_t vbs = list[i];
        list[i] = list.back();
        list.pop_back();
        remove_from_vbs(vbs);
      }
      return;
    }
    std::size_t i = 0;
    for (; i + 1 < sessions_.size(); ++i) {
      const double r = session_rate(sessions_[i]);
      if (pick < r) break;
      pick -= r;
    }
    Session& s = sessions_[i];
    if (cfg_.service == ServiceLaw::Erlang2 && s.phase == 0) {
      s.phase = 1;
      return;
    }
    const std::size_t vbs = s.vbs;
    sessions_[i] = sessions_.back();
    sessions_.pop_back();
    remove_from_vbs(vbs);
  }

  const SimConfig& cfg_;
  const PoolConfig& pool_;
  Rng rng_;
  double warmup_ = 0.0;
  double end_ = 0.0;
  double arrival_rate_ = 0.0;
  long total_ = 0;
  std::vector<int> occupancy_;
  std::vector<std::size_t> class_of_;
  std::vector<std::size_t> first_vbs_;
  std::vector<std::vector<std::size_t>> class_sessions_;  // one entry per session
  std::vector<std::vector<std::size_t>> nonempty_;
  std::vector<std::size_t> nonempty_pos_;
  std::vector<Session> sessions_;
  ReplicationStats stats_;
};

Estimate binomial(std::uint64_t hits, std::uint64_t trials) {
  Estimate e;
  if (trials == 0) return e;
  e.value = static_cast<double>(hits) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
  e.half_width = 1.959963984540054 * e.std_error;
  return e;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, int r) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(r)));
}

ReplicationStats simulate_replication(const SimConfig& cfg, std::uint64_t seed) {
  return Simulation(cfg, seed).run();
}

SimStats simulate(const SimConfig& cfg) {
  const PoolConfig pool = validate_config(cfg.pool);
  if (!(cfg.horizon_time >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  if (cfg.replications < 1) throw std::invalid_argument("replications must be ≥ 1");
  if (cfg.warmup_time && !(*cfg.warmup_time >= 0.0)) throw std::invalid_argument("warmup must be non-negative");

  SimStats out;
  out.seed = cfg.seed;
  out.warmup_time = cfg.warmup_time ? *cfg.warmup_time : default_warmup(pool);
  out.horizon_time = cfg.horizon_time;
  out.service = cfg.service;
  out.replications.resize(static_cast<std::size_t>(cfg.replications));
  parallel_for(out.replications.size(), [&](std::size_t r) {
    out.replications[r] = simulate_replication(cfg, replication_seed(cfg.seed, static_cast<int>(r)));
  });

  const std::size_t v_count = pool.num_classes();
  out.offered.assign(v_count, 0);
  out.blocked_radio.assign(v_count, 0);
  out.blocked_compute.assign(v_count, 0);
  out.occupancy_histogram.assign(out.replications.front().occupancy_time.size(), 0.0);
  double util = 0.0;
  for (const auto& rep : out.replications) {
    for (std::size_t v = 0; v < v_count; ++v) {
      out.offered[v] += rep.offered[v];
      out.blocked_radio[v] += rep.blocked_radio[v];
      out.blocked_compute[v] += rep.blocked_compute[v];
    }
    for (std::size_t n = 0; n < rep.occupancy_time.size(); ++n) out.occupancy_histogram[n] += rep.occupancy_time[n];
    out.measured_time += rep.measured_time;
    util += rep.mean_utilization * rep.measured_time;
  }
  if (out.measured_time > 0.0) {
    out.mean_utilization = util / out.measured_time;
    for (double& h : out.occupancy_histogram) h /= out.measured_time;
  }
  for (std::size_t v = 0; v < v_count; ++v) {
    out.blocking_estimates.push_back({binomial(out.blocked_radio[v], out.offered[v]),
                                      binomial(out.blocked_compute[v], out.offered[v]),
                                      binomial(out.blocked_radio[v] + out.blocked_compute[v], out.offered[v])});
  }
  return out;
}

double occupancy_check(const SimStats& stats, const std::vector<double>& marginal) {
  if (!(stats.measured_time > 0.0)) throw std::runtime_error("no samples");
  if (marginal.size() != stats.occupancy_histogram.size())
    throw std::invalid_argument("occupancy_check: marginal length does not match the simulated pool");
  double tv = 0.0;
  for (std::size_t n = 0; n < marginal.size(); ++n) tv += std::abs(marginal[n] - stats.occupancy_histogram[n]);
  return 0.5 * tv;
}

UtilizationEstimate utilization_estimate(const SimStats& stats, double confidence) {
  UtilizationEstimate u;
  u.replications = static_cast<int>(stats.replications.size());
  u.mean = stats.mean_utilization;
  if (u.replications < 2) {
    u.half_width = std::numeric_limits<double>::infinity();
    return u;
  }
  double mean = 0.0;
  for (const auto& r : stats.replications) mean += r.mean_utilization;
  mean /= u.replications;
  double ss = 0.0;
  for (const auto& r : stats.replications) ss += (r.mean_utilization - mean) * (r.mean_utilization - mean);
  const double sd = std::sqrt(ss / (u.replications - 1));
  const boost::math::students_t dist(u.replications - 1);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
  u.mean = mean;
  u.half_width = t * sd / std::sqrt(static_cast<double>(u.replications));
  return u;
}

}  // namespace vbspool
