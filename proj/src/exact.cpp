#include "vbspool/exact.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "numeric.hpp"

namespace vbspool {

namespace {

// Streaming log-sum-exp with one exp per term.
class LogAccumulator {
 public:
  void add(double x) {
    if (x == detail::kNegInf) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  double value() const { return max_ == detail::kNegInf ? detail::kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = detail::kNegInf;
  double sum_ = 0.0;
};

struct Layout {
  std::vector<int> limit;                     // K of each entry
  std::vector<std::size_t> klass;             // class of each entry
  std::vector<std::vector<double>> log_w;     // per class, n = 0..K
  std::vector<std::size_t> first_entry;       // first entry of each class
};

Layout make_layout(const PoolConfig& config) {
  Layout layout;
  for (std::size_t v = 0; v < config.classes.size(); ++v) {
    const auto& c = config.classes[v];
    layout.first_entry.push_back(layout.limit.size());
    layout.log_w.push_back(single_vbs_weights(c).log_weights);
    for (int m = 0; m < c.count; ++m) {
      layout.limit.push_back(c.radio_servers);
      layout.klass.push_back(v);
    }
  }
  return layout;
}

// Sums log weights grouped by (class, occupancy) in a fixed order, so states
// that differ by a within-class permutation get bit-identical weights.
double symmetric_log_weight(const Layout& layout, const StateVector& state, std::vector<int>& hist) {
  double lw = 0.0;
  for (std::size_t v = 0; v < layout.log_w.size(); ++v) {
    const auto& w = layout.log_w[v];
    hist.assign(w.size(), 0);
    const std::size_t end = v + 1 < layout.first_entry.size() ? layout.first_entry[v + 1] : state.size();
    for (std::size_t i = layout.first_entry[v]; i < end; ++i) ++hist[static_cast<std::size_t>(state[i])];
    for (std::size_t n = 1; n < w.size(); ++n)
      if (hist[n] > 0) lw += hist[n] * w[n];
  }
  return lw;
}

template <typename Visit>
void enumerate_impl(const PoolConfig& config, const Layout& layout, std::uint64_t cap, Visit&& visit) {
  const std::uint64_t size = state_space_size(config);
  if (size > cap) throw EnumerationCapExceeded(size, cap);

  const std::size_t entries = layout.limit.size();
  const int budget = config.compute_servers;
  StateVector state(entries, 0);
  std::vector<int> used(entries + 1, 0);  // sessions in the prefix
  std::vector<int> hist;

  // Iterative odometer: the last entry varies fastest, giving lexicographic order.
  std::size_t pos = 0;
  while (true) {
    if (pos == entries) {
      visit(std::as_const(state), symmetric_log_weight(layout, state, hist), used[entries]);
      // advance
      std::size_t p = entries;
      while (p > 0) {
        --p;
        const int next = state[p] + 1;
        if (next <= layout.limit[p] && used[p] + next <= budget) {
          state[p] = next;
          used[p + 1] = used[p] + next;
          pos = p + 1;
          break;
        }
        state[p] = 0;
        if (p == 0) return;
      }
      if (pos <= p) return;
      continue;
    }
    state[pos] = 0;
    used[pos + 1] = used[pos];
    ++pos;
  }
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Exact:
      return "exact";
    case Method::Recursive:
      return "recursive";
    case Method::Approximate:
      return "approx";
    case Method::Simulated:
      return "simulate";
  }
  return "unknown";
}

EnumerationCapExceeded::EnumerationCapExceeded(std::uint64_t size, std::uint64_t cap)
    : std::runtime_error("state space has " +
                         (size == UINT64_MAX ? std::string("more than 1.8e19") : std::to_string(size)) +
                         " states, above the enumeration cap of " +
                         std::to_string(cap) + "; use the recursive engine"),
      size_(size),
      cap_(cap) {}

void for_each_state(const PoolConfig& config, const std::function<void(const StateVector&)>& visit,
                    std::uint64_t cap) {
  const Layout layout = make_layout(config);
  enumerate_impl(config, layout, cap, [&](const StateVector& s, double, int) { visit(s); });
}

std::vector<StateVector> enumerate_states(const PoolConfig& config, std::uint64_t cap) {
  std::vector<StateVector> out;
  for_each_state(config, [&](const StateVector& s) { out.push_back(s); }, cap);
  return out;
}

bool is_admissible(const PoolConfig& config, const StateVector& state) {
  const auto ranges = class_ranges(config);
  if (ranges.empty() || state.size() != ranges.back().end) return false;
  long total = 0;
  for (std::size_t v = 0; v < ranges.size(); ++v) {
    for (std::size_t i = ranges[v].begin; i < ranges[v].end; ++i) {
      if (state[i] < 0 || state[i] > config.classes[v].radio_servers) return false;
      total += state[i];
    }
  }
  return total <= config.compute_servers;
}

double unnormalized_log_weight(const PoolConfig& config, const StateVector& state) {
  if (!is_admissible(config, state)) throw std::invalid_argument("unnormalized_log_weight: inadmissible state");
  const Layout layout = make_layout(config);
  std::vector<int> hist;
  return symmetric_log_weight(layout, state, hist);
}

double StationaryDistribution::probability(const StateVector& state) const {
  const std::size_t i = index_of(state);
  return i < states.size() ? probabilities[i] : 0.0;
}

std::size_t StationaryDistribution::index_of(const StateVector& state) const {
  const auto it = std::lower_bound(states.begin(), states.end(), state);
  if (it == states.end() || *it != state) return states.size();
  return static_cast<std::size_t>(it - states.begin());
}

StationaryDistribution stationary_distribution(const PoolConfig& config, std::uint64_t cap) {
  const Layout layout = make_layout(config);
  StationaryDistribution dist;
  std::vector<double> log_weights;
  LogAccumulator total;
  enumerate_impl(config, layout, cap, [&](const StateVector& s, double lw, int) {
    dist.states.push_back(s);
    log_weights.push_back(lw);
    total.add(lw);
  });
  const double log_norm = total.value();
  dist.probabilities.resize(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i) dist.probabilities[i] = std::exp(log_weights[i] - log_norm);
  dist.zero_state_prob = std::exp(-log_norm);
  return dist;
}

BlockingReport blocking_exact(const PoolConfig& config, std::uint64_t cap) {
  const Layout layout = make_layout(config);
  const std::size_t num_classes = config.classes.size();
  const int budget = config.compute_servers;
  LogAccumulator total;
  LogAccumulator computational;
  std::vector<LogAccumulator> radio(num_classes);

  enumerate_impl(config, layout, cap, [&](const StateVector& s, double lw, int used) {
    total.add(lw);
    if (used == budget) {
      computational.add(lw);
      return;
    }
    // By within-class symmetry only the first VBS of each class is inspected.
    for (std::size_t v = 0; v < num_classes; ++v)
      if (s[layout.first_entry[v]] == config.classes[v].radio_servers) radio[v].add(lw);
  });

  const double log_norm = total.value();
  BlockingReport report;
  report.method = Method::Exact;
  report.computational = std::exp(computational.value() - log_norm);
  for (std::size_t v = 0; v < num_classes; ++v) {
    const double pr = std::exp(radio[v].value() - log_norm);
    report.per_class_radio.push_back(pr);
    report.per_class_overall.push_back(pr + report.computational);
  }
  return report;
}

std::vector<double> total_occupancy_marginal(const StationaryDistribution& dist) {
  std::vector<double> marginal;
  for (std::size_t i = 0; i < dist.states.size(); ++i) {
    long total = 0;
    for (int u : dist.states[i]) total += u;
    if (static_cast<std::size_t>(total) >= marginal.size()) marginal.resize(total + 1, 0.0);
    marginal[total] += dist.probabilities[i];
  }
  return marginal;
}

RateFunction pool_rates(const PoolConfig& config) {
  std::vector<std::size_t> klass;
  for (std::size_t v = 0; v < config.classes.size(); ++v)
    for (int m = 0; m < config.classes[v].count; ++m) klass.push_back(v);
  return [config, klass](const StateVector& from, std::size_t entry, int direction) {
    const ClassSpec& spec = config.classes[klass[entry]];
    return direction > 0 ? spec.arrival_rate : service_rate(spec, from[entry]);
  };
}

BalanceCheck check_local_balance(const PoolConfig& config, double tolerance) {
  return check_local_balance(config, stationary_distribution(config), tolerance);
}

BalanceCheck check_local_balance(const PoolConfig& config, const StationaryDistribution& dist, double tolerance) {
  const RateFunction rates = pool_rates(config);
  BalanceCheck result;
  StateVector up;
  for (std::size_t i = 0; i < dist.states.size(); ++i) {
    const StateVector& s = dist.states[i];
    for (std::size_t e = 0; e < s.size(); ++e) {
      up = s;
      ++up[e];
      if (!is_admissible(config, up)) continue;
      const double p_up = dist.probability(up);
      const double residual = std::abs(dist.probabilities[i] * rates(s, e, +1) - p_up * rates(up, e, -1));
      result.worst_residual = std::max(result.worst_residual, residual);
    }
  }
  result.holds = result.worst_residual <= tolerance;
  return result;
}

CycleProducts cycle_rate_products(const std::vector<StateVector>& loop, const RateFunction& rates) {
  CycleProducts p;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const StateVector& a = loop[k];
    const StateVector& b = loop[(k + 1) % loop.size()];
    std::size_t entry = a.size();
    int direction = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const int d = b[i] - a[i];
      if (d == 0) continue;
      if (entry != a.size() || std::abs(d) != 1)
        throw std::invalid_argument("cycle_rate_products: consecutive states are not neighbours");
      entry = i;
      direction = d;
    }
    if (entry == a.size()) throw std::invalid_argument("cycle_rate_products: repeated state in loop");
    p.forward *= rates(a, entry, direction);
    p.reverse *= rates(b, entry, -direction);
  }
  return p;
}

CycleCheck check_kolmogorov_cycles(const PoolConfig& config, std::size_t num_cycles, std::uint64_t seed) {
  return check_kolmogorov_cycles(config, num_cycles, seed, pool_rates(config));
}

CycleCheck check_kolmogorov_cycles(const PoolConfig& config, std::size_t num_cycles, std::uint64_t seed,
                                   const RateFunction& rates) {
  const Layout layout = make_layout(config);
  const std::size_t entries = layout.limit.size();
  const int budget = config.compute_servers;
  std::mt19937_64 rng(seed);

  auto total_of = [](const StateVector& s) {
    long t = 0;
    for (int u : s) t += u;
    return t;
  };
  // All admissible single-entry moves out of s.
  auto moves = [&](const StateVector& s, std::vector<std::pair<std::size_t, int>>& out) {
    out.clear();
    const long t = total_of(s);
    for (std::size_t i = 0; i < entries; ++i) {
      if (s[i] > 0) out.emplace_back(i, -1);
      if (s[i] < layout.limit[i] && t < budget) out.emplace_back(i, +1);
    }
  };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  CycleCheck check;
  std::vector<std::pair<std::size_t, int>> options;
  StateVector start(entries, 0);
  for (std::size_t c = 0; c < num_cycles; ++c) {
    // Wander to a fresh starting point, then walk away and come back by a
    // different route: all decrements first, then all increments, in a
    // shuffled order. Every intermediate state stays admissible.
    for (int burn = 0; burn < 8; ++burn) {
      moves(start, options);
      if (options.empty()) break;
      const auto [i, d] = options[pick(options.size())];
      start[i] += d;
    }
    std::vector<StateVector> loop{start};
    StateVector cur = start;
    const std::size_t walk = 2 + pick(12);
    for (std::size_t step = 0; step < walk; ++step) {
      moves(cur, options);
      if (options.empty()) break;
      const auto [i, d] = options[pick(options.size())];
      cur[i] += d;
      loop.push_back(cur);
    }
    std::vector<std::size_t> down, up;
    for (std::size_t i = 0; i < entries; ++i) {
      for (int k = start[i]; k < cur[i]; ++k) down.push_back(i);
      for (int k = cur[i]; k < start[i]; ++k) up.push_back(i);
    }
    std::shuffle(down.begin(), down.end(), rng);
    std::shuffle(up.begin(), up.end(), rng);
    for (std::size_t i : down) {
      --cur[i];
      loop.push_back(cur);
    }
    for (std::size_t i : up) {
      ++cur[i];
      loop.push_back(cur);
    }
    loop.pop_back();  // == start
    if (loop.size() < 2) continue;

    // Compare in the log domain; long loops can overflow the raw products.
    double log_forward = 0.0, log_reverse = 0.0;
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const StateVector& a = loop[k];
      const StateVector& b = loop[(k + 1) % loop.size()];
      std::size_t entry = 0;
      while (a[entry] == b[entry]) ++entry;
      const int direction = b[entry] - a[entry];
      log_forward += std::log(rates(a, entry, direction));
      log_reverse += std::log(rates(b, entry, -direction));
    }
    const double rel = std::abs(std::expm1(log_forward - log_reverse));
    check.worst_relative = std::max(check.worst_relative, rel);
    ++check.cycles;
  }
  check.holds = check.worst_relative <= kCycleTolerance;
  return check;
}

}  // namespace vbspool
