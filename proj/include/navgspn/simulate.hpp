#pragma once

// Monte Carlo replay of the exponential race on a tangible graph. Used as an
// independent check on the analytic measures.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "navgspn/ctmc.hpp"
#include "navgspn/error.hpp"
#include "navgspn/random.hpp"
#include "navgspn/reachability.hpp"

namespace navgspn {

struct SimulationResult {
  struct Row {
    std::string marking;
    bool absorbing = false;
    double visits = 0.0, visits_se = 0.0;
    double occupancy = 0.0, occupancy_se = 0.0;
  };
  std::vector<Row> rows;
  double absorption_time = 0.0, absorption_time_se = 0.0;
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
  std::uint64_t truncated = 0;  // runs stopped by the step limit
};

namespace detail {
struct RunningStat {
  double sum = 0.0, sum_sq = 0.0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
  }
  double mean(double n) const { return sum / n; }
  // standard error of the mean, sample variance
  double se(double n) const {
    if (n < 2) return 0.0;
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};
}  // namespace detail

// Per-run generators are seeded with splitmix64(seed + run index), so the
// result depends on (seed, runs) only.
//
// Each run walks the jump chain; self-loop repeats are drawn in one go as a
// geometric count. Holding times are independent of the jump chain, so the
// total time in a state is drawn once per run as Gamma(visits, exit rate).
inline SimulationResult simulate(const TangibleGraph& g, std::span<const double> initial, std::uint64_t runs,
                                 std::uint64_t seed, std::uint64_t max_steps = 100'000'000) {
  if (runs < 1) throw InputError("simulate needs at least one run");
  if (initial.size() != g.size()) throw InputError("initial distribution has the wrong length");

  const std::size_t n = g.size();
  struct Jump {
    double log_self = 0.0;  // log of the self-loop probability, 0 if none
    std::vector<double> cumulative;  // over non-self edges, normalised
    std::vector<std::size_t> target;
  };
  std::vector<double> exit(n, 0.0), self(n, 0.0);
  for (const auto& e : g.edges) {
    exit[e.source] += e.rate;
    if (e.source == e.target) self[e.source] += e.rate;
  }
  std::vector<Jump> jump(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (g.states[i].absorbing) continue;
    if (!(exit[i] > 0.0)) throw NumericalError("transient state " + g.states[i].label + " has zero total rate");
    const double away = exit[i] - self[i];
    if (!(away > 0.0)) throw NumericalError("no absorption: state " + g.states[i].label + " only loops to itself");
    jump[i].log_self = self[i] > 0.0 ? std::log(self[i] / exit[i]) : 0.0;
    double acc = 0.0;
    for (const auto& e : g.edges) {
      if (e.source != i || e.target == i) continue;
      acc += e.rate / away;
      jump[i].cumulative.push_back(acc);
      jump[i].target.push_back(e.target);
    }
    jump[i].cumulative.back() = 1.0;
  }

  std::vector<detail::RunningStat> visits(n), occupancy(n);
  detail::RunningStat total;
  std::vector<std::uint64_t> run_visits(n);
  SimulationResult res;
  res.runs = runs;
  res.seed = seed;

  for (std::uint64_t r = 0; r < runs; ++r) {
    std::mt19937_64 rng(splitmix64(seed + r));
    std::fill(run_visits.begin(), run_visits.end(), 0);

    double u = detail::unit(rng), acc = 0.0;
    std::size_t s = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += initial[i];
      if (u < acc) {
        s = i;
        break;
      }
    }

    std::uint64_t steps = 0;
    while (!g.states[s].absorbing) {
      if (++steps > max_steps) {
        ++res.truncated;
        break;
      }
      const auto& j = jump[s];
      std::uint64_t k = 1;
      if (j.log_self < 0.0) k += static_cast<std::uint64_t>(std::floor(std::log1p(-detail::unit(rng)) / j.log_self));
      run_visits[s] += k;
      const double pick = detail::unit(rng);
      std::size_t e = 0;
      while (e + 1 < j.cumulative.size() && pick >= j.cumulative[e]) ++e;
      s = j.target[e];
    }

    double elapsed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double t = 0.0;
      if (run_visits[i] > 0) {
        std::gamma_distribution<double> hold(static_cast<double>(run_visits[i]), 1.0 / exit[i]);
        t = hold(rng);
      }
      visits[i].add(static_cast<double>(run_visits[i]));
      occupancy[i].add(t);
      elapsed += t;
    }
    total.add(elapsed);
  }

  const double nr = static_cast<double>(runs);
  for (std::size_t i = 0; i < n; ++i)
    res.rows.push_back({g.states[i].label, g.states[i].absorbing, visits[i].mean(nr), visits[i].se(nr),
                        occupancy[i].mean(nr), occupancy[i].se(nr)});
  res.absorption_time = total.mean(nr);
  res.absorption_time_se = total.se(nr);
  return res;
}

inline SimulationResult simulate(const TangibleGraph& g, std::uint64_t runs, std::uint64_t seed) {
  return simulate(g, g.initial, runs, seed);
}

inline std::string format_simulation(const SimulationResult& r, OutputFormat f) {
  std::ostringstream os;
  switch (f) {
    case OutputFormat::csv:
      os << "marking,visits,visits_se,occupancy_s,occupancy_se\n";
      for (const auto& row : r.rows)
        os << row.marking << ',' << detail::num(row.visits) << ',' << detail::num(row.visits_se) << ','
           << detail::num(row.occupancy) << ',' << detail::num(row.occupancy_se) << '\n';
      break;
    case OutputFormat::json: {
      nlohmann::ordered_json j;
      j["runs"] = r.runs;
      j["seed"] = r.seed;
      auto& rows = j["markings"] = nlohmann::ordered_json::object();
      for (const auto& row : r.rows)
        rows[row.marking] = {{"visits", row.visits},
                             {"visits_se", row.visits_se},
                             {"occupancy_s", row.occupancy},
                             {"occupancy_se", row.occupancy_se}};
      j["absorption_time_s"] = r.absorption_time;
      j["absorption_time_se"] = r.absorption_time_se;
      os << j.dump(2) << '\n';
      break;
    }
    case OutputFormat::text: {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-12s %12s %10s %16s %14s\n", "Marking", "Visits", "SE", "Occupancy [s]",
                    "SE");
      os << buf;
      for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%-12s %12.6f %10.6f %16.2f %14.2f\n", row.marking.c_str(), row.visits,
                      row.visits_se, row.occupancy, row.occupancy_se);
        os << buf;
      }
      std::snprintf(buf, sizeof buf, "Time to absorption: %.2f s (SE %.2f), %llu runs, seed %llu\n",
                    r.absorption_time, r.absorption_time_se, static_cast<unsigned long long>(r.runs),
                    static_cast<unsigned long long>(r.seed));
      os << buf;
      break;
    }
  }
  return os.str();
}

}  // namespace navgspn
