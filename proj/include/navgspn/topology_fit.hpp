#pragma once

// Reconstruction of enabling sets from observed sojourn times.
//
// For a state-machine net every tangible marking M_p has sojourn
// 1 / (sum of rates of the transitions leaving p). Given per-marking sojourn
// targets under several rate catalogs (clusters), this searches the rate
// symbols each marking must enable. Two stages:
//
//  1. per marking, exhaustive enumeration of symbol multisets (every
//     multiplicity <= max_multiplicity, required symbols present), scored by
//     the relative sojourn residual averaged over catalogs;
//  2. a global branch-and-bound assignment, one candidate per marking, such
//     that each constrained symbol is used exactly the required number of
//     times (the in-degree of the place it leads to). The objective is first
//     the number of (marking, catalog) residuals above tolerance, then the sum
//     of averaged residuals.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navgspn/error.hpp"
#include "navgspn/format.hpp"
#include "navgspn/gspn.hpp"

namespace navgspn {

struct SojournTarget {
  std::string marking;
  std::vector<double> seconds;  // one per catalog
};

struct FitProblem {
  std::vector<std::string> symbols;            // candidate symbols, output order
  std::vector<ParameterSet> catalogs;          // one per cluster
  std::vector<std::string> catalog_names;
  std::vector<SojournTarget> targets;
  std::map<std::string, unsigned> required_uses;  // symbol -> exact arc count
  std::vector<std::string> mandatory;          // symbols every marking enables
  unsigned max_multiplicity = 1;
  double tolerance = 0.02;        // per-catalog relative residual counted as a hit
  double ceiling = 0.02;          // assigned residual above this => irreconcilable
  std::size_t candidate_cap = 4096;  // per-marking candidates kept for stage 2
};

struct FitCandidate {
  std::vector<unsigned> multiplicity;  // per FitProblem::symbols
  std::vector<double> residuals;       // per catalog, relative
  double joint = 0.0;                  // mean of residuals
  unsigned misses = 0;                 // residuals above tolerance
};

struct MarkingFit {
  std::string marking;
  FitCandidate best;                       // unconstrained best
  std::vector<FitCandidate> near_best;     // within 2x of best joint residual, best first
  std::optional<FitCandidate> assigned;    // constrained assignment
  bool irreconcilable = false;
};

struct FitResult {
  std::vector<std::string> symbols;
  std::vector<std::string> catalog_names;
  std::vector<MarkingFit> markings;
  bool feasible = false;  // a constrained assignment exists
  unsigned total_misses = 0;
  std::size_t nodes_explored = 0;

  const MarkingFit& at(std::string_view marking) const {
    for (const auto& m : markings)
      if (m.marking == marking) return m;
    throw InputError("no marking '" + std::string(marking) + "' in fit result");
  }

  // "{theta, nu, mu}"; repeated symbols carry a "x2" suffix.
  std::string format(const FitCandidate& c) const {
    std::string s = "{";
    bool first = true;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (c.multiplicity[i] == 0) continue;
      if (!first) s += ", ";
      s += symbols[i];
      if (c.multiplicity[i] > 1) s += "x" + std::to_string(c.multiplicity[i]);
      first = false;
    }
    return s + "}";
  }

  std::set<std::string> symbol_set(const FitCandidate& c) const {
    std::set<std::string> out;
    for (std::size_t i = 0; i < symbols.size(); ++i)
      if (c.multiplicity[i]) out.insert(symbols[i]);
    return out;
  }
};

namespace detail {

inline FitCandidate score_candidate(const FitProblem& p, const std::vector<std::vector<double>>& rates,
                                    const SojournTarget& t, std::vector<unsigned> mult) {
  FitCandidate c;
  c.multiplicity = std::move(mult);
  for (std::size_t k = 0; k < p.catalogs.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.symbols.size(); ++i) sum += c.multiplicity[i] * rates[k][i];
    const double st = sum > 0.0 ? 1.0 / sum : std::numeric_limits<double>::infinity();
    const double r = std::abs(st - t.seconds[k]) / t.seconds[k];
    c.residuals.push_back(r);
    c.joint += r;
    if (r > p.tolerance) ++c.misses;
  }
  c.joint /= static_cast<double>(p.catalogs.size());
  return c;
}

inline bool candidate_less(const FitCandidate& a, const FitCandidate& b) {
  if (a.joint != b.joint) return a.joint < b.joint;
  return a.multiplicity < b.multiplicity;
}

inline double stage2_cost(const FitCandidate& c) { return 1000.0 * c.misses + c.joint; }

}  // namespace detail

inline FitResult fit_enabling_sets(const FitProblem& p) {
  if (p.catalogs.empty()) throw InputError("topology fit needs at least one rate catalog");
  if (p.symbols.size() > 16) throw InputError("topology fit supports at most 16 candidate symbols");
  if (p.max_multiplicity < 1) throw InputError("max multiplicity must be at least 1");
  for (const auto& t : p.targets) {
    if (t.seconds.size() != p.catalogs.size())
      throw InputError("marking " + t.marking + " needs one sojourn target per catalog");
    for (double s : t.seconds)
      if (!(s > 0.0) || !std::isfinite(s)) throw InputError("marking " + t.marking + " has a nonpositive target");
  }

  const std::size_t ns = p.symbols.size();
  std::vector<std::vector<double>> rates(p.catalogs.size(), std::vector<double>(ns));
  for (std::size_t k = 0; k < p.catalogs.size(); ++k)
    for (std::size_t i = 0; i < ns; ++i) rates[k][i] = p.catalogs[k].at(p.symbols[i]);

  std::vector<bool> is_mandatory(ns, false);
  for (const auto& m : p.mandatory) {
    auto it = std::find(p.symbols.begin(), p.symbols.end(), m);
    if (it == p.symbols.end()) throw InputError("mandatory symbol '" + m + "' is not a candidate");
    is_mandatory[it - p.symbols.begin()] = true;
  }

  FitResult res;
  res.symbols = p.symbols;
  res.catalog_names = p.catalog_names;

  // Stage 1: exhaustive enumeration per marking (odometer over multiplicities).
  std::vector<std::vector<FitCandidate>> pools;
  for (const auto& t : p.targets) {
    std::vector<FitCandidate> all;
    std::vector<unsigned> mult(ns, 0);
    for (std::size_t i = 0; i < ns; ++i) mult[i] = is_mandatory[i] ? 1 : 0;
    while (true) {
      bool any = std::any_of(mult.begin(), mult.end(), [](unsigned m) { return m > 0; });
      if (any) all.push_back(detail::score_candidate(p, rates, t, mult));
      std::size_t i = 0;
      for (; i < ns; ++i) {
        if (mult[i] < p.max_multiplicity) {
          ++mult[i];
          break;
        }
        mult[i] = is_mandatory[i] ? 1 : 0;
      }
      if (i == ns) break;
    }
    if (all.empty()) throw InputError("no candidate enabling sets for " + t.marking);
    std::sort(all.begin(), all.end(), detail::candidate_less);

    // best and near_best are plain subsets; multisets only enter the assignment
    auto plain = [](const FitCandidate& c) {
      return std::all_of(c.multiplicity.begin(), c.multiplicity.end(), [](unsigned m) { return m <= 1; });
    };
    MarkingFit mf;
    mf.marking = t.marking;
    mf.best = *std::find_if(all.begin(), all.end(), plain);
    for (const auto& c : all) {
      if (!plain(c)) continue;
      if (c.joint > 2.0 * mf.best.joint && !(c.joint == mf.best.joint)) break;
      mf.near_best.push_back(c);
      if (mf.near_best.size() >= 64) break;
    }
    res.markings.push_back(std::move(mf));

    std::stable_sort(all.begin(), all.end(), [](const FitCandidate& a, const FitCandidate& b) {
      return detail::stage2_cost(a) < detail::stage2_cost(b);
    });
    if (all.size() > p.candidate_cap) all.resize(p.candidate_cap);
    pools.push_back(std::move(all));
  }

  // Stage 2: constrained assignment.
  std::vector<std::size_t> constrained;
  std::vector<unsigned> required(ns, 0);
  for (const auto& [sym, count] : p.required_uses) {
    auto it = std::find(p.symbols.begin(), p.symbols.end(), sym);
    if (it == p.symbols.end()) throw InputError("constrained symbol '" + sym + "' is not a candidate");
    const std::size_t i = it - p.symbols.begin();
    constrained.push_back(i);
    required[i] = count;
  }

  const std::size_t nm = pools.size();
  // search markings with the fewest cheap candidates first
  std::vector<std::size_t> order(nm);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::stage2_cost(pools[a].front()) > detail::stage2_cost(pools[b].front());
  });

  // suffix bounds over the search order
  std::vector<double> min_cost_after(nm + 1, 0.0);
  std::vector<std::vector<unsigned>> max_use_after(nm + 1, std::vector<unsigned>(ns, 0));
  std::vector<std::vector<unsigned>> min_use_after(nm + 1, std::vector<unsigned>(ns, 0));
  for (std::size_t d = nm; d-- > 0;) {
    const auto& pool = pools[order[d]];
    min_cost_after[d] = min_cost_after[d + 1] + detail::stage2_cost(pool.front());
    for (std::size_t i = 0; i < ns; ++i) {
      unsigned hi = 0, lo = std::numeric_limits<unsigned>::max();
      for (const auto& c : pool) {
        hi = std::max(hi, c.multiplicity[i]);
        lo = std::min(lo, c.multiplicity[i]);
      }
      max_use_after[d][i] = max_use_after[d + 1][i] + hi;
      min_use_after[d][i] = min_use_after[d + 1][i] + lo;
    }
  }

  std::vector<std::size_t> pick(nm), best_pick;
  std::vector<unsigned> used(ns, 0);
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t nodes = 0;
  constexpr std::size_t node_budget = 50'000'000;

  std::function<void(std::size_t, double)> search = [&](std::size_t d, double cost) {
    if (++nodes > node_budget) return;
    if (cost + min_cost_after[d] >= best_cost) return;
    for (auto i : constrained)
      if (used[i] + min_use_after[d][i] > required[i] || used[i] + max_use_after[d][i] < required[i]) return;
    if (d == nm) {
      best_cost = cost;
      best_pick = pick;
      return;
    }
    const auto& pool = pools[order[d]];
    for (std::size_t c = 0; c < pool.size(); ++c) {
      const double next = cost + detail::stage2_cost(pool[c]);
      if (next + min_cost_after[d + 1] >= best_cost) break;  // pool is cost-sorted
      for (std::size_t i = 0; i < ns; ++i) used[i] += pool[c].multiplicity[i];
      pick[order[d]] = c;
      search(d + 1, next);
      for (std::size_t i = 0; i < ns; ++i) used[i] -= pool[c].multiplicity[i];
    }
  };
  search(0, 0.0);
  res.nodes_explored = nodes;

  if (!best_pick.empty()) {
    res.feasible = true;
    for (std::size_t m = 0; m < nm; ++m) {
      auto& mf = res.markings[m];
      mf.assigned = pools[m][best_pick[m]];
      res.total_misses += mf.assigned->misses;
      mf.irreconcilable = std::any_of(mf.assigned->residuals.begin(), mf.assigned->residuals.end(),
                                      [&](double r) { return r > p.ceiling; });
    }
  } else {
    for (auto& mf : res.markings)
      mf.irreconcilable = std::any_of(mf.best.residuals.begin(), mf.best.residuals.end(),
                                      [&](double r) { return r > p.ceiling; });
  }
  return res;
}

inline std::string format_fit(const FitResult& r, OutputFormat f) {
  std::ostringstream os;
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f%%", 100.0 * v);
    return std::string(buf);
  };
  auto residual_list = [&](const FitCandidate& c) {
    std::string s;
    for (std::size_t k = 0; k < c.residuals.size(); ++k) {
      if (k) s += " ";
      s += (k < r.catalog_names.size() ? r.catalog_names[k] : "c" + std::to_string(k + 1)) + "=" + pct(c.residuals[k]);
    }
    return s;
  };
  switch (f) {
    case OutputFormat::json: {
      nlohmann::ordered_json j;
      j["feasible"] = r.feasible;
      j["total_misses"] = r.total_misses;
      auto cand = [&](const FitCandidate& c) {
        nlohmann::ordered_json o;
        auto syms = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < r.symbols.size(); ++i)
          for (unsigned k = 0; k < c.multiplicity[i]; ++k) syms.push_back(r.symbols[i]);
        o["symbols"] = syms;
        o["residuals"] = c.residuals;
        o["joint_residual"] = c.joint;
        return o;
      };
      auto& ms = j["markings"] = nlohmann::ordered_json::object();
      for (const auto& m : r.markings) {
        nlohmann::ordered_json o;
        o["best"] = cand(m.best);
        auto alts = nlohmann::ordered_json::array();
        for (const auto& c : m.near_best) alts.push_back(cand(c));
        o["near_best"] = alts;
        o["assigned"] = m.assigned ? cand(*m.assigned) : nlohmann::ordered_json();
        o["irreconcilable"] = m.irreconcilable;
        ms[m.marking] = o;
      }
      os << j.dump(2) << '\n';
      break;
    }
    case OutputFormat::csv:
      os << "marking,stage,symbols,joint_residual,irreconcilable\n";
      for (const auto& m : r.markings) {
        os << m.marking << ",best,\"" << r.format(m.best) << "\"," << detail::num(m.best.joint) << ','
           << (m.irreconcilable ? 1 : 0) << '\n';
        if (m.assigned)
          os << m.marking << ",assigned,\"" << r.format(*m.assigned) << "\"," << detail::num(m.assigned->joint)
             << ',' << (m.irreconcilable ? 1 : 0) << '\n';
      }
      break;
    case OutputFormat::text:
      os << "Per-marking best enabling sets (joint residual over " << r.catalog_names.size() << " catalogs)\n";
      for (const auto& m : r.markings) {
        os << "  " << m.marking << ": " << r.format(m.best) << "  joint " << pct(m.best.joint) << "  ["
           << residual_list(m.best) << "]\n";
        for (std::size_t i = 1; i < m.near_best.size(); ++i)
          os << "      also " << r.format(m.near_best[i]) << "  joint " << pct(m.near_best[i].joint) << '\n';
      }
      os << "\nConstrained assignment (exact arc counts): " << (r.feasible ? "feasible" : "infeasible") << '\n';
      for (const auto& m : r.markings) {
        if (!m.assigned) continue;
        os << "  " << m.marking << ": " << r.format(*m.assigned) << "  [" << residual_list(*m.assigned) << "]"
           << (m.irreconcilable ? "  IRRECONCILABLE" : "") << '\n';
      }
      if (r.feasible) os << "  residuals above tolerance: " << r.total_misses << '\n';
      break;
  }
  return os.str();
}

}  // namespace navgspn
