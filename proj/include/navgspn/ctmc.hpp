#pragma once

// Absorbing-CTMC analysis over a tangible graph: generator, embedded jump
// chain, sojourn times, occupancy before absorption, expected visits and
// cumulative sojourn.
//
// Self-loop convention: a timed self-loop counts towards the exit rate used
// for sojourn times and keeps its p_ii in the jump chain (each firing is a new
// visit), but cancels in the generator. Under this convention the occupancy x
// equals visits * sojourn element-wise.

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navgspn/error.hpp"
#include "navgspn/format.hpp"
#include "navgspn/linalg.hpp"
#include "navgspn/reachability.hpp"

namespace navgspn {

inline constexpr std::size_t kDenseStateLimit = 10'000;

struct Ctmc {
  std::vector<std::string> labels;
  std::vector<bool> absorbing;
  Matrix generator;          // Q, 1/second
  std::vector<double> initial;

  std::size_t size() const { return labels.size(); }
  std::vector<std::size_t> transient_states() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < size(); ++i)
      if (!absorbing[i]) idx.push_back(i);
    return idx;
  }
};

struct EmbeddedDtmc {
  std::vector<std::string> labels;
  std::vector<bool> absorbing;
  Matrix transition;  // Pi, row-stochastic, absorbing rows are identity rows
  std::vector<double> initial;

  std::size_t size() const { return labels.size(); }
};

namespace detail {
inline void check_dense_size(std::size_t n) {
  if (n > kDenseStateLimit)
    throw InputError("state space of " + std::to_string(n) + " exceeds the dense solver limit of " +
                     std::to_string(kDenseStateLimit));
}
}  // namespace detail

inline Ctmc build_ctmc(const TangibleGraph& g) {
  detail::check_dense_size(g.size());
  Ctmc c;
  c.generator = Matrix(g.size(), g.size());
  c.initial = g.initial;
  for (const auto& s : g.states) {
    c.labels.push_back(s.label);
    c.absorbing.push_back(s.absorbing);
  }
  for (const auto& e : g.edges)
    if (e.source != e.target) c.generator(e.source, e.target) += e.rate;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (j != i) row += c.generator(i, j);
    c.generator(i, i) = -row;
  }
  return c;
}

inline EmbeddedDtmc build_embedded_dtmc(const TangibleGraph& g) {
  detail::check_dense_size(g.size());
  EmbeddedDtmc d;
  d.transition = Matrix(g.size(), g.size());
  d.initial = g.initial;
  for (const auto& s : g.states) {
    d.labels.push_back(s.label);
    d.absorbing.push_back(s.absorbing);
  }
  std::vector<double> exit(g.size(), 0.0);
  for (const auto& e : g.edges) exit[e.source] += e.rate;
  for (const auto& e : g.edges) d.transition(e.source, e.target) += e.rate / exit[e.source];
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.states[i].absorbing) d.transition(i, i) = 1.0;
  return d;
}

inline double unbounded() { return std::numeric_limits<double>::infinity(); }

// ST_i = 1 / (sum of enabled rates, self-loops included). Absorbing states
// map to +infinity.
inline std::vector<double> sojourn_times(const TangibleGraph& g) {
  std::vector<double> exit(g.size(), 0.0);
  for (const auto& e : g.edges) exit[e.source] += e.rate;
  std::vector<double> st(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.states[i].absorbing) {
      st[i] = unbounded();
    } else if (!(exit[i] > 0.0)) {
      throw NumericalError("transient state " + g.states[i].label + " has zero total rate");
    } else {
      st[i] = 1.0 / exit[i];
    }
  }
  return st;
}

namespace detail {

// Every transient state must reach some absorbing state.
template <class AdjacencyTest>
void require_absorption(std::size_t n, const std::vector<bool>& absorbing, AdjacencyTest edge,
                        const std::vector<std::string>& labels) {
  std::vector<bool> good(absorbing);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (good[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (good[j] && edge(i, j)) {
          good[i] = changed = true;
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!good[i]) throw NumericalError("no absorption: state " + labels[i] + " cannot reach an absorbing state");
}

}  // namespace detail

struct LinearSolution {
  std::vector<double> values;  // full state length, absorbing entries 0
  double residual = 0.0;       // ||x A - b||_inf on the transient restriction
};

// Solves x Q^N = -pi(0)^N. x_i is the expected total time in transient state
// i before absorption.
inline LinearSolution time_to_absorption(const Ctmc& c) {
  const auto idx = c.transient_states();
  detail::require_absorption(
      c.size(), c.absorbing, [&](std::size_t i, std::size_t j) { return i != j && c.generator(i, j) > 0.0; },
      c.labels);
  LinearSolution out{std::vector<double>(c.size(), 0.0), 0.0};
  if (idx.empty()) return out;

  const Matrix qn = c.generator.submatrix(idx);
  std::vector<double> rhs(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) rhs[k] = -c.initial[idx[k]];
  LuDecomposition lu(qn.transposed());
  if (lu.singular()) throw NumericalError("no absorption: restricted generator is singular");
  const auto x = lu.solve(rhs);

  const auto lhs = left_multiply(x, qn);
  for (std::size_t k = 0; k < idx.size(); ++k) out.residual = std::max(out.residual, std::abs(lhs[k] - rhs[k]));
  for (std::size_t k = 0; k < idx.size(); ++k) out.values[idx[k]] = x[k];
  return out;
}

// Solves n (I - Pi*) = pi*(0) over transient states.
inline LinearSolution expected_visits(const EmbeddedDtmc& d, std::span<const double> initial) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!d.absorbing[i]) idx.push_back(i);
  detail::require_absorption(
      d.size(), d.absorbing, [&](std::size_t i, std::size_t j) { return i != j && d.transition(i, j) > 0.0; },
      d.labels);
  LinearSolution out{std::vector<double>(d.size(), 0.0), 0.0};
  if (idx.empty()) return out;

  Matrix a = d.transition.submatrix(idx);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = (i == j ? 1.0 : 0.0) - a(i, j);
  std::vector<double> rhs(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) rhs[k] = initial[idx[k]];
  LuDecomposition lu(a.transposed());
  if (lu.singular()) throw NumericalError("no absorption: I - Pi* is singular");
  const auto n = lu.solve(rhs);

  const auto lhs = left_multiply(n, a);
  for (std::size_t k = 0; k < idx.size(); ++k) out.residual = std::max(out.residual, std::abs(lhs[k] - rhs[k]));
  for (std::size_t k = 0; k < idx.size(); ++k) out.values[idx[k]] = n[k];
  return out;
}

inline LinearSolution expected_visits(const EmbeddedDtmc& d) { return expected_visits(d, d.initial); }

struct CumulativeSojourn {
  std::vector<double> sigma;
  double session_duration = 0.0;
};

// sigma_i = n_i * ST_i. Entries with zero visits contribute zero even when
// the sojourn is unbounded.
inline CumulativeSojourn cumulative_sojourn(std::span<const double> visits, std::span<const double> sojourn) {
  if (visits.size() != sojourn.size()) throw InputError("visit and sojourn vectors differ in length");
  CumulativeSojourn out;
  out.sigma.resize(visits.size());
  for (std::size_t i = 0; i < visits.size(); ++i) {
    out.sigma[i] = visits[i] == 0.0 ? 0.0 : visits[i] * sojourn[i];
    out.session_duration += out.sigma[i];
  }
  return out;
}

// pi Q = 0, sum(pi) = 1, for an irreducible chain.
inline std::vector<double> steady_state(const Ctmc& c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.absorbing[i])
      throw InputError("steady state meaningless: state " + c.labels[i] + " is absorbing");
  const std::size_t n = c.size();
  if (n == 0) return {};
  Matrix a = c.generator;
  for (std::size_t i = 0; i < n; ++i) a(i, n - 1) = 1.0;
  std::vector<double> rhs(n, 0.0);
  rhs[n - 1] = 1.0;
  LuDecomposition lu(a.transposed());
  if (lu.singular()) throw NumericalError("steady state not unique: chain is reducible");
  return lu.solve(rhs);
}

// All four measures for a tangible graph, one row per state.
struct TransientMeasures {
  struct Row {
    std::string marking;
    bool absorbing = false;
    double sojourn = 0.0;      // seconds per visit, +inf for absorbing
    double occupancy = 0.0;    // seconds before absorption
    double visits = 0.0;       // absorbing rows: absorption probability
    double cumulative = 0.0;   // seconds
  };
  std::vector<Row> rows;
  double session_duration = 0.0;
  double occupancy_residual = 0.0;
  double visits_residual = 0.0;

  const Row& at(std::string_view marking) const {
    for (const auto& r : rows)
      if (r.marking == marking) return r;
    throw InputError("no marking '" + std::string(marking) + "' in measures");
  }
};

inline TransientMeasures analyze(const TangibleGraph& g) {
  const auto ctmc = build_ctmc(g);
  const auto dtmc = build_embedded_dtmc(g);
  const auto st = sojourn_times(g);
  const auto x = time_to_absorption(ctmc);
  const auto n = expected_visits(dtmc);

  // Visits to an absorbing state = probability of ending there.
  std::vector<double> absorbed(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.states[i].absorbing) absorbed[i] = g.initial[i];
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.states[i].absorbing) continue;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.states[j].absorbing) absorbed[j] += n.values[i] * dtmc.transition(i, j);
  }

  TransientMeasures m;
  m.occupancy_residual = x.residual;
  m.visits_residual = n.residual;
  for (std::size_t i = 0; i < g.size(); ++i) {
    TransientMeasures::Row r;
    r.marking = g.states[i].label;
    r.absorbing = g.states[i].absorbing;
    r.sojourn = st[i];
    if (r.absorbing) {
      r.visits = absorbed[i];
      r.occupancy = r.cumulative = absorbed[i] > 0.0 ? unbounded() : 0.0;
    } else {
      r.occupancy = x.values[i];
      r.visits = n.values[i];
      r.cumulative = r.visits * r.sojourn;
      m.session_duration += r.cumulative;
    }
    m.rows.push_back(std::move(r));
  }
  return m;
}


inline std::string format_measures(const TransientMeasures& m, OutputFormat f) {
  std::ostringstream os;
  switch (f) {
    case OutputFormat::csv:
      os << "marking,sojourn_s,occupancy_s,visits,cumulative_s\n";
      for (const auto& r : m.rows)
        os << r.marking << ',' << detail::num(r.sojourn) << ',' << detail::num(r.occupancy) << ','
           << detail::num(r.visits) << ',' << detail::num(r.cumulative) << '\n';
      break;
    case OutputFormat::json: {
      nlohmann::ordered_json j;
      auto& rows = j["markings"] = nlohmann::ordered_json::object();
      for (const auto& r : m.rows)
        rows[r.marking] = {{"absorbing", r.absorbing},
                           {"sojourn_s", detail::json_num(r.sojourn)},
                           {"occupancy_s", detail::json_num(r.occupancy)},
                           {"visits", detail::json_num(r.visits)},
                           {"cumulative_s", detail::json_num(r.cumulative)}};
      j["session_duration_s"] = m.session_duration;
      os << j.dump(2) << '\n';
      break;
    }
    case OutputFormat::text: {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-12s %14s %16s %12s %16s\n", "Marking", "Sojourn [s]", "Occupancy [s]",
                    "Visits", "Cumulative [s]");
      os << buf;
      for (const auto& r : m.rows) {
        std::snprintf(buf, sizeof buf, "%-12s %14s %16s %12s %16s\n", r.marking.c_str(),
                      detail::num(r.sojourn, "%.2f").c_str(), detail::num(r.occupancy, "%.2f").c_str(),
                      detail::num(r.visits, "%.6f").c_str(), detail::num(r.cumulative, "%.2f").c_str());
        os << buf;
      }
      std::snprintf(buf, sizeof buf, "Session duration: %.2f s (%.2f min)\n", m.session_duration,
                    m.session_duration / 60.0);
      os << buf;
      break;
    }
  }
  return os.str();
}

}  // namespace navgspn
