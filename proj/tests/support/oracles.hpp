#pragma once

// Reference computations written independently of the library code paths.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "navgspn/gspn.hpp"
#include "navgspn/reachability.hpp"

namespace oracle {

using navgspn::GspnModel;
using Tokens = std::map<std::string, unsigned>;  // place name -> count, zeros dropped

inline bool enabled(const navgspn::Transition& t, const Tokens& m) {
  for (const auto& a : t.inputs) {
    auto it = m.find(a.place);
    if (it == m.end() || it->second < a.multiplicity) return false;
  }
  return true;
}

inline Tokens fire(const navgspn::Transition& t, Tokens m) {
  for (const auto& a : t.inputs)
    if ((m[a.place] -= a.multiplicity) == 0) m.erase(a.place);
  for (const auto& a : t.outputs) m[a.place] += a.multiplicity;
  return m;
}

inline double value(const navgspn::Transition& t) { return std::get<double>(t.rate); }

// Immediate transitions of the top priority level enabled in m.
inline std::vector<const navgspn::Transition*> immediates(const GspnModel& model, const Tokens& m) {
  unsigned top = 0;
  for (const auto& t : model.transitions)
    if (!t.timed() && enabled(t, m)) top = std::max(top, t.priority);
  std::vector<const navgspn::Transition*> out;
  for (const auto& t : model.transitions)
    if (!t.timed() && enabled(t, m) && t.priority == top) out.push_back(&t);
  return out;
}

// Walks every immediate firing path out of m, accumulating probability mass
// on the non-vanishing markings where paths end.
inline void expand(const GspnModel& model, const Tokens& m, double prob, std::map<Tokens, double>& out) {
  const auto imm = immediates(model, m);
  if (imm.empty()) {
    out[m] += prob;
    return;
  }
  double total = 0.0;
  for (const auto* t : imm) total += value(*t);
  for (const auto* t : imm) expand(model, fire(*t, m), prob * value(*t) / total, out);
}

inline Tokens tokens(const navgspn::Net& net, const navgspn::Marking& m) {
  Tokens t;
  for (std::size_t p = 0; p < m.tokens.size(); ++p)
    if (m.tokens[p]) t[net.place(p).name] = m.tokens[p];
  return t;
}

// (source, target) -> aggregated rate between non-vanishing markings, for
// every tangible marking of the graph (literal rates only).
inline std::map<std::pair<Tokens, Tokens>, double> tangible_rates(const GspnModel& model,
                                                                   const std::vector<Tokens>& tangible) {
  std::map<std::pair<Tokens, Tokens>, double> out;
  for (const auto& s : tangible) {
    for (const auto& t : model.transitions) {
      if (!t.timed() || !enabled(t, s)) continue;
      std::map<Tokens, double> ends;
      expand(model, fire(t, s), 1.0, ends);
      for (const auto& [target, p] : ends) out[{s, target}] += value(t) * p;
    }
  }
  return out;
}

// Dense Gauss-Jordan inverse, no pivoting tricks beyond row swaps.
inline std::vector<std::vector<double>> inverse(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Occupancy and visits of a tangible graph from the fundamental matrix:
// x = pi0 (-Q_T)^-1, n = pi0 (I - P_T)^-1 with self-loops kept in P.
struct Absorption {
  std::vector<double> occupancy, visits;  // over transient states, graph order
  std::vector<std::size_t> transient;
};

inline Absorption absorption(const navgspn::TangibleGraph& g) {
  Absorption r;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!g.states[i].absorbing) r.transient.push_back(i);
  const std::size_t n = r.transient.size();
  std::vector<std::size_t> pos(g.size(), n);
  for (std::size_t k = 0; k < n; ++k) pos[r.transient[k]] = k;

  std::vector<double> out(g.size(), 0.0);
  for (const auto& e : g.edges) out[e.source] += e.rate;
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0)), ip(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) ip[k][k] = 1.0;
  for (const auto& e : g.edges) {
    const auto s = pos[e.source], t = pos[e.target];
    if (s == n) continue;
    if (e.source != e.target) {
      q[s][s] -= e.rate;
      if (t < n) q[s][t] += e.rate;
    }
    if (t < n) ip[s][t] -= e.rate / out[e.source];
  }
  for (auto& row : q)
    for (auto& x : row) x = -x;
  const auto nq = inverse(q), np = inverse(ip);
  r.occupancy.assign(n, 0.0);
  r.visits.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      r.occupancy[b] += g.initial[r.transient[a]] * nq[a][b];
      r.visits[b] += g.initial[r.transient[a]] * np[a][b];
    }
  return r;
}

// Largest relative difference between the eliminated tangible graph and
// brute-force path enumeration, over all (source, target) pairs and the
// initial distribution.
inline double elimination_error(const GspnModel& model, std::size_t limit = 100000) {
  const auto net = navgspn::Net::compile(model);
  const auto g = navgspn::tangible_graph(net, navgspn::ParameterSet{}, limit);

  std::vector<Tokens> tangible;
  for (const auto& s : g.states)
    if (!s.absorbing) tangible.push_back(tokens(net, s.marking));
  const auto expect = tangible_rates(model, tangible);

  std::map<std::pair<Tokens, Tokens>, double> got;
  for (const auto& e : g.edges) got[{tokens(net, g.states[e.source].marking), tokens(net, g.states[e.target].marking)}] += e.rate;

  double worst = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  if (got.size() != expect.size()) return std::numeric_limits<double>::infinity();
  for (const auto& [k, v] : expect) {
    auto it = got.find(k);
    if (it == got.end()) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, rel(it->second, v));
  }

  std::map<Tokens, double> init;
  expand(model, tokens(net, net.initial_marking()), 1.0, init);
  for (const auto& [m, p] : init) {
    double q = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (tokens(net, g.states[i].marking) == m) q += g.initial[i];
    worst = std::max(worst, rel(q, p));
  }
  return worst;
}

}  // namespace oracle
