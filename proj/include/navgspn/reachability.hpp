#pragma once

// Reachability graph generation, marking classification and elimination of
// vanishing markings.

#include <cstdio>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "navgspn/error.hpp"
#include "navgspn/gspn.hpp"

namespace navgspn {

enum class MarkingClass { tangible, vanishing, absorbing };

inline const char* to_string(MarkingClass c) {
  switch (c) {
    case MarkingClass::tangible: return "tangible";
    case MarkingClass::vanishing: return "vanishing";
    case MarkingClass::absorbing: return "absorbing";
  }
  return "?";
}

inline MarkingClass classify_marking(const Net& net, const Marking& m) {
  auto enabled = enabled_transitions(net, m);
  if (enabled.empty()) return MarkingClass::absorbing;
  // after priority filtering the enabled set is homogeneous in kind
  return net.transition(enabled.front()).timed() ? MarkingClass::tangible : MarkingClass::vanishing;
}

using StateId = std::size_t;

struct ReachabilityGraph {
  struct State {
    Marking marking;
    MarkingClass cls;
  };
  struct Edge {
    StateId source;
    StateId target;
    TransitionId transition;
    double value;  // rate (timed) or branching probability (immediate)
  };

  std::vector<State> states;
  std::vector<Edge> edges;
  StateId initial = 0;

  std::size_t count(MarkingClass c) const {
    return static_cast<std::size_t>(
        std::count_if(states.begin(), states.end(), [c](const State& s) { return s.cls == c; }));
  }
};

inline constexpr std::size_t kDefaultStateLimit = 1'000'000;

// Deterministic BFS from the initial marking; transitions are explored in
// declaration order so state and edge numbering is canonical.
inline ReachabilityGraph build_reachability_graph(const Net& net, const ParameterSet& params,
                                                  std::size_t state_limit = kDefaultStateLimit) {
  ReachabilityGraph g;
  std::unordered_map<Marking, StateId, MarkingHash> index;
  std::deque<StateId> frontier;

  auto intern = [&](Marking m) -> StateId {
    auto it = index.find(m);
    if (it != index.end()) return it->second;
    if (g.states.size() >= state_limit)
      throw InputError("state-count limit of " + std::to_string(state_limit) +
                       " exceeded (net unbounded or too large)");
    const StateId id = g.states.size();
    auto cls = classify_marking(net, m);
    index.emplace(m, id);
    g.states.push_back({std::move(m), cls});
    frontier.push_back(id);
    return id;
  };

  g.initial = intern(net.initial_marking());
  while (!frontier.empty()) {
    const StateId s = frontier.front();
    frontier.pop_front();
    const Marking current = g.states[s].marking;
    const auto enabled = enabled_transitions(net, current);
    double weight_sum = 0.0;
    if (g.states[s].cls == MarkingClass::vanishing)
      for (auto t : enabled) weight_sum += net.rate(t, params);
    for (auto t : enabled) {
      const StateId target = intern(fire(net, current, t));
      double v = net.rate(t, params);
      if (g.states[s].cls == MarkingClass::vanishing) v /= weight_sum;
      g.edges.push_back({s, target, t, v});
    }
  }
  return g;
}

// Tangible-only graph: vanishing states are removed and their branching
// probabilities folded into the rates of timed edges that enter them.
struct TangibleGraph {
  struct State {
    Marking marking;
    bool absorbing;
    std::string label;
  };
  struct Edge {
    StateId source;
    StateId target;
    std::string transition;  // timed transition that started the move
    double rate;
  };

  std::vector<State> states;
  std::vector<Edge> edges;
  std::vector<double> initial;  // initial distribution over states

  std::size_t size() const { return states.size(); }

  // Sum of outgoing rates including self-loops.
  double exit_rate(StateId s) const {
    double r = 0.0;
    for (const auto& e : edges)
      if (e.source == s) r += e.rate;
    return r;
  }

  std::optional<StateId> find(std::string_view label) const {
    for (StateId i = 0; i < states.size(); ++i)
      if (states[i].label == label) return i;
    return std::nullopt;
  }
  StateId at(std::string_view label) const {
    auto s = find(label);
    if (!s) throw InputError("no state labelled '" + std::string(label) + "'");
    return *s;
  }
};

inline TangibleGraph eliminate_vanishing(const Net& net, const ReachabilityGraph& g) {
  const std::size_t n = g.states.size();
  std::vector<std::vector<const ReachabilityGraph::Edge*>> out(n);
  for (const auto& e : g.edges) out[e.source].push_back(&e);

  // Absorption distribution of each vanishing state over non-vanishing ones,
  // by depth-first evaluation over the (required acyclic) vanishing subgraph.
  enum class Mark { white, grey, black };
  std::vector<Mark> mark(n, Mark::white);
  std::vector<std::map<StateId, double>> reach(n);
  std::function<void(StateId)> resolve = [&](StateId v) {
    if (mark[v] == Mark::black) return;
    if (mark[v] == Mark::grey) throw InputError("vanishing loop unsupported");
    mark[v] = Mark::grey;
    for (const auto* e : out[v]) {
      if (g.states[e->target].cls == MarkingClass::vanishing) {
        resolve(e->target);
        for (const auto& [w, p] : reach[e->target]) reach[v][w] += e->value * p;
      } else {
        reach[v][e->target] += e->value;
      }
    }
    mark[v] = Mark::black;
  };

  TangibleGraph tg;
  std::vector<StateId> remap(n, static_cast<StateId>(-1));
  for (StateId s = 0; s < n; ++s) {
    if (g.states[s].cls == MarkingClass::vanishing) {
      resolve(s);
      continue;
    }
    remap[s] = tg.states.size();
    tg.states.push_back({g.states[s].marking, g.states[s].cls == MarkingClass::absorbing,
                         net.label(g.states[s].marking)});
  }

  tg.initial.assign(tg.states.size(), 0.0);
  if (g.states[g.initial].cls == MarkingClass::vanishing) {
    for (const auto& [w, p] : reach[g.initial]) tg.initial[remap[w]] += p;
  } else {
    tg.initial[remap[g.initial]] = 1.0;
  }

  for (const auto& e : g.edges) {
    if (g.states[e.source].cls == MarkingClass::vanishing) continue;
    const auto& name = net.transition(e.transition).name;
    if (g.states[e.target].cls == MarkingClass::vanishing) {
      for (const auto& [w, p] : reach[e.target])
        if (p > 0.0) tg.edges.push_back({remap[e.source], remap[w], name, e.value * p});
    } else {
      tg.edges.push_back({remap[e.source], remap[e.target], name, e.value});
    }
  }
  return tg;
}

namespace detail {
inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}
inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}
}  // namespace detail

// Tangible states are ellipses, vanishing diamonds, absorbing double circles.
// Node ids s0..sN follow canonical state order.
inline std::string to_dot(const Net& net, const ReachabilityGraph& g) {
  std::ostringstream os;
  os << "digraph \"" << detail::dot_escape(net.model().name) << "\" {\n";
  for (StateId s = 0; s < g.states.size(); ++s) {
    const char* shape = g.states[s].cls == MarkingClass::tangible    ? "ellipse"
                        : g.states[s].cls == MarkingClass::vanishing ? "diamond"
                                                                     : "doublecircle";
    os << "  s" << s << " [label=\"" << detail::dot_escape(net.format(g.states[s].marking))
       << "\", shape=" << shape << "];\n";
  }
  for (const auto& e : g.edges)
    os << "  s" << e.source << " -> s" << e.target << " [label=\""
       << detail::dot_escape(net.transition(e.transition).name) << ':' << detail::short_number(e.value)
       << "\"];\n";
  os << "}\n";
  return os.str();
}

inline std::string to_dot(const TangibleGraph& g, const std::string& name = "tangible") {
  std::ostringstream os;
  os << "digraph \"" << detail::dot_escape(name) << "\" {\n";
  for (StateId s = 0; s < g.states.size(); ++s)
    os << "  s" << s << " [label=\"" << detail::dot_escape(g.states[s].label)
       << "\", shape=" << (g.states[s].absorbing ? "doublecircle" : "ellipse") << "];\n";
  for (const auto& e : g.edges)
    os << "  s" << e.source << " -> s" << e.target << " [label=\"" << detail::dot_escape(e.transition) << ':'
       << detail::short_number(e.rate) << "\"];\n";
  os << "}\n";
  return os.str();
}

// Convenience: reachability followed by elimination.
inline TangibleGraph tangible_graph(const Net& net, const ParameterSet& params,
                                    std::size_t state_limit = kDefaultStateLimit) {
  return eliminate_vanishing(net, build_reachability_graph(net, params, state_limit));
}

}  // namespace navgspn
