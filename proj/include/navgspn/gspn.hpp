#pragma once

// GSPN data model and token-game semantics.
//
// A GspnModel is the name-level description as read from a model file. It may
// be inconsistent (dangling place names, undeclared rate symbols); use
// validate_model() to list the problems and Net::compile() to obtain the
// index-resolved form every other operation works on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "navgspn/error.hpp"

namespace navgspn {

struct Place {
  std::string name;
  std::string category;  // opaque tag, may be empty
  unsigned initial = 0;
};

struct Arc {
  std::string place;
  unsigned multiplicity = 1;
};

enum class TransitionKind { timed, immediate };

// A timed transition's rate is either a symbol bound late through a
// ParameterSet or a literal; an immediate transition always has a literal
// weight.
using RateSpec = std::variant<std::string, double>;

struct Transition {
  std::string name;
  TransitionKind kind = TransitionKind::timed;
  RateSpec rate = 1.0;
  unsigned priority = 1;  // immediate only
  std::vector<Arc> inputs;
  std::vector<Arc> outputs;

  bool timed() const { return kind == TransitionKind::timed; }
  const std::string* symbol() const { return std::get_if<std::string>(&rate); }
};

struct GspnModel {
  std::string name;
  std::vector<Place> places;
  std::vector<Transition> transitions;
  std::vector<std::string> parameters;  // declared rate symbols
};

// Symbol -> rate (1/second). Every value strictly positive and finite.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(std::map<std::string, double> values) {
    for (auto& [k, v] : values) set(k, v);
  }

  void set(const std::string& symbol, double value) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw InputError("parameter '" + symbol + "' must be positive and finite");
    values_[symbol] = value;
  }

  double at(const std::string& symbol) const {
    auto it = values_.find(symbol);
    if (it == values_.end()) throw InputError("parameter '" + symbol + "' has no value");
    return it->second;
  }

  bool contains(const std::string& symbol) const { return values_.count(symbol) != 0; }
  const std::map<std::string, double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::map<std::string, double> values_;
};

struct Violation {
  std::string kind;  // "unknown place", "undeclared parameter", ...
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
  }
  std::string summary() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.kind << ": " << v.detail << '\n';
    return os.str();
  }
};

inline ValidationReport validate_model(const GspnModel& model) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string detail) {
    report.violations.push_back({std::move(kind), std::move(detail)});
  };

  std::set<std::string> places;
  for (const auto& p : model.places) {
    if (p.name.empty()) add("empty name", "place with empty name");
    if (!places.insert(p.name).second) add("duplicate place", p.name);
  }
  std::set<std::string> params(model.parameters.begin(), model.parameters.end());
  if (params.size() != model.parameters.size()) add("duplicate parameter", "parameter declared twice");

  std::set<std::string> names;
  for (const auto& t : model.transitions) {
    if (t.name.empty()) add("empty name", "transition with empty name");
    if (!names.insert(t.name).second) add("duplicate transition", t.name);
    if (t.inputs.empty()) add("no input", t.name + " has no input place");

    auto check_arcs = [&](const std::vector<Arc>& arcs, const char* side) {
      for (const auto& a : arcs) {
        if (!places.count(a.place))
          add("unknown place", t.name + " " + side + " '" + a.place + "'");
        if (a.multiplicity == 0)
          add("nonpositive multiplicity", t.name + " " + side + " '" + a.place + "'");
      }
    };
    check_arcs(t.inputs, "input");
    check_arcs(t.outputs, "output");

    if (t.timed()) {
      if (const auto* sym = t.symbol()) {
        if (!params.count(*sym)) add("undeclared parameter", t.name + " uses '" + *sym + "'");
      } else if (double r = std::get<double>(t.rate); !(r > 0.0) || !std::isfinite(r)) {
        add("nonpositive rate", t.name);
      }
    } else {
      if (t.symbol()) {
        add("symbolic weight", t.name + " immediate weights must be literal");
      } else if (double w = std::get<double>(t.rate); !(w > 0.0) || !std::isfinite(w)) {
        add("nonpositive weight", t.name);
      }
      if (t.priority == 0) add("nonpositive priority", t.name);
    }
  }
  return report;
}

// Token counts indexed by the owning net's place order.
struct Marking {
  std::vector<unsigned> tokens;

  unsigned operator[](std::size_t place) const { return tokens[place]; }
  friend auto operator<=>(const Marking&, const Marking&) = default;
};

struct MarkingHash {
  std::size_t operator()(const Marking& m) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (unsigned t : m.tokens) {
      h ^= t;
      h *= 1099511628211ull;
    }
    return h;
  }
};

using PlaceId = std::size_t;
using TransitionId = std::size_t;

// Index-resolved, validated net. Immutable after compile().
class Net {
 public:
  struct IndexArc {
    PlaceId place;
    unsigned multiplicity;
  };
  struct CompiledTransition {
    std::vector<IndexArc> inputs;
    std::vector<IndexArc> outputs;
  };

  static Net compile(GspnModel model) {
    auto report = validate_model(model);
    if (!report.ok()) throw InputError("invalid model '" + model.name + "':\n" + report.summary());
    Net net;
    net.model_ = std::move(model);
    for (std::size_t i = 0; i < net.model_.places.size(); ++i)
      net.place_index_.emplace(net.model_.places[i].name, i);
    for (const auto& t : net.model_.transitions) {
      CompiledTransition ct;
      for (const auto& a : t.inputs) ct.inputs.push_back({net.place_index_.at(a.place), a.multiplicity});
      for (const auto& a : t.outputs) ct.outputs.push_back({net.place_index_.at(a.place), a.multiplicity});
      net.compiled_.push_back(std::move(ct));
    }
    for (std::size_t i = 0; i < net.model_.transitions.size(); ++i)
      net.transition_index_.emplace(net.model_.transitions[i].name, i);
    return net;
  }

  const GspnModel& model() const { return model_; }
  std::size_t num_places() const { return model_.places.size(); }
  std::size_t num_transitions() const { return model_.transitions.size(); }
  const Place& place(PlaceId p) const { return model_.places[p]; }
  const Transition& transition(TransitionId t) const { return model_.transitions[t]; }
  const CompiledTransition& arcs(TransitionId t) const { return compiled_[t]; }

  std::optional<PlaceId> find_place(std::string_view name) const {
    auto it = place_index_.find(std::string(name));
    if (it == place_index_.end()) return std::nullopt;
    return it->second;
  }
  PlaceId place_id(std::string_view name) const {
    auto p = find_place(name);
    if (!p) throw InputError("unknown place '" + std::string(name) + "'");
    return *p;
  }
  TransitionId transition_id(std::string_view name) const {
    auto it = transition_index_.find(std::string(name));
    if (it == transition_index_.end()) throw InputError("unknown transition '" + std::string(name) + "'");
    return it->second;
  }

  Marking initial_marking() const {
    Marking m{std::vector<unsigned>(num_places(), 0)};
    for (std::size_t i = 0; i < num_places(); ++i) m.tokens[i] = model_.places[i].initial;
    return m;
  }

  // Builds a marking from (place name, count) pairs; absent places hold 0.
  Marking marking(std::initializer_list<std::pair<std::string_view, unsigned>> counts) const {
    Marking m{std::vector<unsigned>(num_places(), 0)};
    for (const auto& [name, n] : counts) m.tokens[place_id(name)] = n;
    return m;
  }

  // Rate (timed) or weight (immediate) of a transition under a parameter set.
  double rate(TransitionId t, const ParameterSet& params) const {
    const auto& tr = transition(t);
    if (const auto* sym = tr.symbol()) return params.at(*sym);
    return std::get<double>(tr.rate);
  }

  // "{A:1}" style, places in declaration order, zero counts omitted.
  std::string format(const Marking& m) const {
    std::string s = "{";
    bool first = true;
    for (std::size_t i = 0; i < m.tokens.size(); ++i) {
      if (m.tokens[i] == 0) continue;
      if (!first) s += ',';
      s += model_.places[i].name + ':' + std::to_string(m.tokens[i]);
      first = false;
    }
    return s + '}';
  }

  // Short state label: "M_A" for a single token in A, otherwise the token map.
  std::string label(const Marking& m) const {
    std::size_t total = 0, where = 0;
    for (std::size_t i = 0; i < m.tokens.size(); ++i) {
      total += m.tokens[i];
      if (m.tokens[i]) where = i;
    }
    if (total == 1) return "M_" + model_.places[where].name;
    return "M" + format(m);
  }

 private:
  GspnModel model_;
  std::vector<CompiledTransition> compiled_;
  std::map<std::string, PlaceId> place_index_;
  std::map<std::string, TransitionId> transition_index_;
};

// Every input place holds at least the arc multiplicity.
inline bool token_enabled(const Net& net, const Marking& m, TransitionId t) {
  for (const auto& a : net.arcs(t).inputs)
    if (m.tokens[a.place] < a.multiplicity) return false;
  return true;
}

// Enabled set after priority filtering: if any immediate transition is
// token-enabled, only the token-enabled immediates of the highest priority
// level; otherwise all token-enabled timed transitions. Declaration order.
inline std::vector<TransitionId> enabled_transitions(const Net& net, const Marking& m) {
  std::vector<TransitionId> timed;
  std::vector<TransitionId> immediate;
  unsigned top = 0;
  for (TransitionId t = 0; t < net.num_transitions(); ++t) {
    if (!token_enabled(net, m, t)) continue;
    const auto& tr = net.transition(t);
    if (tr.timed()) {
      timed.push_back(t);
    } else {
      immediate.push_back(t);
      top = std::max(top, tr.priority);
    }
  }
  if (immediate.empty()) return timed;
  std::erase_if(immediate, [&](TransitionId t) { return net.transition(t).priority != top; });
  return immediate;
}

inline std::vector<std::string> enabled_transition_names(const Net& net, const Marking& m) {
  std::vector<std::string> out;
  for (auto t : enabled_transitions(net, m)) out.push_back(net.transition(t).name);
  return out;
}

inline Marking fire(const Net& net, const Marking& m, TransitionId t) {
  auto enabled = enabled_transitions(net, m);
  if (std::find(enabled.begin(), enabled.end(), t) == enabled.end())
    throw NotEnabledError("transition '" + net.transition(t).name + "' is not enabled in " + net.format(m));
  Marking next = m;
  for (const auto& a : net.arcs(t).inputs) next.tokens[a.place] -= a.multiplicity;
  for (const auto& a : net.arcs(t).outputs) next.tokens[a.place] += a.multiplicity;
  return next;
}

inline Marking fire(const Net& net, const Marking& m, std::string_view transition) {
  return fire(net, m, net.transition_id(transition));
}

}  // namespace navgspn
