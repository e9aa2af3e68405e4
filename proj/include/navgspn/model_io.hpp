#pragma once

// Text formats for models and parameter sets.
//
// Model file (line-oriented, '#' starts a comment):
//   net <name>
//   place <name> [init=<uint>] [category=<tag>]
//   param <symbol>
//   timed <name> rate=<symbol|float> in=<place>[:<mult>][,...] out=<place>[:<mult>][,...]
//   immediate <name> weight=<float> [priority=<uint>] in=... out=...
//
// Parameter file: one "<symbol> = <positive float>" per line.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "navgspn/error.hpp"
#include "navgspn/gspn.hpp"

namespace navgspn {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string_view strip_comment(std::string_view line) {
  auto pos = line.find('#');
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  return v;
}

inline std::optional<unsigned> parse_uint(std::string_view s) {
  unsigned v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  // shortest representation that round-trips
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t.precision(p);
    t << v;
    if (std::strtod(t.str().c_str(), nullptr) == v) return t.str();
  }
  return os.str();
}

}  // namespace detail

inline std::vector<Arc> parse_arcs(std::string_view list, const std::string& ctx) {
  std::vector<Arc> arcs;
  if (list.empty()) return arcs;
  for (auto item : detail::split(list, ',')) {
    item = detail::trim(item);
    if (item.empty()) throw InputError(ctx + "empty arc entry");
    Arc a;
    auto colon = item.find(':');
    a.place = std::string(item.substr(0, colon));
    if (colon != std::string_view::npos) {
      auto m = detail::parse_uint(item.substr(colon + 1));
      if (!m) throw InputError(ctx + "bad multiplicity in '" + std::string(item) + "'");
      a.multiplicity = *m;
    }
    arcs.push_back(std::move(a));
  }
  return arcs;
}

inline GspnModel parse_model(std::istream& in, const std::string& source = "<model>") {
  GspnModel model;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    auto tok = detail::tokens(line);
    const auto ctx = detail::where(source, lineno);
    const auto& kw = tok[0];

    if (kw == "net") {
      if (tok.size() != 2) throw InputError(ctx + "expected 'net <name>'");
      model.name = std::string(tok[1]);
    } else if (kw == "param") {
      if (tok.size() != 2) throw InputError(ctx + "expected 'param <symbol>'");
      model.parameters.emplace_back(tok[1]);
    } else if (kw == "place") {
      if (tok.size() < 2) throw InputError(ctx + "expected 'place <name>'");
      Place p;
      p.name = std::string(tok[1]);
      for (std::size_t i = 2; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string_view::npos) throw InputError(ctx + "expected key=value, got '" + std::string(tok[i]) + "'");
        auto key = tok[i].substr(0, eq), val = tok[i].substr(eq + 1);
        if (key == "init") {
          auto v = detail::parse_uint(val);
          if (!v) throw InputError(ctx + "bad init count '" + std::string(val) + "'");
          p.initial = *v;
        } else if (key == "category") {
          p.category = std::string(val);
        } else {
          throw InputError(ctx + "unknown place attribute '" + std::string(key) + "'");
        }
      }
      model.places.push_back(std::move(p));
    } else if (kw == "timed" || kw == "immediate") {
      if (tok.size() < 2) throw InputError(ctx + "expected a transition name");
      Transition t;
      t.name = std::string(tok[1]);
      t.kind = kw == "timed" ? TransitionKind::timed : TransitionKind::immediate;
      bool have_rate = false, have_in = false, have_out = false;
      for (std::size_t i = 2; i < tok.size(); ++i) {
        auto eq = tok[i].find('=');
        if (eq == std::string_view::npos) throw InputError(ctx + "expected key=value, got '" + std::string(tok[i]) + "'");
        auto key = tok[i].substr(0, eq), val = tok[i].substr(eq + 1);
        if ((key == "rate" && t.timed()) || (key == "weight" && !t.timed())) {
          if (auto d = detail::parse_double(val)) {
            t.rate = *d;
          } else if (t.timed() && !val.empty()) {
            t.rate = std::string(val);
          } else {
            throw InputError(ctx + "bad " + std::string(key) + " '" + std::string(val) + "'");
          }
          have_rate = true;
        } else if (key == "priority" && !t.timed()) {
          auto v = detail::parse_uint(val);
          if (!v) throw InputError(ctx + "bad priority '" + std::string(val) + "'");
          t.priority = *v;
        } else if (key == "in") {
          t.inputs = parse_arcs(val, ctx);
          have_in = true;
        } else if (key == "out") {
          t.outputs = parse_arcs(val, ctx);
          have_out = true;
        } else {
          throw InputError(ctx + "unexpected attribute '" + std::string(key) + "' for " + std::string(kw));
        }
      }
      if (!have_rate) throw InputError(ctx + t.name + ": missing " + (t.timed() ? "rate" : "weight"));
      if (!have_in || !have_out) throw InputError(ctx + t.name + ": missing in= or out=");
      model.transitions.push_back(std::move(t));
    } else {
      throw InputError(ctx + "unknown directive '" + std::string(kw) + "'");
    }
  }
  return model;
}

inline GspnModel parse_model(std::string_view text, const std::string& source = "<model>") {
  std::istringstream in{std::string(text)};
  return parse_model(in, source);
}

inline GspnModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  return parse_model(in, path);
}

inline std::string write_model(const GspnModel& model) {
  std::ostringstream os;
  auto arcs = [](const std::vector<Arc>& list) {
    std::string s;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i) s += ',';
      s += list[i].place;
      if (list[i].multiplicity != 1) s += ':' + std::to_string(list[i].multiplicity);
    }
    return s;
  };
  os << "net " << model.name << '\n';
  for (const auto& p : model.places) {
    os << "place " << p.name;
    if (p.initial) os << " init=" << p.initial;
    if (!p.category.empty()) os << " category=" << p.category;
    os << '\n';
  }
  for (const auto& s : model.parameters) os << "param " << s << '\n';
  for (const auto& t : model.transitions) {
    const auto rate = t.symbol() ? *t.symbol() : detail::format_double(std::get<double>(t.rate));
    if (t.timed()) {
      os << "timed " << t.name << " rate=" << rate;
    } else {
      os << "immediate " << t.name << " weight=" << rate;
      if (t.priority != 1) os << " priority=" << t.priority;
    }
    os << " in=" << arcs(t.inputs) << " out=" << arcs(t.outputs) << '\n';
  }
  return os.str();
}

inline ParameterSet parse_params(std::istream& in, const std::string& source = "<params>") {
  ParameterSet params;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    const auto ctx = detail::where(source, lineno);
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(ctx + "expected '<symbol> = <value>'");
    auto sym = detail::trim(line.substr(0, eq));
    auto val = detail::parse_double(detail::trim(line.substr(eq + 1)));
    if (sym.empty() || !val) throw InputError(ctx + "expected '<symbol> = <value>'");
    if (params.contains(std::string(sym))) throw InputError(ctx + "duplicate symbol '" + std::string(sym) + "'");
    try {
      params.set(std::string(sym), *val);
    } catch (const InputError& e) {
      throw InputError(ctx + e.what());
    }
  }
  return params;
}

inline ParameterSet parse_params(std::string_view text, const std::string& source = "<params>") {
  std::istringstream in{std::string(text)};
  return parse_params(in, source);
}

inline ParameterSet load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open parameter file '" + path + "'");
  return parse_params(in, path);
}

}  // namespace navgspn
