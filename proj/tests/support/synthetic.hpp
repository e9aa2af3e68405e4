#pragma once

// Generators for property tests and oracles: random nets, random absorbing
// chains, synthetic sessions and logs, two-generator sequence corpora.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "navgspn/gspn.hpp"
#include "navgspn/log_miner.hpp"
#include "navgspn/random.hpp"
#include "navgspn/reachability.hpp"

namespace synth {

using namespace navgspn;

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * detail::unit(rng); }
inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Random net with at most `max_places` places. Immediate transitions only move
// a token to a higher-numbered place, so vanishing markings never form a
// cycle. No transition creates tokens, so the state space is finite.
inline GspnModel random_net(std::mt19937_64& rng, std::size_t max_places = 6, bool with_immediate = true) {
  GspnModel m;
  m.name = "random";
  const std::size_t np = 2 + pick(rng, max_places - 1);
  for (std::size_t i = 0; i < np; ++i) m.places.push_back({"P" + std::to_string(i), "", 0});
  m.places[0].initial = 1;
  if (np > 2 && pick(rng, 3) == 0) m.places[1].initial = 1;

  const std::size_t nt = 2 + pick(rng, 2 * np);
  for (std::size_t t = 0; t < nt; ++t) {
    Transition tr;
    tr.name = "t" + std::to_string(t);
    const bool imm = with_immediate && pick(rng, 3) == 0;
    const std::size_t from = pick(rng, imm ? np - 1 : np);
    tr.inputs.push_back({m.places[from].name, 1});
    if (imm) {
      tr.kind = TransitionKind::immediate;
      tr.rate = uniform(rng, 0.5, 4.0);
      tr.priority = 1 + static_cast<unsigned>(pick(rng, 2));
      const std::size_t to = from + 1 + pick(rng, np - from - 1);
      tr.outputs.push_back({m.places[to].name, 1});
    } else {
      tr.kind = TransitionKind::timed;
      tr.rate = uniform(rng, 0.1, 3.0);
      if (pick(rng, 5) != 0) tr.outputs.push_back({m.places[pick(rng, np)].name, 1});
    }
    m.transitions.push_back(std::move(tr));
  }
  return m;
}

// Random absorbing chain as a tangible graph: states 0..n-2 transient (with
// random self-loops), state n-1 absorbing, every transient state can reach it.
inline TangibleGraph random_absorbing_chain(std::mt19937_64& rng, std::size_t max_states = 12) {
  TangibleGraph g;
  const std::size_t n = 2 + pick(rng, max_states - 1);
  for (std::size_t i = 0; i < n; ++i) g.states.push_back({Marking{{}}, i + 1 == n, "S" + std::to_string(i)});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.edges.push_back({i, i + 1, "next", uniform(rng, 0.05, 2.0)});
    if (pick(rng, 2) == 0) g.edges.push_back({i, i, "self", uniform(rng, 0.05, 5.0)});
    const std::size_t extra = pick(rng, 3);
    for (std::size_t k = 0; k < extra; ++k) g.edges.push_back({i, pick(rng, n), "jump", uniform(rng, 0.05, 2.0)});
  }
  g.initial.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) total += g.initial[i] = pick(rng, 2) == 0 ? 0.0 : uniform(rng, 0.1, 1.0);
  if (total == 0.0) {
    g.initial[0] = 1.0;
  } else {
    for (auto& x : g.initial) x /= total;
  }
  return g;
}

// Sessions produced by racing the enabled timed transitions of a
// single-token net. Pages are place names; the session ends on absorption.
inline std::vector<SessionSequence> simulate_sessions(const Net& net, const ParameterSet& params, std::size_t count,
                                                      std::uint64_t seed, Seconds start = 1'400'000'000) {
  std::mt19937_64 rng(seed);
  std::vector<SessionSequence> out;
  for (std::size_t s = 0; s < count; ++s) {
    Marking m = net.initial_marking();
    double t = 0.0;
    SessionSequence seq;
    seq.user = "u" + std::to_string(s);
    const Seconds base = start + static_cast<Seconds>(s) * 100'000'000;
    while (true) {
      std::size_t where = 0;
      for (std::size_t p = 0; p < m.tokens.size(); ++p)
        if (m.tokens[p]) where = p;
      seq.events.push_back({base + static_cast<Seconds>(std::llround(t)), net.place(where).name, "x"});
      const auto en = enabled_transitions(net, m);
      if (en.empty()) break;
      double total = 0.0;
      for (auto tr : en) total += net.rate(tr, params);
      t += -std::log1p(-detail::unit(rng)) / total;
      double pickv = detail::unit(rng) * total, acc = 0.0;
      TransitionId chosen = en.back();
      for (auto tr : en) {
        acc += net.rate(tr, params);
        if (pickv < acc) {
          chosen = tr;
          break;
        }
      }
      m = fire(net, m, chosen);
      if (classify_marking(net, m) == MarkingClass::absorbing) break;
    }
    seq.start = seq.events.front().timestamp;
    seq.end = base + static_cast<Seconds>(std::llround(t));
    out.push_back(std::move(seq));
  }
  return out;
}

// Log with planted visit boundaries.
struct PlantedLog {
  std::vector<LogRecord> records;
  std::size_t sessions = 0;
  std::size_t users = 0;
  std::vector<double> views_per_visit, visits_per_user, gaps;
};

inline PlantedLog planted_log(std::size_t users, std::uint64_t seed, Seconds gap_threshold = kDefaultSessionGap) {
  static const char* pages[] = {"BookDetails", "Search", "HelpOrders", "LogIn", "AddToCart", "Home"};
  std::mt19937_64 rng(seed);
  PlantedLog log;
  log.users = users;
  for (std::size_t u = 0; u < users; ++u) {
    const std::string user = "user" + std::to_string(u);
    Seconds t = 1'420'070'400 + static_cast<Seconds>(pick(rng, 86400));
    const std::size_t visits = 1 + pick(rng, 5);
    log.visits_per_user.push_back(static_cast<double>(visits));
    for (std::size_t v = 0; v < visits; ++v) {
      if (v > 0) {
        const Seconds gap = gap_threshold + 1 + static_cast<Seconds>(pick(rng, 5 * 86400));
        log.gaps.push_back(static_cast<double>(gap));
        t += gap;
      }
      const std::size_t views = 1 + pick(rng, 12);
      log.views_per_visit.push_back(static_cast<double>(views));
      for (std::size_t k = 0; k < views; ++k) {
        if (k > 0) t += static_cast<Seconds>(pick(rng, gap_threshold));  // at most the threshold
        log.records.push_back({user, t, pages[pick(rng, std::size(pages))]});
      }
      ++log.sessions;
    }
  }
  return log;
}

// Two Markov generators over a shared alphabet with disjoint preferred
// transitions: a->b->c->a versus d->e->f->d.
struct TwoGeneratorCorpus {
  std::vector<std::vector<std::string>> sequences;
  std::vector<std::size_t> labels;
};

inline TwoGeneratorCorpus two_generator_corpus(std::size_t per_generator, std::uint64_t seed) {
  const std::vector<std::string> alpha = {"a", "b", "c", "d", "e", "f"};
  std::mt19937_64 rng(seed);
  TwoGeneratorCorpus c;
  for (std::size_t g = 0; g < 2; ++g) {
    const std::size_t base = 3 * g;
    for (std::size_t s = 0; s < per_generator; ++s) {
      const std::size_t len = 5 + pick(rng, 11);
      std::vector<std::string> seq;
      std::size_t cur = detail::unit(rng) < 0.8 ? base : pick(rng, 6);
      seq.push_back(alpha[cur]);
      for (std::size_t k = 1; k < len; ++k) {
        const bool own = cur >= base && cur < base + 3;
        if (own && detail::unit(rng) < 0.8)
          cur = base + (cur - base + 1) % 3;
        else if (!own && detail::unit(rng) < 0.7)
          cur = base;
        else
          cur = pick(rng, 6);
        seq.push_back(alpha[cur]);
      }
      c.sequences.push_back(std::move(seq));
      c.labels.push_back(g);
    }
  }
  return c;
}

}  // namespace synth
