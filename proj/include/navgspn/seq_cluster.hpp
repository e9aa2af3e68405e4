#pragma once

// Sequence clustering with a finite mixture of first-order Markov chains,
// fitted by EM. Model selection by BIC, cluster profiles and DOT diagrams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navgspn/error.hpp"
#include "navgspn/format.hpp"
#include "navgspn/log_miner.hpp"
#include "navgspn/random.hpp"

namespace navgspn {

// Sequences over an ordered alphabet, symbols stored as indices.
struct SequenceCorpus {
  std::vector<std::string> alphabet;
  std::vector<std::vector<std::size_t>> sequences;
  std::vector<std::string> ids;  // optional, parallel to sequences

  std::size_t size() const { return sequences.size(); }

  std::optional<std::size_t> index(std::string_view label) const {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), label);
    if (it == alphabet.end() || *it != label) return std::nullopt;
    return static_cast<std::size_t>(it - alphabet.begin());
  }

  // Alphabet is the sorted set of labels seen.
  static SequenceCorpus from_labels(const std::vector<std::vector<std::string>>& seqs) {
    SequenceCorpus c;
    std::set<std::string> seen;
    for (const auto& s : seqs) seen.insert(s.begin(), s.end());
    c.alphabet.assign(seen.begin(), seen.end());
    for (const auto& s : seqs) {
      std::vector<std::size_t> v;
      v.reserve(s.size());
      for (const auto& x : s) v.push_back(*c.index(x));
      c.sequences.push_back(std::move(v));
    }
    return c;
  }
};

enum class SequenceAlphabet { page, category };

inline SequenceCorpus corpus_from_sessions(const std::vector<SessionSequence>& sessions,
                                           SequenceAlphabet which = SequenceAlphabet::page) {
  std::vector<std::vector<std::string>> seqs;
  for (const auto& s : sessions) {
    std::vector<std::string> v;
    for (const auto& e : s.events) v.push_back(which == SequenceAlphabet::page ? e.page : e.category);
    seqs.push_back(std::move(v));
  }
  auto c = SequenceCorpus::from_labels(seqs);
  for (const auto& s : sessions) c.ids.push_back(s.user);
  return c;
}

struct MarkovChainComponent {
  double weight = 1.0;
  std::vector<double> initial;                  // virtual start state row
  std::vector<std::vector<double>> transition;  // row-stochastic

  friend bool operator==(const MarkovChainComponent&, const MarkovChainComponent&) = default;
};

struct MarkovMixtureModel {
  std::vector<std::string> alphabet;
  std::vector<MarkovChainComponent> components;
  double log_likelihood = 0.0;
  // EM maximises log_likelihood plus the log of the smoothing prior; this is
  // the per-iteration value of that objective.
  std::vector<double> objective_history;
  std::vector<double> ll_history;
  unsigned iterations = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  double smoothing = 0.0;
  double mean_length = 0.0;  // of the training sequences
  std::size_t num_sequences = 0;

  std::size_t k() const { return components.size(); }
  std::size_t free_parameters() const {
    const std::size_t s = alphabet.size();
    return (k() - 1) + k() * ((s - 1) + s * (s - 1));
  }
  double bic() const {
    return -2.0 * log_likelihood + static_cast<double>(free_parameters()) * std::log(static_cast<double>(num_sequences));
  }

  friend bool operator==(const MarkovMixtureModel&, const MarkovMixtureModel&) = default;
};

struct EmOptions {
  std::uint64_t seed = 42;
  double tol = 1e-6;  // relative objective improvement
  unsigned max_iter = 500;
  double smoothing = 1e-6;
  unsigned restarts = 5;
};

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double sequence_log_likelihood(const MarkovChainComponent& c, const std::vector<std::size_t>& seq) {
  if (seq.empty()) return 0.0;
  double ll = std::log(c.initial[seq[0]]);
  for (std::size_t t = 1; t < seq.size(); ++t) ll += std::log(c.transition[seq[t - 1]][seq[t]]);
  return ll;
}

// Weighted smoothed counts -> component parameters.
inline MarkovChainComponent m_step(const SequenceCorpus& c, const std::vector<double>& resp, double smoothing) {
  const std::size_t s = c.alphabet.size();
  MarkovChainComponent comp;
  comp.initial.assign(s, 0.0);
  comp.transition.assign(s, std::vector<double>(s, 0.0));
  for (std::size_t n = 0; n < c.size(); ++n) {
    const auto& seq = c.sequences[n];
    if (seq.empty()) continue;
    const double r = resp[n];
    comp.initial[seq[0]] += r;
    for (std::size_t t = 1; t < seq.size(); ++t) comp.transition[seq[t - 1]][seq[t]] += r;
  }
  auto normalise = [&](std::vector<double>& row) {
    double total = 0.0;
    for (auto& x : row) {
      x += smoothing;
      total += x;
    }
    if (!(total > 0.0)) {
      std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(s));
      return;
    }
    for (auto& x : row) x /= total;
  };
  normalise(comp.initial);
  for (auto& row : comp.transition) normalise(row);
  return comp;
}

inline double log_prior(const MarkovMixtureModel& m) {
  if (m.smoothing <= 0.0) return 0.0;
  double lp = 0.0;
  for (const auto& c : m.components) {
    for (double x : c.initial) lp += std::log(x);
    for (const auto& row : c.transition)
      for (double x : row) lp += std::log(x);
  }
  return m.smoothing * lp;
}

// E-step: responsibilities (n x k) and total log-likelihood.
inline double e_step(const MarkovMixtureModel& m, const SequenceCorpus& c, std::vector<std::vector<double>>& resp) {
  const std::size_t k = m.k();
  resp.assign(c.size(), std::vector<double>(k, 0.0));
  std::vector<double> lj(k);
  double ll = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    for (std::size_t j = 0; j < k; ++j)
      lj[j] = std::log(m.components[j].weight) + sequence_log_likelihood(m.components[j], c.sequences[n]);
    const double z = log_sum_exp(lj);
    ll += z;
    for (std::size_t j = 0; j < k; ++j) resp[n][j] = std::exp(lj[j] - z);
  }
  return ll;
}

inline void m_step_all(MarkovMixtureModel& m, const SequenceCorpus& c, const std::vector<std::vector<double>>& resp) {
  const std::size_t k = m.k();
  std::vector<double> col(c.size());
  for (std::size_t j = 0; j < k; ++j) {
    double total = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) total += col[n] = resp[n][j];
    const double w = total / static_cast<double>(c.size());
    m.components[j] = m_step(c, col, m.smoothing);
    m.components[j].weight = w;
  }
}

}  // namespace detail

// One EM run from a random soft partition drawn with `seed`.
inline MarkovMixtureModel em_fit(const SequenceCorpus& corpus, std::size_t k, const EmOptions& opt) {
  if (k < 1) throw InputError("number of clusters must be at least 1");
  if (corpus.sequences.empty()) throw InputError("no sequences to cluster");
  if (corpus.alphabet.empty()) throw InputError("empty alphabet");

  MarkovMixtureModel m;
  m.alphabet = corpus.alphabet;
  m.components.resize(k);
  m.seed = opt.seed;
  m.tolerance = opt.tol;
  m.smoothing = opt.smoothing;
  m.num_sequences = corpus.size();
  double len = 0.0;
  for (const auto& s : corpus.sequences) len += static_cast<double>(s.size());
  m.mean_length = len / static_cast<double>(corpus.size());

  std::vector<std::vector<double>> resp(corpus.size(), std::vector<double>(k, 1.0));
  if (k > 1) {
    std::mt19937_64 rng(splitmix64(opt.seed));
    for (auto& r : resp) {
      double total = 0.0;
      for (auto& x : r) total += x = -std::log1p(-detail::unit(rng));  // flat Dirichlet
      for (auto& x : r) x /= total;
    }
  }

  double prev = -std::numeric_limits<double>::infinity();
  for (unsigned it = 1; it <= std::max(1u, opt.max_iter); ++it) {
    detail::m_step_all(m, corpus, resp);
    m.log_likelihood = detail::e_step(m, corpus, resp);
    const double obj = m.log_likelihood + detail::log_prior(m);
    m.objective_history.push_back(obj);
    m.ll_history.push_back(m.log_likelihood);
    m.iterations = it;
    if (std::isfinite(prev) && obj - prev <= opt.tol * std::abs(prev)) break;
    prev = obj;
  }
  return m;
}

// Best of opt.restarts runs by log-likelihood; earlier restarts win ties.
inline MarkovMixtureModel em_fit_best(const SequenceCorpus& corpus, std::size_t k, const EmOptions& opt) {
  const unsigned runs = k == 1 ? 1 : std::max(1u, opt.restarts);
  MarkovMixtureModel best;
  for (unsigned r = 0; r < runs; ++r) {
    EmOptions o = opt;
    o.seed = opt.seed + r;
    auto m = em_fit(corpus, k, o);
    if (r == 0 || m.log_likelihood > best.log_likelihood) best = std::move(m);
  }
  return best;
}

struct KScore {
  std::size_t k;
  double log_likelihood;
  double bic;
  std::size_t parameters;
};

struct KSelection {
  std::size_t k = 1;
  std::vector<KScore> scores;
  MarkovMixtureModel model;  // fit for the chosen k
};

inline KSelection select_k(const SequenceCorpus& corpus, std::size_t k_max, const EmOptions& opt) {
  if (k_max < 1) throw InputError("k-max must be at least 1");
  KSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= k_max; ++k) {
    auto m = em_fit_best(corpus, k, opt);
    const double b = m.bic();
    sel.scores.push_back({k, m.log_likelihood, b, m.free_parameters()});
    if (b < best) {
      best = b;
      sel.k = k;
      sel.model = std::move(m);
    }
  }
  return sel;
}

// Posterior over components. Unknown labels fall back to the smoothing floor.
inline std::vector<double> assign(const MarkovMixtureModel& m, const std::vector<std::size_t>& seq) {
  std::vector<double> lj(m.k());
  for (std::size_t j = 0; j < m.k(); ++j)
    lj[j] = std::log(m.components[j].weight) + detail::sequence_log_likelihood(m.components[j], seq);
  const double z = detail::log_sum_exp(lj);
  for (auto& x : lj) x = std::exp(x - z);
  return lj;
}

inline std::vector<double> assign(const MarkovMixtureModel& m, const std::vector<std::string>& labels) {
  const double floor = m.smoothing > 0.0 ? std::log(m.smoothing) : -std::numeric_limits<double>::infinity();
  auto idx = [&](const std::string& l) -> std::optional<std::size_t> {
    auto it = std::lower_bound(m.alphabet.begin(), m.alphabet.end(), l);
    if (it == m.alphabet.end() || *it != l) return std::nullopt;
    return static_cast<std::size_t>(it - m.alphabet.begin());
  };
  std::vector<double> lj(m.k());
  for (std::size_t j = 0; j < m.k(); ++j) {
    const auto& c = m.components[j];
    double ll = std::log(c.weight);
    std::optional<std::size_t> prev;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      auto cur = idx(labels[t]);
      if (!cur) ll += floor;
      else if (t == 0) ll += std::log(c.initial[*cur]);
      else if (!prev) ll += floor;
      else ll += std::log(c.transition[*prev][*cur]);
      prev = cur;
    }
    lj[j] = ll;
  }
  const double z = detail::log_sum_exp(lj);
  for (auto& x : lj) x = std::exp(x - z);
  return lj;
}

inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline std::vector<std::size_t> hard_assignments(const MarkovMixtureModel& m, const SequenceCorpus& c) {
  std::vector<std::size_t> out;
  out.reserve(c.size());
  for (const auto& s : c.sequences) out.push_back(argmax(assign(m, s)));
  return out;
}

// Expected share of visits per state over a walk of the training mean length.
inline std::vector<double> popularity(const MarkovMixtureModel& m, std::size_t cluster) {
  const auto& c = m.components.at(cluster);
  const std::size_t s = m.alphabet.size();
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(m.mean_length)));
  std::vector<double> p = c.initial, acc(s, 0.0), next(s);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < s; ++i) acc[i] += p[i];
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j) next[j] += p[i] * c.transition[i][j];
    p.swap(next);
  }
  for (auto& x : acc) x /= static_cast<double>(steps);
  return acc;
}

struct RankedTransition {
  std::string from, to;
  double probability;
  double lift;  // versus the weight-pooled model
};

struct StartProbability {
  std::string state;
  double probability;
};

struct CharacteristicTransitions {
  std::size_t cluster;
  std::vector<StartProbability> start;     // descending
  std::vector<RankedTransition> transitions;  // by lift, then probability
  std::vector<double> popularity;
};

inline constexpr double kMinShownProbability = 0.05;
inline constexpr double kMinShownPopularity = 1e-3;

inline CharacteristicTransitions characteristic_transitions(const MarkovMixtureModel& m, std::size_t cluster,
                                                            std::size_t top_n) {
  if (cluster >= m.k()) throw InputError("cluster index " + std::to_string(cluster + 1) + " out of range");
  const std::size_t s = m.alphabet.size();
  const auto& c = m.components[cluster];
  CharacteristicTransitions out;
  out.cluster = cluster;
  out.popularity = popularity(m, cluster);

  for (std::size_t i = 0; i < s; ++i)
    if (c.initial[i] >= kMinShownProbability) out.start.push_back({m.alphabet[i], c.initial[i]});
  std::stable_sort(out.start.begin(), out.start.end(),
                   [](const auto& a, const auto& b) { return a.probability > b.probability; });

  for (std::size_t i = 0; i < s; ++i) {
    if (out.popularity[i] < kMinShownPopularity) continue;
    for (std::size_t j = 0; j < s; ++j) {
      const double p = c.transition[i][j];
      if (p < kMinShownProbability) continue;
      double pooled = 0.0;
      for (const auto& other : m.components) pooled += other.weight * other.transition[i][j];
      out.transitions.push_back({m.alphabet[i], m.alphabet[j], p, pooled > 0.0 ? p / pooled : 1.0});
    }
  }
  std::stable_sort(out.transitions.begin(), out.transitions.end(), [](const auto& a, const auto& b) {
    if (a.lift != b.lift) return a.lift > b.lift;
    return a.probability > b.probability;
  });
  if (out.transitions.size() > top_n) out.transitions.resize(top_n);
  return out;
}

namespace detail {
inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
}  // namespace detail

// States shaded by popularity (darker = more popular); edges are the shown
// transitions of the component, self-loops left out.
inline std::string export_cluster_diagram(const MarkovMixtureModel& m, std::size_t cluster) {
  if (cluster >= m.k()) throw InputError("cluster index " + std::to_string(cluster + 1) + " out of range");
  const auto& c = m.components[cluster];
  const auto pop = popularity(m, cluster);
  const double top = *std::max_element(pop.begin(), pop.end());
  std::ostringstream os;
  os << "digraph cluster" << cluster + 1 << " {\n  node [style=filled];\n";
  for (std::size_t i = 0; i < m.alphabet.size(); ++i) {
    if (pop[i] < kMinShownPopularity && m.alphabet.size() > 1) continue;
    const int shade = top > 0.0 ? 95 - static_cast<int>(std::lround(75.0 * pop[i] / top)) : 95;
    os << "  n" << i << " [label=\"" << detail::dot_escape(m.alphabet[i]) << "\", fillcolor=gray" << shade
       << (shade < 50 ? ", fontcolor=white" : "") << "];\n";
  }
  for (std::size_t i = 0; i < m.alphabet.size(); ++i) {
    if (pop[i] < kMinShownPopularity) continue;
    for (std::size_t j = 0; j < m.alphabet.size(); ++j) {
      if (i == j || c.transition[i][j] < kMinShownProbability) continue;
      if (pop[j] < kMinShownPopularity) continue;
      os << "  n" << i << " -> n" << j << " [label=\"" << detail::fixed2(c.transition[i][j]) << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

inline nlohmann::ordered_json model_to_json(const MarkovMixtureModel& m) {
  nlohmann::ordered_json j;
  j["alphabet"] = m.alphabet;
  j["k"] = m.k();
  j["log_likelihood"] = m.log_likelihood;
  j["bic"] = m.bic();
  j["iterations"] = m.iterations;
  j["seed"] = m.seed;
  j["tolerance"] = m.tolerance;
  j["smoothing"] = m.smoothing;
  auto comps = nlohmann::ordered_json::array();
  for (const auto& c : m.components)
    comps.push_back({{"weight", c.weight}, {"initial", c.initial}, {"transitions", c.transition}});
  j["components"] = comps;
  return j;
}

struct ClusterReport {
  std::vector<std::size_t> sizes;
  std::vector<CharacteristicTransitions> profiles;
  std::vector<std::size_t> labels;  // hard assignment per sequence
};

inline ClusterReport cluster_report(const MarkovMixtureModel& m, const SequenceCorpus& c, std::size_t top_n = 10) {
  ClusterReport r;
  r.labels = hard_assignments(m, c);
  r.sizes.assign(m.k(), 0);
  for (auto l : r.labels) ++r.sizes[l];
  for (std::size_t k = 0; k < m.k(); ++k) r.profiles.push_back(characteristic_transitions(m, k, top_n));
  return r;
}

inline std::string format_cluster_report(const MarkovMixtureModel& m, const ClusterReport& r,
                                         const std::vector<KScore>& scores, OutputFormat f) {
  std::ostringstream os;
  if (f == OutputFormat::json) {
    nlohmann::ordered_json j;
    auto sj = nlohmann::ordered_json::array();
    for (const auto& s : scores)
      sj.push_back({{"k", s.k}, {"log_likelihood", s.log_likelihood}, {"bic", s.bic}, {"parameters", s.parameters}});
    j["selection"] = sj;
    j["model"] = model_to_json(m);
    auto cl = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < m.k(); ++k) {
      const auto& p = r.profiles[k];
      nlohmann::ordered_json cj;
      cj["cluster"] = k + 1;
      cj["size"] = r.sizes[k];
      cj["weight"] = m.components[k].weight;
      auto st = nlohmann::ordered_json::array();
      for (const auto& s : p.start) st.push_back({{"state", s.state}, {"probability", s.probability}});
      cj["start"] = st;
      auto tr = nlohmann::ordered_json::array();
      for (const auto& t : p.transitions)
        tr.push_back({{"from", t.from}, {"to", t.to}, {"probability", t.probability}, {"lift", t.lift}});
      cj["transitions"] = tr;
      nlohmann::ordered_json pop;
      for (std::size_t i = 0; i < m.alphabet.size(); ++i) pop[m.alphabet[i]] = p.popularity[i];
      cj["popularity"] = pop;
      cl.push_back(cj);
    }
    j["clusters"] = cl;
    os << j.dump(2) << '\n';
    return os.str();
  }
  if (f == OutputFormat::csv) {
    os << "cluster,kind,from,to,probability,lift\n";
    for (std::size_t k = 0; k < m.k(); ++k) {
      for (const auto& s : r.profiles[k].start)
        os << k + 1 << ",start,," << s.state << ',' << detail::num(s.probability) << ",\n";
      for (const auto& t : r.profiles[k].transitions)
        os << k + 1 << ",transition," << t.from << ',' << t.to << ',' << detail::num(t.probability) << ','
           << detail::num(t.lift) << '\n';
    }
    return os.str();
  }
  char buf[256];
  if (!scores.empty()) {
    os << "Model selection (BIC)\n";
    for (const auto& s : scores) {
      std::snprintf(buf, sizeof buf, "  K=%-3zu logL=%-16.4f BIC=%-16.4f%s\n", s.k, s.log_likelihood, s.bic,
                    s.k == m.k() ? "  <- chosen" : "");
      os << buf;
    }
    os << '\n';
  }
  for (std::size_t k = 0; k < m.k(); ++k) {
    const auto& p = r.profiles[k];
    std::snprintf(buf, sizeof buf, "Cluster %zu: %zu sequences, weight %.4f\n", k + 1, r.sizes[k],
                  m.components[k].weight);
    os << buf;
    for (const auto& s : p.start) os << "  start at " << s.state << ": " << detail::fixed2(s.probability) << '\n';
    for (const auto& t : p.transitions) {
      std::snprintf(buf, sizeof buf, "  %s -> %s: %.2f (lift %.2f)\n", t.from.c_str(), t.to.c_str(), t.probability,
                    t.lift);
      os << buf;
    }
  }
  return os.str();
}

// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw InputError("labelings differ in length");
  const std::size_t n = a.size();
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> ra, rb;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [_, v] : table) index += c2(v);
  for (const auto& [_, v] : ra) sa += c2(v);
  for (const auto& [_, v] : rb) sb += c2(v);
  const double total = c2(static_cast<double>(n));
  if (total == 0.0) return 1.0;
  const double expected = sa * sb / total;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace navgspn
