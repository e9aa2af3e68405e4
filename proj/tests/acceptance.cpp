// Acceptance checks, one per criterion. Prints "criterion N: PASS|FAIL - ..."
// and exits nonzero if any requested criterion fails.
//
//   navgspn_acceptance        run all
//   navgspn_acceptance 4      run criterion 4 only

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "navgspn/ctmc.hpp"
#include "navgspn/fixture.hpp"
#include "navgspn/log_miner.hpp"
#include "navgspn/report.hpp"
#include "navgspn/seq_cluster.hpp"
#include "navgspn/simulate.hpp"
#include "navgspn/topology_fit.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace navgspn;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1: sojourn reproduction
Outcome criterion1() {
  std::string d;
  bool ok = true;
  std::vector<ClusterReproduction> both;
  for (int c : {1, 2}) {
    both.push_back(reproduce_cluster(c));
    const auto& t = both.back().sojourn;
    ok &= t.hits() >= 8;
    d += fmt("cluster %d %zu/9 within 2%%; ", c, t.hits());
  }
  auto st = [](int c, const char* m) {
    const auto g = fixture::graph(c);
    return sojourn_times(g)[g.at(m)];
  };
  const double a2 = st(2, "M_A"), ml1 = st(1, "M_ML"), d41 = st(1, "M_D4");
  ok &= std::abs(a2 - 112.77) < 0.01 && std::abs(ml1 - 1008.06) < 0.01 && relative_error(d41, 16.95) <= kSojournTolerance;
  d += fmt("M_A c2 %.2f, M_ML c1 %.2f, M_D4 c1 %.2f; ", a2, ml1, d41);
  bool listed = false;
  for (const auto& x : discrepancies(both))
    listed |= x.topic == "irreconcilable sojourn" && x.detail.find("M_D2") != std::string::npos;
  ok &= listed;
  d += listed ? "M_D2 in discrepancy report" : "M_D2 missing from discrepancy report";
  return {ok, d};
}

// 2: published cumulative arithmetic
Outcome criterion2() {
  bool ok = true;
  std::string d;
  for (int c : {1, 2}) {
    const auto& pub = fixture::published(c);
    double sum = 0.0;
    std::string off;
    for (std::size_t i = 0; i < 9; ++i) {
      const std::vector<double> n = {pub.visits[i]}, s = {pub.sojourn_s[i]};
      const double sigma = cumulative_sojourn(n, s).sigma[0];
      sum += sigma;
      if (round_sig(sigma, 4) != round_sig(pub.cumulative_s[i], 4)) off += std::string(off.empty() ? "" : ",") + std::string(fixture::markings[i]);
    }
    const bool sum_ok = std::abs(sum - pub.session_duration_s) <= 0.01;
    ok &= off.empty() && sum_ok;
    d += fmt("cluster %d sum %.2f vs %.2f, entries off at 4 s.f.: %s; ", c, sum, pub.session_duration_s,
             off.empty() ? "none" : off.c_str());
  }
  return {ok, d};
}

// 3: occupancy identity and total-time flag
Outcome criterion3() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = synth::random_absorbing_chain(rng, 12);
    const auto x = time_to_absorption(build_ctmc(g)).values;
    const auto n = expected_visits(build_embedded_dtmc(g)).values;
    const auto st = sojourn_times(g);
    // states the initial distribution cannot reach have x = n = 0 up to rounding
    std::vector<bool> seen(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) seen[i] = g.initial[i] > 0.0;
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& e : g.edges)
        if (seen[e.source] && !seen[e.target]) seen[e.target] = grew = true;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.states[i].absorbing || !seen[i]) continue;
      const double ns = n[i] * st[i];
      worst = std::max(worst, std::abs(x[i] - ns) / std::max(std::abs(x[i]), 1e-300));
    }
  }
  bool flagged = false;
  for (const auto& x : discrepancies({reproduce_cluster(1), reproduce_cluster(2)}))
    flagged |= x.topic == "total time table" && x.detail.find("inconsistent with x = n") != std::string::npos;
  return {worst <= 1e-9 && flagged,
          fmt("worst relative gap %.3g over 100 chains; total-time table %s", worst, flagged ? "flagged" : "not flagged")};
}

// 4: Monte Carlo agreement
Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d;
  for (int c : {1, 2}) {
    const auto g = fixture::graph(c);
    const auto m = analyze(g);
    const auto s = simulate(g, 100000, 20150101);
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.states[i].absorbing) continue;
      const double zx = std::abs(s.rows[i].occupancy - m.rows[i].occupancy) / s.rows[i].occupancy_se;
      const double zn = std::abs(s.rows[i].visits - m.rows[i].visits) / s.rows[i].visits_se;
      if (std::max(zx, zn) > worst) {
        worst = std::max(zx, zn);
        where = m.rows[i].marking;
      }
    }
    ok &= worst <= 3.0;
    d += fmt("cluster %d max |z| %.2f at %s; ", c, worst, where.c_str());
  }
  const double secs = seconds_since(t0);
  ok &= secs < 10.0;
  d += fmt("%.1f s", secs);
  return {ok, d};
}

// 5: vanishing elimination
Outcome criterion5() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  std::size_t with_vanishing = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = synth::random_net(rng, 6);
    const auto net = Net::compile(model);
    with_vanishing += build_reachability_graph(net, {}).count(MarkingClass::vanishing) > 0;
    worst = std::max(worst, oracle::elimination_error(model));
  }
  const auto net = Net::compile(parse_model(
      "net split\nplace P init=1\nplace V\nplace Q\nplace R\n"
      "timed t rate=1 in=P out=V\nimmediate q weight=1 in=V out=Q\nimmediate r weight=3 in=V out=R\n"));
  const auto g = tangible_graph(net, {});
  double pq = 0.0, pr = 0.0;
  for (const auto& e : g.edges) {
    if (g.states[e.target].label == "M_Q") pq += e.rate;
    if (g.states[e.target].label == "M_R") pr += e.rate;
  }
  const bool ok = worst <= 1e-12 && pq == 0.25 && pr == 0.75;
  return {ok, fmt("worst error %.3g over 50 nets (%zu with vanishing markings); split %.17g/%.17g", worst,
                  with_vanishing, pq, pr)};
}

// 6: topology fit
Outcome criterion6() {
  const auto r = fit_enabling_sets(fixture::fit_problem());
  const auto& ml = r.at("M_ML").best;
  const auto& a = r.at("M_A").best;
  const bool ml_ok = r.symbol_set(ml) == std::set<std::string>{"theta", "nu", "mu"} && ml.joint < 0.005;
  const bool a_ok =
      r.symbol_set(a) == std::set<std::string>{"alpha", "lambda", "mu", "kappa", "epsilon"} && a.joint < 0.005;
  return {ml_ok && a_ok && r.feasible,
          fmt("M_ML %s joint %.3f%%; M_A %s joint %.3f%%; constrained assignment %s", r.format(ml).c_str(),
              100 * ml.joint, r.format(a).c_str(), 100 * a.joint, r.feasible ? "feasible" : "infeasible")};
}

// 7: rate estimation on synthetic sessions
Outcome criterion7() {
  const auto net = Net::compile(fixture::model());
  const ParameterSet truth({{"alpha", 0.004},
                            {"lambda", 0.012},
                            {"mu", 0.002},
                            {"kappa", 0.006},
                            {"nu", 0.008},
                            {"theta", 0.015},
                            {"epsilon", 0.01},
                            {"gamma", 0.02},
                            {"delta", 0.018},
                            {"beta", 0.014}});
  const auto sessions = synth::simulate_sessions(net, truth, 10000, 7);
  const auto est = estimate_rates(sessions, PageCatalog{}, net);
  double worst = 0.0;
  std::string where;
  for (const auto& [k, v] : truth.values()) {
    const double e = std::abs(est.rates.at(k) - v) / v;
    if (e > worst) {
      worst = e;
      where = k;
    }
  }
  return {worst <= 0.05, fmt("worst relative error %.2f%% (%s) over %zu rates", 100 * worst, where.c_str(), truth.size())};
}

// 8: clustering recovery and EM monotonicity
Outcome criterion8() {
  const auto g = synth::two_generator_corpus(500, 8);
  const auto c = SequenceCorpus::from_labels(g.sequences);
  EmOptions opt;
  opt.seed = 8;
  bool monotone = true;
  std::size_t runs = 0;
  KSelection sel;
  for (std::size_t k = 1; k <= 4; ++k) {
    for (unsigned r = 0; r < opt.restarts && (k > 1 || r == 0); ++r) {
      EmOptions o = opt;
      o.seed = opt.seed + r;
      const auto m = em_fit(c, k, o);
      ++runs;
      for (std::size_t i = 1; i < m.ll_history.size(); ++i)
        monotone &= m.ll_history[i] >= m.ll_history[i - 1] - 1e-9 * std::abs(m.ll_history[i - 1]);
    }
  }
  sel = select_k(c, 4, opt);
  const double ari = adjusted_rand_index(hard_assignments(sel.model, c), g.labels);
  return {sel.k == 2 && ari >= 0.9 && monotone,
          fmt("chosen K=%zu, ARI %.4f, log-likelihood %s over %zu runs", sel.k, ari,
              monotone ? "non-decreasing" : "DECREASED", runs)};
}

// 9: CLI determinism
struct CliRun {
  int status;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string("'") + NAVGSPN_CLI + "' " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

Outcome criterion9() {
  const std::string src = NAVGSPN_SOURCE_DIR;
  const std::string log = "--log '" + src + "/fixtures/sample_access.log'";
  const std::vector<std::string> cmds = {
      "solve --fixture kupikniga --cluster 1",
      "--format json solve --model '" + src + "/fixtures/kupikniga.gspn' --params '" + src + "/fixtures/cluster2.params'",
      "reach --fixture kupikniga --cluster 2 --dot",
      "--format csv reach --fixture kupikniga --cluster 1 --tangible",
      "--seed 11 simulate --fixture kupikniga --cluster 1 --runs 5000",
      "mine " + log,
      "--format json stats " + log,
      "estimate --fixture kupikniga " + log,
      "cluster --k auto --k-max 3 " + log,
      "--format json cluster --k 2 --model-json " + log,
      "fit-topology --fixture kupikniga",
      "--format json report",
  };
  std::size_t same = 0;
  std::string bad;
  for (const auto& c : cmds) {
    const auto a = cli(c), b = cli(c);
    if (a.status == 0 && a.out == b.out && !a.out.empty())
      ++same;
    else
      bad += " [" + c + " -> exit " + std::to_string(a.status) + "]";
  }
  return {same == cmds.size(), fmt("%zu/%zu invocations byte-identical with exit 0%s", same, cmds.size(), bad.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::array<std::function<Outcome()>, 9> all = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > 9) {
      std::cerr << "usage: navgspn_acceptance [1-9 ...]\n";
      return 2;
    }
    which.push_back(n);
  }
  if (which.empty())
    for (int i = 1; i <= 9; ++i) which.push_back(i);

  bool ok = true;
  for (int n : which) {
    Outcome o;
    try {
      o = all[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    ok &= o.pass;
  }
  return ok ? 0 : 1;
}
