// navgspn command-line tool. Exit codes: 0 ok, 1 input error, 2 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "navgspn/ctmc.hpp"
#include "navgspn/error.hpp"
#include "navgspn/fixture.hpp"
#include "navgspn/log_miner.hpp"
#include "navgspn/model_io.hpp"
#include "navgspn/reachability.hpp"
#include "navgspn/report.hpp"
#include "navgspn/seq_cluster.hpp"
#include "navgspn/simulate.hpp"
#include "navgspn/topology_fit.hpp"

using namespace navgspn;

namespace {

constexpr std::uint64_t kDefaultSeed = 20150101;

struct Globals {
  std::string format = "text";
  std::string out;
  std::uint64_t seed = kDefaultSeed;
};

// Model and parameters, from files or the built-in fixture.
struct ModelSource {
  std::string model_path, params_path, fixture;
  int cluster = 1;

  void add_to(CLI::App* cmd, bool needs_params = true) {
    cmd->add_option("-m,--model", model_path, "GSPN model file");
    if (needs_params) {
      cmd->add_option("-p,--params", params_path, "parameter file");
      cmd->add_option("--cluster", cluster, "fixture parameter set (1 or 2)")->check(CLI::Range(1, 2));
    }
    cmd->add_option("--fixture", fixture, "built-in fixture (kupikniga)");
  }

  Net net() const {
    if (!model_path.empty()) return Net::compile(load_model(model_path));
    check_fixture();
    return Net::compile(fixture::model());
  }
  ParameterSet params() const {
    if (!params_path.empty()) return load_params(params_path);
    if (!model_path.empty() && fixture.empty()) throw InputError("--params is required with --model");
    check_fixture();
    return fixture::params(cluster);
  }
  void check_fixture() const {
    if (fixture.empty()) throw InputError("give --model/--params or --fixture kupikniga");
    if (fixture != "kupikniga") throw InputError("unknown fixture '" + fixture + "'");
  }
};

struct LogSource {
  std::string log_path, log_format = "w3c", pages_path, sessions_path;
  std::string user_field, date_field, time_field, uri_field;
  std::vector<std::string> fields;
  bool no_time = false;
  double gap_minutes = 30.0;

  void add_to(CLI::App* cmd, bool allow_sessions) {
    cmd->add_option("--log", log_path, "server log (W3C extended or CSV)");
    cmd->add_option("--log-format", log_format, "w3c or csv")->check(CLI::IsMember({"w3c", "csv"}));
    cmd->add_option("--user-field", user_field, "user id column");
    cmd->add_option("--date-field", date_field, "date column");
    cmd->add_option("--time-field", time_field, "time column");
    cmd->add_flag("--no-time-field", no_time, "date column holds full timestamps");
    cmd->add_option("--uri-field", uri_field, "URI column");
    cmd->add_option("--fields", fields, "explicit column names")->delimiter(',');
    cmd->add_option("--pages", pages_path, "page table (page, category, place)");
    cmd->add_option("--gap-minutes", gap_minutes, "session inactivity gap")->check(CLI::PositiveNumber);
    if (allow_sessions) cmd->add_option("--sessions", sessions_path, "session JSON lines from 'mine'");
  }

  PageCatalog catalog() const {
    if (!pages_path.empty()) return PageCatalog::load(pages_path);
    return PageCatalog::parse(fixture::pages_table);
  }

  LogFormat format() const {
    LogFormat f;
    if (log_format == "csv") {
      f.kind = LogFormat::Kind::csv;
      f.user_field = "userId";
      f.date_field = "date";
      f.time_field = "time";
      f.uri_field = "url";
    }
    if (!user_field.empty()) f.user_field = user_field;
    if (!date_field.empty()) f.date_field = date_field;
    if (!time_field.empty()) f.time_field = time_field;
    if (no_time) f.time_field.clear();
    if (!uri_field.empty()) f.uri_field = uri_field;
    f.fields = fields;
    return f;
  }

  // Parses and sessionizes the log, or reads prepared sessions.
  std::vector<SessionSequence> sessions(std::optional<ParseResult>* parsed = nullptr) const {
    if (!sessions_path.empty()) return load_sessions(sessions_path);
    if (log_path.empty()) throw InputError("give --log (or --sessions)");
    std::ifstream in(log_path);
    if (!in) throw InputError("cannot open log file '" + log_path + "'");
    auto res = parse_log(in, format());
    const auto cat = catalog();
    auto s = sessionize(res.records, static_cast<Seconds>(gap_minutes * 60.0), &cat);
    if (parsed) *parsed = std::move(res);
    return s;
  }
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(g.out, std::ios::binary);
  if (!out) throw InputError("cannot write '" + g.out + "'");
  out << text;
}

std::string reach_listing(const Net& net, const ReachabilityGraph& g, OutputFormat f) {
  std::ostringstream os;
  if (f == OutputFormat::json) {
    nlohmann::ordered_json j;
    auto st = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < g.states.size(); ++i)
      st.push_back({{"id", "s" + std::to_string(i)},
                    {"marking", net.format(g.states[i].marking)},
                    {"class", to_string(g.states[i].cls)}});
    auto ed = nlohmann::ordered_json::array();
    for (const auto& e : g.edges)
      ed.push_back({{"source", "s" + std::to_string(e.source)},
                    {"target", "s" + std::to_string(e.target)},
                    {"transition", net.transition(e.transition).name},
                    {"value", e.value}});
    j["states"] = st;
    j["edges"] = ed;
    j["initial"] = "s" + std::to_string(g.initial);
    os << j.dump(2) << '\n';
    return os.str();
  }
  if (f == OutputFormat::csv) {
    os << "source,target,transition,value\n";
    for (const auto& e : g.edges)
      os << net.format(g.states[e.source].marking) << ',' << net.format(g.states[e.target].marking) << ','
         << net.transition(e.transition).name << ',' << detail::num(e.value) << '\n';
    return os.str();
  }
  os << g.states.size() << " states (" << g.count(MarkingClass::tangible) << " tangible, "
     << g.count(MarkingClass::vanishing) << " vanishing, " << g.count(MarkingClass::absorbing) << " absorbing), "
     << g.edges.size() << " edges\n";
  for (std::size_t i = 0; i < g.states.size(); ++i) {
    os << "s" << i << ' ' << net.format(g.states[i].marking) << ' ' << to_string(g.states[i].cls) << '\n';
    for (const auto& e : g.edges)
      if (e.source == i)
        os << "  -> s" << e.target << ' ' << net.transition(e.transition).name << ' ' << detail::num(e.value) << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GSPN navigation model solver and clickstream miner"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--format", g.format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  app.add_option("--out", g.out, "write output to this path");
  app.add_option("--seed", g.seed, "random seed");

  // solve
  auto* solve = app.add_subcommand("solve", "transient measures of the absorbing CTMC");
  ModelSource solve_src;
  solve_src.add_to(solve);

  // reach
  auto* reach = app.add_subcommand("reach", "reachability graph");
  ModelSource reach_src;
  reach_src.add_to(reach);
  bool reach_dot = false, reach_tangible = false;
  std::size_t state_limit = kDefaultStateLimit;
  reach->add_flag("--dot", reach_dot, "DOT output");
  reach->add_flag("--tangible", reach_tangible, "after vanishing elimination");
  reach->add_option("--state-limit", state_limit, "maximum number of states");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of visits and occupancy");
  ModelSource sim_src;
  sim_src.add_to(sim);
  long long runs = 100000;
  sim->add_option("--runs", runs, "number of simulated sessions");

  // mine / stats / estimate
  auto* mine = app.add_subcommand("mine", "parse and sessionize a log into session JSON lines");
  LogSource mine_src;
  mine_src.add_to(mine, false);

  auto* stats = app.add_subcommand("stats", "log and session statistics");
  LogSource stats_src;
  stats_src.add_to(stats, true);

  auto* est = app.add_subcommand("estimate", "maximum-likelihood rates from sessions");
  LogSource est_src;
  est_src.add_to(est, true);
  ModelSource est_model;
  est_model.add_to(est, false);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Markov-mixture clustering of sessions");
  LogSource cl_src;
  cl_src.add_to(cluster, true);
  std::string k_opt = "auto", alphabet = "page";
  std::size_t k_max = 8, top_n = 10, diagram = 0;
  EmOptions em;
  bool model_json = false;
  cluster->add_option("--k", k_opt, "number of clusters or 'auto'");
  cluster->add_option("--k-max", k_max, "largest K tried by 'auto'")->check(CLI::PositiveNumber);
  cluster->add_option("--tol", em.tol, "relative convergence tolerance")->check(CLI::NonNegativeNumber);
  cluster->add_option("--max-iter", em.max_iter, "EM iteration limit")->check(CLI::PositiveNumber);
  cluster->add_option("--restarts", em.restarts, "random restarts per K")->check(CLI::PositiveNumber);
  cluster->add_option("--smoothing", em.smoothing, "additive count smoothing")->check(CLI::NonNegativeNumber);
  cluster->add_option("--alphabet", alphabet, "page or category")->check(CLI::IsMember({"page", "category"}));
  cluster->add_option("--top", top_n, "transitions listed per cluster");
  cluster->add_option("--diagram", diagram, "print the DOT diagram of this cluster (1-based)");
  cluster->add_flag("--model-json", model_json, "print the fitted model as JSON");

  // fit-topology
  auto* fit = app.add_subcommand("fit-topology", "reconstruct enabling sets from published sojourn times");
  std::string fit_fixture = "kupikniga";
  unsigned max_mult = 1;
  double fit_tol = 0.02;
  fit->add_option("--fixture", fit_fixture, "built-in fixture (kupikniga)");
  fit->add_option("--max-multiplicity", max_mult, "parallel arcs per symbol")->check(CLI::Range(1, 3));
  fit->add_option("--tolerance", fit_tol, "relative residual counted as a hit")->check(CLI::PositiveNumber);

  // report
  auto* report = app.add_subcommand("report", "published vs computed tables and discrepancies");
  std::string rep_fixture = "kupikniga", rep_cluster = "all";
  report->add_option("--fixture", rep_fixture, "built-in fixture (kupikniga)");
  report->add_option("--cluster", rep_cluster, "1, 2 or all")->check(CLI::IsMember({"1", "2", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto fmt = parse_format(g.format);

    if (*solve) {
      const auto net = solve_src.net();
      emit(g, format_measures(analyze(tangible_graph(net, solve_src.params())), fmt));
    } else if (*reach) {
      const auto net = reach_src.net();
      const auto rg = build_reachability_graph(net, reach_src.params(), state_limit);
      if (reach_tangible) {
        const auto tg = eliminate_vanishing(net, rg);
        emit(g, to_dot(tg, net.model().name));
      } else if (reach_dot) {
        emit(g, to_dot(net, rg));
      } else {
        emit(g, reach_listing(net, rg, fmt));
      }
    } else if (*sim) {
      if (runs < 1) throw InputError("--runs must be at least 1");
      const auto net = sim_src.net();
      const auto tg = tangible_graph(net, sim_src.params());
      emit(g, format_simulation(simulate(tg, static_cast<std::uint64_t>(runs), g.seed), fmt));
    } else if (*mine) {
      std::string text;
      for (const auto& s : mine_src.sessions()) text += session_to_json(s) + '\n';
      emit(g, text);
    } else if (*stats) {
      std::optional<ParseResult> parsed;
      const auto sessions = stats_src.sessions(&parsed);
      emit(g, format_stats(mining_stats(sessions, parsed ? &*parsed : nullptr), fmt));
    } else if (*est) {
      const auto sessions = est_src.sessions();
      const auto net = est_model.net();
      const auto r = estimate_rates(sessions, est_src.catalog(), net);
      emit(g, write_params(r.rates, "estimated from " + std::to_string(sessions.size()) + " sessions"));
    } else if (*cluster) {
      const auto sessions = cl_src.sessions();
      const auto corpus = corpus_from_sessions(
          sessions, alphabet == "page" ? SequenceAlphabet::page : SequenceAlphabet::category);
      em.seed = g.seed;
      MarkovMixtureModel model;
      std::vector<KScore> scores;
      if (k_opt == "auto") {
        auto sel = select_k(corpus, k_max, em);
        model = std::move(sel.model);
        scores = std::move(sel.scores);
      } else {
        std::size_t k = 0;
        try {
          k = std::stoul(k_opt);
        } catch (const std::exception&) {
          throw InputError("--k must be 'auto' or a positive integer");
        }
        if (k < 1) throw InputError("--k must be at least 1");
        model = em_fit_best(corpus, k, em);
        scores.push_back({k, model.log_likelihood, model.bic(), model.free_parameters()});
      }
      if (diagram > 0) {
        emit(g, export_cluster_diagram(model, diagram - 1));
      } else if (model_json) {
        emit(g, model_to_json(model).dump(2) + "\n");
      } else {
        emit(g, format_cluster_report(model, cluster_report(model, corpus, top_n), scores, fmt));
      }
    } else if (*fit) {
      if (fit_fixture != "kupikniga") throw InputError("unknown fixture '" + fit_fixture + "'");
      auto p = fixture::fit_problem(max_mult);
      p.tolerance = fit_tol;
      emit(g, format_fit(fit_enabling_sets(p), fmt));
    } else if (*report) {
      if (rep_fixture != "kupikniga") throw InputError("unknown fixture '" + rep_fixture + "'");
      std::vector<ClusterReproduction> cl;
      if (rep_cluster != "2") cl.push_back(reproduce_cluster(1));
      if (rep_cluster != "1") cl.push_back(reproduce_cluster(2));
      emit(g, format_report(cl, fmt));
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const NotEnabledError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
