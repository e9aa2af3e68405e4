#pragma once

// Side-by-side comparison of the published per-marking tables with values
// computed from the built-in fixture, plus a list of known inconsistencies.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navgspn/ctmc.hpp"
#include "navgspn/fixture.hpp"
#include "navgspn/format.hpp"

namespace navgspn {

inline double relative_error(double computed, double reference) {
  if (reference == 0.0) return computed == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(computed - reference) / std::abs(reference);
}

// Rounds to `digits` significant figures.
inline double round_sig(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  const double mag = std::floor(std::log10(std::abs(v)));
  const double scale = std::pow(10.0, digits - 1 - mag);
  return std::round(v * scale) / scale;
}

struct ComparisonRow {
  std::string marking;
  double published = 0.0;
  double computed = 0.0;
  double rel_error = 0.0;
  bool within = false;
};

struct ComparisonTable {
  std::string title;
  double tolerance = 0.0;
  std::vector<ComparisonRow> rows;

  std::size_t hits() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.within;
    return n;
  }
};

struct ClusterReproduction {
  int cluster = 1;
  TransientMeasures measures;
  ComparisonTable sojourn;      // computed from the fixture
  ComparisonTable visits;
  ComparisonTable cumulative;
  ComparisonRow session;
  ComparisonTable arithmetic;   // published visits x published sojourn vs published cumulative
  ComparisonRow arithmetic_sum; // sum of the products vs published session duration
  ComparisonTable total_time;   // published "total time" vs published visits x sojourn
};

inline constexpr double kSojournTolerance = 0.02;

inline ClusterReproduction reproduce_cluster(int cluster) {
  const auto& pub = fixture::published(cluster);
  ClusterReproduction r;
  r.cluster = cluster;
  r.measures = analyze(fixture::graph(cluster));

  auto row = [](std::string_view m, double p, double c, bool within) {
    return ComparisonRow{std::string(m), p, c, relative_error(c, p), within};
  };

  r.sojourn = {"Average sojourn time per visit [s]", kSojournTolerance, {}};
  r.visits = {"Average number of visits", kSojournTolerance, {}};
  r.cumulative = {"Cumulative sojourn time [s]", kSojournTolerance, {}};
  r.arithmetic = {"Published visits x published sojourn vs published cumulative [s]", 0.0, {}};
  r.total_time = {"Published total time vs published visits x sojourn [s]", kSojournTolerance, {}};

  double sum = 0.0;
  for (std::size_t i = 0; i < fixture::markings.size(); ++i) {
    const auto m = fixture::markings[i];
    const auto& c = r.measures.at(m);
    auto add = [&](ComparisonTable& t, double p, double v) {
      t.rows.push_back(row(m, p, v, relative_error(v, p) <= t.tolerance));
    };
    add(r.sojourn, pub.sojourn_s[i], c.sojourn);
    add(r.visits, pub.visits[i], c.visits);
    add(r.cumulative, pub.cumulative_s[i], c.cumulative);

    const double nst = pub.visits[i] * pub.sojourn_s[i];
    sum += nst;
    r.arithmetic.rows.push_back(row(m, pub.cumulative_s[i], nst, round_sig(nst, 4) == round_sig(pub.cumulative_s[i], 4)));
    r.total_time.rows.push_back(row(m, pub.total_time_s[i], nst, relative_error(pub.total_time_s[i], nst) <= kSojournTolerance));
  }
  r.session = row("session", pub.session_duration_s, r.measures.session_duration,
                  relative_error(r.measures.session_duration, pub.session_duration_s) <= kSojournTolerance);
  r.arithmetic_sum = row("session", pub.session_duration_s, sum, std::abs(sum - pub.session_duration_s) <= 0.01);
  return r;
}

struct Discrepancy {
  std::string topic;
  std::string detail;
};

inline std::vector<Discrepancy> discrepancies(const std::vector<ClusterReproduction>& clusters) {
  std::vector<Discrepancy> out;
  char buf[512];
  for (const auto& c : clusters) {
    std::size_t bad = 0;
    std::string worst;
    double worst_err = 0.0;
    for (const auto& r : c.total_time.rows) {
      if (r.within) continue;
      ++bad;
      if (r.rel_error > worst_err) {
        worst_err = r.rel_error;
        std::snprintf(buf, sizeof buf, "%s %.2f vs %.2f", r.marking.c_str(), r.published, r.computed);
        worst = buf;
      }
    }
    std::snprintf(buf, sizeof buf,
                  "cluster %d: %zu of %zu published total-time entries are inconsistent with x = n∘ST "
                  "(published visits times published sojourn), e.g. %s",
                  c.cluster, bad, c.total_time.rows.size(), worst.c_str());
    out.push_back({"total time table", buf});
  }
  for (const auto& c : clusters) {
    const auto p = fixture::params(c.cluster);
    std::snprintf(buf, sizeof buf,
                  "cluster %d: delta is not published; the fixture uses delta = %.10g = 1/ST(M_D3) - beta - mu",
                  c.cluster, p.at("delta"));
    out.push_back({"missing delta", buf});
  }
  for (const auto& c : clusters) {
    for (const auto& r : c.sojourn.rows) {
      if (r.within) continue;
      std::snprintf(buf, sizeof buf,
                    "cluster %d: %s sojourn %.2f s vs published %.2f s (%.1f%%); the arc counts per target place force "
                    "surplus lambda arcs onto one place and no assignment keeps every cluster-2 sojourn within 2%%",
                    c.cluster, r.marking.c_str(), r.computed, r.published, 100.0 * r.rel_error);
      out.push_back({"irreconcilable sojourn", buf});
    }
  }
  for (const auto& c : clusters) {
    std::snprintf(buf, sizeof buf,
                  "cluster %d: computed session duration %.2f s vs published %.2f s; every place has an end-session "
                  "arc at rate mu, so time to absorption is exponential with mean 1/mu whatever the topology",
                  c.cluster, c.measures.session_duration, c.session.published);
    out.push_back({"session duration", buf});
  }
  for (const auto& c : clusters) {
    std::size_t miss = c.visits.rows.size() - c.visits.hits();
    std::snprintf(buf, sizeof buf,
                  "cluster %d: %zu of %zu visit counts differ from the published values by more than 2%%; they follow "
                  "from the reconstructed topology, which sojourn times alone do not determine",
                  c.cluster, miss, c.visits.rows.size());
    out.push_back({"visit counts", buf});
  }
  for (const auto& c : clusters) {
    std::vector<std::string> off;
    for (const auto& r : c.arithmetic.rows)
      if (!r.within) off.push_back(r.marking);
    std::string list;
    for (const auto& m : off) list += (list.empty() ? "" : ", ") + m;
    std::snprintf(buf, sizeof buf,
                  "cluster %d: published visits x published sojourn sums to %.2f s vs %.2f s; entries off at 4 "
                  "significant figures: %s",
                  c.cluster, c.arithmetic_sum.computed, c.arithmetic_sum.published, list.empty() ? "none" : list.c_str());
    out.push_back({"cumulative arithmetic", buf});
  }
  return out;
}

namespace detail {

inline void print_table(std::ostringstream& os, const ComparisonTable& t, bool flag = true) {
  char buf[200];
  os << "  " << t.title << '\n';
  std::snprintf(buf, sizeof buf, "    %-8s %16s %16s %10s\n", "Marking", "Published", "Computed", "Rel.err");
  os << buf;
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "    %-8s %16.6f %16.6f %9.3f%%%s\n", r.marking.c_str(), r.published, r.computed,
                  100.0 * r.rel_error, flag && !r.within ? "  *" : "");
    os << buf;
  }
}

inline nlohmann::ordered_json table_json(const ComparisonTable& t) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"marking", r.marking},
                    {"published", r.published},
                    {"computed", json_num(r.computed)},
                    {"rel_error", json_num(r.rel_error)},
                    {"within", r.within}});
  return {{"title", t.title}, {"rows", rows}};
}

}  // namespace detail

inline std::string format_report(const std::vector<ClusterReproduction>& clusters, OutputFormat f) {
  const auto issues = discrepancies(clusters);
  std::ostringstream os;
  if (f == OutputFormat::json) {
    nlohmann::ordered_json j;
    auto cl = nlohmann::ordered_json::array();
    for (const auto& c : clusters) {
      cl.push_back({{"cluster", c.cluster},
                    {"sojourn", detail::table_json(c.sojourn)},
                    {"visits", detail::table_json(c.visits)},
                    {"cumulative", detail::table_json(c.cumulative)},
                    {"session_duration_s",
                     {{"published", c.session.published}, {"computed", c.session.computed}, {"rel_error", c.session.rel_error}}},
                    {"published_arithmetic", detail::table_json(c.arithmetic)},
                    {"published_arithmetic_sum_s", c.arithmetic_sum.computed},
                    {"total_time_check", detail::table_json(c.total_time)}});
    }
    j["clusters"] = cl;
    auto d = nlohmann::ordered_json::array();
    for (const auto& x : issues) d.push_back({{"topic", x.topic}, {"detail", x.detail}});
    j["discrepancies"] = d;
    os << j.dump(2) << '\n';
    return os.str();
  }
  if (f == OutputFormat::csv) {
    os << "cluster,table,marking,published,computed,rel_error,within\n";
    for (const auto& c : clusters) {
      auto dump = [&](const char* name, const ComparisonTable& t) {
        for (const auto& r : t.rows)
          os << c.cluster << ',' << name << ',' << r.marking << ',' << detail::num(r.published) << ','
             << detail::num(r.computed) << ',' << detail::num(r.rel_error) << ',' << (r.within ? 1 : 0) << '\n';
      };
      dump("sojourn", c.sojourn);
      dump("visits", c.visits);
      dump("cumulative", c.cumulative);
      os << c.cluster << ",session,session," << detail::num(c.session.published) << ','
         << detail::num(c.session.computed) << ',' << detail::num(c.session.rel_error) << ','
         << (c.session.within ? 1 : 0) << '\n';
      dump("published_arithmetic", c.arithmetic);
      dump("total_time_check", c.total_time);
    }
    return os.str();
  }
  char buf[256];
  for (const auto& c : clusters) {
    os << "Cluster " << c.cluster << '\n';
    detail::print_table(os, c.sojourn);
    std::snprintf(buf, sizeof buf, "    %zu of %zu within %.0f%%\n", c.sojourn.hits(), c.sojourn.rows.size(),
                  100.0 * c.sojourn.tolerance);
    os << buf;
    detail::print_table(os, c.visits);
    detail::print_table(os, c.cumulative);
    std::snprintf(buf, sizeof buf, "  Session duration: published %.2f s, computed %.2f s (%.2f%%)\n",
                  c.session.published, c.session.computed, 100.0 * c.session.rel_error);
    os << buf;
    detail::print_table(os, c.arithmetic);
    std::snprintf(buf, sizeof buf, "    sum %.2f s vs published %.2f s\n", c.arithmetic_sum.computed,
                  c.arithmetic_sum.published);
    os << buf;
    detail::print_table(os, c.total_time);
    os << '\n';
  }
  os << "DISCREPANCIES\n";
  for (const auto& d : issues) os << "  [" << d.topic << "] " << d.detail << '\n';
  return os.str();
}

}  // namespace navgspn
