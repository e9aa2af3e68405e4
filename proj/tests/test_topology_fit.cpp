#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "navgspn/fixture.hpp"
#include "navgspn/topology_fit.hpp"

using namespace navgspn;

namespace {

const FitResult& fixture_fit() {
  static const FitResult r = fit_enabling_sets(fixture::fit_problem());
  return r;
}

using Set = std::set<std::string>;

}  // namespace

TEST(TopologyFit, SingletonExact) {
  FitProblem p;
  p.symbols = {"a", "b", "c"};
  p.catalogs = {ParameterSet({{"a", 0.5}, {"b", 0.25}, {"c", 0.125}})};
  p.catalog_names = {"only"};
  p.targets = {{"X", {1.0 / 0.75}}, {"Y", {8.0}}};
  p.required_uses = {{"a", 1}, {"b", 1}, {"c", 1}};
  const auto r = fit_enabling_sets(p);
  EXPECT_EQ(r.symbol_set(r.at("X").best), (Set{"a", "b"}));
  EXPECT_EQ(r.symbol_set(r.at("Y").best), (Set{"c"}));
  EXPECT_NEAR(r.at("X").best.joint, 0.0, 1e-12);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.total_misses, 0u);
}

TEST(TopologyFit, InfeasibleCounts) {
  FitProblem p;
  p.symbols = {"a"};
  p.catalogs = {ParameterSet({{"a", 1.0}})};
  p.targets = {{"X", {1.0}}};
  p.required_uses = {{"a", 3}};
  EXPECT_FALSE(fit_enabling_sets(p).feasible);
}

TEST(TopologyFit, FixtureMarkLoginBest) {
  const auto& r = fixture_fit();
  const auto& ml = r.at("M_ML");
  EXPECT_EQ(r.symbol_set(ml.best), (Set{"mu", "nu", "theta"}));
  EXPECT_LT(ml.best.residuals[0], 0.001);
  EXPECT_LT(ml.best.residuals[1], 0.001);
}

TEST(TopologyFit, FixtureHomeBest) {
  const auto& r = fixture_fit();
  EXPECT_EQ(r.symbol_set(r.at("M_A").best), (Set{"alpha", "lambda", "mu", "kappa", "epsilon"}));
}

TEST(TopologyFit, AssignmentRespectsCounts) {
  const auto& r = fixture_fit();
  ASSERT_TRUE(r.feasible);
  std::map<std::string, unsigned> used;
  for (const auto& m : r.markings) {
    ASSERT_TRUE(m.assigned.has_value()) << m.marking;
    for (std::size_t i = 0; i < r.symbols.size(); ++i) used[r.symbols[i]] += m.assigned->multiplicity[i];
  }
  // targets cover the nine transient markings; the absorbing one has no arcs out
  for (const auto& ps : fixture::place_symbols)
    EXPECT_LE(used[std::string(ps.symbol)], ps.in_degree) << ps.symbol;
  for (const auto& m : r.markings) EXPECT_GE(m.assigned->multiplicity[2], 1u) << m.marking;  // mu
}

TEST(TopologyFit, IrreconcilableFlagged) {
  const auto& r = fixture_fit();
  std::size_t flagged = 0;
  for (const auto& m : r.markings) {
    const bool over = std::any_of(m.assigned->residuals.begin(), m.assigned->residuals.end(),
                                  [](double x) { return x > 0.02; });
    EXPECT_EQ(m.irreconcilable, over) << m.marking;
    flagged += m.irreconcilable;
  }
  EXPECT_GE(flagged, 1u);
}

TEST(TopologyFit, Formats) {
  const auto& r = fixture_fit();
  const auto text = format_fit(r, OutputFormat::text);
  EXPECT_NE(text.find("{mu, nu, theta}"), std::string::npos);
  const auto j = nlohmann::json::parse(format_fit(r, OutputFormat::json));
  EXPECT_TRUE(j["markings"].contains("M_D2"));
  const auto csv = format_fit(r, OutputFormat::csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "marking,stage,symbols,joint_residual,irreconcilable");
}
