#include <gtest/gtest.h>

#include "navgspn/fixture.hpp"
#include "navgspn/simulate.hpp"

using namespace navgspn;

namespace {

TangibleGraph small_chain() {
  TangibleGraph g;
  for (int i = 0; i < 4; ++i) g.states.push_back({Marking{{}}, i == 3, "S" + std::to_string(i)});
  g.edges = {{0, 0, "a", 1.0}, {0, 1, "b", 2.0}, {0, 3, "c", 0.5}, {1, 0, "d", 1.0},
             {1, 2, "e", 3.0}, {2, 2, "f", 4.0}, {2, 3, "g", 1.0}, {2, 0, "h", 0.5}};
  g.initial = {0.7, 0.3, 0.0, 0.0};
  return g;
}

}  // namespace

TEST(Simulate, AbsorbingStartGivesZeros) {
  auto g = small_chain();
  const std::vector<double> start = {0, 0, 0, 1};
  const auto r = simulate(g, start, 100, 1);
  for (const auto& row : r.rows) {
    if (row.absorbing) continue;
    EXPECT_EQ(row.visits, 0.0);
    EXPECT_EQ(row.occupancy, 0.0);
  }
  EXPECT_EQ(r.absorption_time, 0.0);
}

TEST(Simulate, SameSeedSameOutput) {
  const auto g = fixture::graph(2);
  EXPECT_EQ(format_simulation(simulate(g, 2000, 5), OutputFormat::csv),
            format_simulation(simulate(g, 2000, 5), OutputFormat::csv));
  EXPECT_NE(format_simulation(simulate(g, 2000, 5), OutputFormat::csv),
            format_simulation(simulate(g, 2000, 6), OutputFormat::csv));
}

TEST(Simulate, ZeroRunsRejected) { EXPECT_THROW(simulate(small_chain(), 0, 1), InputError); }

TEST(Simulate, WrongInitialLength) {
  const std::vector<double> start = {1.0};
  EXPECT_THROW(simulate(small_chain(), start, 10, 1), InputError);
}

TEST(Simulate, AgreesWithAnalyticWithinThreeStandardErrors) {
  const auto g = small_chain();
  const auto m = analyze(g);
  const auto r = simulate(g, 200000, 77);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.states[i].absorbing) continue;
    EXPECT_NEAR(r.rows[i].visits, m.rows[i].visits, 3 * r.rows[i].visits_se) << m.rows[i].marking;
    EXPECT_NEAR(r.rows[i].occupancy, m.rows[i].occupancy, 3 * r.rows[i].occupancy_se) << m.rows[i].marking;
  }
  EXPECT_NEAR(r.absorption_time, m.session_duration, 3 * r.absorption_time_se);
}
