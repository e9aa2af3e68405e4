#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "navgspn/fixture.hpp"
#include "navgspn/model_io.hpp"

using namespace navgspn;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const std::string kFixtures = std::string(NAVGSPN_SOURCE_DIR) + "/fixtures/";

}  // namespace

TEST(ModelFile, ParsesAllDirectives) {
  const auto m = parse_model(R"(# comment
net demo
place P init=2 category=A   # trailing comment
place Q
param r
timed t1 rate=r in=P:2 out=Q
timed t2 rate=0.5 in=Q out=
immediate i1 weight=3 priority=2 in=P out=Q,P
)");
  EXPECT_EQ(m.name, "demo");
  ASSERT_EQ(m.places.size(), 2u);
  EXPECT_EQ(m.places[0].initial, 2u);
  EXPECT_EQ(m.places[0].category, "A");
  ASSERT_EQ(m.transitions.size(), 3u);
  EXPECT_EQ(*m.transitions[0].symbol(), "r");
  EXPECT_EQ(m.transitions[0].inputs[0].multiplicity, 2u);
  EXPECT_DOUBLE_EQ(std::get<double>(m.transitions[1].rate), 0.5);
  EXPECT_TRUE(m.transitions[1].outputs.empty());
  EXPECT_FALSE(m.transitions[2].timed());
  EXPECT_EQ(m.transitions[2].priority, 2u);
  EXPECT_EQ(m.transitions[2].outputs.size(), 2u);
  EXPECT_TRUE(validate_model(m).ok());
}

TEST(ModelFile, Errors) {
  EXPECT_THROW(parse_model("bogus line"), InputError);
  EXPECT_THROW(parse_model("place P init=x"), InputError);
  EXPECT_THROW(parse_model("timed t in=P out=Q"), InputError);          // no rate
  EXPECT_THROW(parse_model("timed t rate=1 in=P"), InputError);         // no out
  EXPECT_THROW(parse_model("timed t rate=1 in=P:0x out=Q"), InputError);
  EXPECT_THROW(parse_model("immediate i weight=w in=P out=Q"), InputError);
  EXPECT_THROW(parse_model("timed t rate=1 priority=2 in=P out=Q"), InputError);
}

TEST(ModelFile, ErrorNamesLine) {
  try {
    parse_model("net x\nplace P\nfrobnicate", "m.gspn");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("m.gspn:3"), std::string::npos) << e.what();
  }
}

TEST(ModelFile, MissingFileNamesPath) {
  try {
    load_model("/nonexistent/x.gspn");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/x.gspn"), std::string::npos);
  }
}

TEST(ModelFile, WriteRoundTrip) {
  const auto m = fixture::model();
  const auto text = write_model(m);
  EXPECT_EQ(write_model(parse_model(text)), text);
}

TEST(ParamFile, Parses) {
  const auto p = parse_params("# rates\nalpha = 0.5\n  beta=2e-3  # c\n");
  EXPECT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p.at("beta"), 2e-3);
}

TEST(ParamFile, Errors) {
  EXPECT_THROW(parse_params("alpha 0.5"), InputError);
  EXPECT_THROW(parse_params("alpha = -1"), InputError);
  EXPECT_THROW(parse_params("alpha = 0"), InputError);
  EXPECT_THROW(parse_params("alpha = 1\nalpha = 2"), InputError);
  EXPECT_THROW(parse_params("alpha = 1x"), InputError);
  EXPECT_THROW(load_params("/nonexistent/p.params"), InputError);
}

TEST(Fixture, FilesMatchBuiltIn) {
  EXPECT_EQ(slurp(kFixtures + "kupikniga.gspn"), fixture::kupikniga_model);
  EXPECT_EQ(slurp(kFixtures + "cluster1.params"), fixture::cluster1_params);
  EXPECT_EQ(slurp(kFixtures + "cluster2.params"), fixture::cluster2_params);
  EXPECT_EQ(slurp(kFixtures + "pages.tsv"), fixture::pages_table);
}

TEST(Fixture, ParametersAsPublished) {
  const auto c1 = fixture::params(1), c2 = fixture::params(2);
  EXPECT_EQ(c1.size(), 10u);
  EXPECT_DOUBLE_EQ(c1.at("alpha"), 0.000009);
  EXPECT_DOUBLE_EQ(c1.at("theta"), 0.000882);
  EXPECT_DOUBLE_EQ(c2.at("lambda"), 0.008621);
  EXPECT_DOUBLE_EQ(c2.at("beta"), 0.055556);
}

TEST(Fixture, DeltaDerivation) {
  // delta = 1/ST(M_D3) - beta - mu
  for (int c : {1, 2}) {
    const auto p = fixture::params(c);
    const double st = fixture::published(c).sojourn_s[7];
    EXPECT_NEAR(p.at("delta"), 1.0 / st - p.at("beta") - p.at("mu"), 1e-10);
  }
}

TEST(Fixture, InDegreesMatchTransitionNames) {
  const auto net = Net::compile(fixture::model());
  for (const auto& ps : fixture::place_symbols) {
    unsigned in = 0;
    for (TransitionId t = 0; t < net.num_transitions(); ++t) {
      const auto& tr = net.transition(t);
      if (tr.outputs.size() == 1 && tr.outputs[0].place == ps.place) {
        ++in;
        EXPECT_EQ(*tr.symbol(), ps.symbol) << tr.name;
      }
    }
    EXPECT_EQ(in, ps.in_degree) << ps.place;
  }
}
