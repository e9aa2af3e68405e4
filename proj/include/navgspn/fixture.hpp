#pragma once

// Built-in bookstore navigation fixture. The same text ships under fixtures/
// (a unit test keeps the two in sync), together with the published
// per-marking tables used by the reproduction report.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "navgspn/model_io.hpp"
#include "navgspn/reachability.hpp"
#include "navgspn/topology_fit.hpp"

namespace navgspn::fixture {

inline constexpr std::string_view kupikniga_model = R"GSPN(# Navigation model of an online bookstore: 10 places, 44 timed transitions.
# Each place holds the single user token while the user is on a page of that
# kind; E is the ended session (absorbing). A transition's rate symbol is
# determined by the place it leads to. Source places were reconstructed by
# fit-topology against the published sojourn times under both clusters.
net kupikniga

place A init=1 category=A
place B category=B
place E
place L category=C
place ML category=C
place C category=C
place D1 category=D
place D2 category=D
place D3 category=D
place D4 category=D

param alpha
param lambda
param mu
param kappa
param nu
param theta
param epsilon
param gamma
param delta
param beta

# visit an A category page
timed tA_cont rate=alpha in=A out=A
timed tA1 rate=alpha in=B out=A
timed tA2 rate=alpha in=C out=A
timed tA3 rate=alpha in=D1 out=A
timed tA4 rate=alpha in=D2 out=A
timed tA5 rate=alpha in=D3 out=A
timed tA6 rate=alpha in=D4 out=A

# visit a B category page
timed tB rate=lambda in=A out=B
timed tB_cont rate=lambda in=B out=B
timed tB1 rate=lambda in=C out=B
timed tB2 rate=lambda in=D1 out=B
timed tB3 rate=lambda in=D2 out=B
timed tB4 rate=lambda in=D2 out=B
timed tB5 rate=lambda in=D2 out=B

# end the session
timed tE_A rate=mu in=A out=E
timed tE_B rate=mu in=B out=E
timed tE_L rate=mu in=L out=E
timed tE_ML rate=mu in=ML out=E
timed tE_C rate=mu in=C out=E
timed tE_D1 rate=mu in=D1 out=E
timed tE_D2 rate=mu in=D2 out=E
timed tE_D3 rate=mu in=D3 out=E
timed tE_D4 rate=mu in=D4 out=E

# login
timed tL rate=kappa in=A out=L
timed tL1 rate=kappa in=B out=L
timed tL2 rate=kappa in=D1 out=L
timed tL_cont rate=kappa in=L out=L

# visit MyLounge
timed tML rate=nu in=L out=ML
timed tML1 rate=nu in=C out=ML
timed tML2 rate=nu in=D1 out=ML
timed tML3 rate=nu in=D2 out=ML
timed tML4 rate=nu in=D3 out=ML
timed tML5 rate=nu in=D4 out=ML
timed tML_cont rate=nu in=ML out=ML

# visit a C category page
timed tC rate=theta in=ML out=C
timed tC_cont rate=theta in=C out=C

# AddToCart
timed tD1 rate=epsilon in=A out=D1
timed tD1_cont rate=epsilon in=D1 out=D1

# AddressEntry
timed tD2 rate=gamma in=D1 out=D2
timed tD2_cont rate=gamma in=D2 out=D2

# LastCartPreview
timed tD3 rate=delta in=D4 out=D3
timed tD3_cont rate=delta in=D3 out=D3

# PayingCasys
timed tD4 rate=beta in=D2 out=D4
timed tD4_cont rate=beta in=D3 out=D4
)GSPN";

inline constexpr std::string_view cluster1_params = R"PAR(# Firing rates (1/s), cluster 1, as published.
alpha = 0.000009
lambda = 0.000059
mu = 0.000003
kappa = 0.000004
nu = 0.000107
theta = 0.000882
epsilon = 0.000073
gamma = 0.083333
beta = 0.047619
# delta is not published. Derived as 1/ST(M_D3) - beta - mu with
# ST(M_D3) = 9.38 s, taking {beta, delta, mu} as the dominant rates of M_D3.
delta = 0.0589878081
)PAR";

inline constexpr std::string_view cluster2_params = R"PAR(# Firing rates (1/s), cluster 2, as published.
alpha = 0.000033
lambda = 0.008621
mu = 0.000003
kappa = 0.000003
nu = 0.000080
theta = 0.001027
epsilon = 0.000208
gamma = 0.050000
beta = 0.055556
# delta is not published. Derived as 1/ST(M_D3) - beta - mu with
# ST(M_D3) = 13.44 s, taking {beta, delta, mu} as the dominant rates of M_D3.
delta = 0.0188457619
)PAR";

inline constexpr std::string_view pages_table = R"TSV(# page	category	place
Registration	A	A
ListBooksforCategory	A	A
Default	A	A
NewProducts	A	A
BestSellers	A	A
ProductDiscounts	A	A
News	A	A
Publisher	A	A
BookStoreMenu	A	A
SearchPreview	A	A
ContactUs	A	A
Help	A	A
BookDetails	A	A
ReadPDF	A	A
AboutUs	B	B
GeneralProvisions	B	B
ProtectPersonalData	B	B
DeliveryPolitics	B	B
BackPolicy	B	B
HelpOrders	B	B
HelpRegistration	B	B
Marketing	B	B
LogIn	C	L
MyLoungeDef	C	ML
UserProfile	C	C
UserAddress	C	C
UserOrders	C	C
SavedForLater	C	C
NewsLetter	C	C
UserReferrals	C	C
ImportCSV	C	C
HelpUser	C	C
AddToCart	D	D1
AddressEntry	D	D2
LastCartPreview	D	D3
PayingCasys2	D	D4
)TSV";

// Transient markings in table order.
inline constexpr std::array<std::string_view, 9> markings = {"M_A",  "M_B",  "M_L",  "M_ML", "M_C",
                                                             "M_D1", "M_D2", "M_D3", "M_D4"};

struct PublishedColumn {
  std::array<double, 9> sojourn_s;      // average sojourn per visit
  std::array<double, 9> total_time_s;   // "total time" table, see report
  std::array<double, 9> visits;         // average number of visits
  std::array<double, 9> cumulative_s;   // cumulative sojourn
  double session_duration_s;
};

inline constexpr PublishedColumn cluster1 = {
    {6796.70, 13451.82, 8820.74, 1008.46, 943.99, 11.96, 7.63, 9.38, 16.95},
    {32577.45, 338538, 13496.14, 8099.07, 40131.37, 28.48, 49.65, 40.07, 13241.97},
    {3.501551, 3.828545, 0.996941, 5.182163, 5.164502, 1.839687, 1.835698, 1.828880, 1.823379},
    {23798.99, 51500.88, 8793.76, 5226.02, 4875.23, 22.01, 14, 17.15, 30.9},
    94278.95,
};

inline constexpr PublishedColumn cluster2 = {
    {112.76, 115.47, 11582.01, 901.15, 102.42, 16.96, 8.75, 13.44, 53.08},
    {645.74, 142562.3, 23.42, 3.04, 0.36, 2.29, 1.78, 5.24, 6.06},
    {11.593189, 12.600198, 1.062461, 1.035813, 1.032780, 0.273193, 0.232543, 0.200941, 0.107744},
    {1307.2, 1454.9, 12305.43, 933.43, 105.78, 4.63, 2.03, 2.7, 5.72},
    16121.82,
};

inline const PublishedColumn& published(int cluster) { return cluster == 1 ? cluster1 : cluster2; }
inline std::string_view params_text(int cluster) { return cluster == 1 ? cluster1_params : cluster2_params; }

// Rate symbol carried by transitions into each place, and the number of
// transitions into it implied by the transition names (tA_cont, tA1..tA6 ...).
struct PlaceSymbol {
  std::string_view place;
  std::string_view symbol;
  unsigned in_degree;
};
inline constexpr std::array<PlaceSymbol, 10> place_symbols = {{
    {"A", "alpha", 7},
    {"B", "lambda", 7},
    {"E", "mu", 9},
    {"L", "kappa", 4},
    {"ML", "nu", 7},
    {"C", "theta", 2},
    {"D1", "epsilon", 2},
    {"D2", "gamma", 2},
    {"D3", "delta", 2},
    {"D4", "beta", 2},
}};

inline GspnModel model() { return parse_model(kupikniga_model, "kupikniga"); }
inline ParameterSet params(int cluster) { return parse_params(params_text(cluster)); }
inline TangibleGraph graph(int cluster) {
  const auto net = Net::compile(model());
  return tangible_graph(net, params(cluster));
}

// Enabling-set reconstruction against the published sojourn times of both
// clusters. With max_multiplicity > 1 the assignment may use parallel arcs,
// but the search gets expensive quickly.
inline FitProblem fit_problem(unsigned max_multiplicity = 1) {
  FitProblem p;
  for (const auto& ps : place_symbols) {
    p.symbols.emplace_back(ps.symbol);
    p.required_uses[std::string(ps.symbol)] = ps.in_degree;
  }
  p.catalogs = {params(1), params(2)};
  p.catalog_names = {"cluster1", "cluster2"};
  for (std::size_t i = 0; i < markings.size(); ++i)
    p.targets.push_back({std::string(markings[i]), {cluster1.sojourn_s[i], cluster2.sojourn_s[i]}});
  p.mandatory = {"mu"};
  p.max_multiplicity = max_multiplicity;
  return p;
}

}  // namespace navgspn::fixture
