#include <cmath>
#include <random>

#include "biokinetics/kinetics.hpp"
#include "biokinetics/parameters.hpp"
#include "biokinetics/pathways.hpp"
#include "biokinetics/stoichiometry.hpp"
#include "common/error.hpp"
#include "doctest.h"

using namespace n2olab;
using namespace n2olab::bio;

namespace {

ComponentState typical_state() {
  ComponentState s;
  s[S_O2] = 1.7;
  s[S_NH4] = 4.2;
  s[S_NH2OH] = 0.05;
  s[S_NO2] = 0.6;
  s[S_NO3] = 5.5;
  s[S_NO] = 0.0012;
  s[S_N2O] = 0.3;
  s[S_N2] = 12.0;
  s[S_S] = 3.1;
  s[S_I] = 30.0;
  s[X_S] = 60.0;
  s[X_I] = 1500.0;
  s[X_AOB] = 110.0;
  s[X_NOB] = 40.0;
  s[X_OHO] = 1800.0;
  s.temperature = 16.5;
  return s;
}

ComponentState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ComponentState s;
  const double scale[kNumComponents] = {4, 30, 0.5, 5, 15, 0.05, 2, 20, 50, 40, 200, 2000, 200, 80, 3000};
  for (std::size_t c = 0; c < kNumComponents; ++c) s[c] = scale[c] * u(rng);
  s.temperature = 8.0 + 20.0 * u(rng);
  return s;
}

}  // namespace

TEST_CASE("monod") {
  CHECK(monod(0.0, 0.5) == 0.0);
  CHECK(monod(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(monod(1e9, 0.5) - 1.0) < 1e-6);
  CHECK_THROWS_AS(monod(1.0, 0.0), Error);
  CHECK_THROWS_AS(monod(1.0, -1.0), Error);
  CHECK_THROWS_AS(monod(1.0, std::nan("")), Error);
}

TEST_CASE("haldane") {
  CHECK(haldane(0.0, 0.5, 0.8) == 0.0);
  const double Ks = 0.5, Ki = 0.8, peak = std::sqrt(Ks * Ki);
  const double fpeak = haldane(peak, Ks, Ki);
  for (double d : {1e-3, 1e-2, 0.1}) {
    CHECK(haldane(peak * (1 + d), Ks, Ki) < fpeak);
    CHECK(haldane(peak * (1 - d), Ks, Ki) < fpeak);
  }
  for (double S : {0.01, 0.3, 2.0, 9.0}) {
    CHECK(std::abs(haldane(S, Ks, 1e12) - monod(S, Ks)) < 1e-6);
    CHECK(haldane(S, Ks, Ki) <= monod(S, Ks));
  }
  CHECK(haldane(2.0, Ks, INFINITY) == doctest::Approx(monod(2.0, Ks)));
}

TEST_CASE("stoichiometry conserves nitrogen and COD in every row") {
  const auto k = KineticConstants::from(KineticParameterSet::defaults());
  const auto m = StoichiometryMatrix::build(k);
  for (std::size_t p = 0; p < kNumProcesses; ++p) {
    INFO(kProcessNames[p]);
    CHECK(std::abs(m.nitrogen_residual(p)) < 1e-9);
    CHECK(std::abs(m.cod_residual(p)) < 1e-9);
  }
}

TEST_CASE("stoichiometry conservation holds for perturbed yields and compositions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> f(0.8, 1.2);
  auto set = KineticParameterSet::defaults();
  for (int trial = 0; trial < 50; ++trial) {
    auto s = set;
    for (const auto& n : s.names()) s.set(n, set.get(n) * f(rng));
    const auto m = StoichiometryMatrix::build(KineticConstants::from(s));
    for (std::size_t p = 0; p < kNumProcesses; ++p) {
      CHECK(std::abs(m.nitrogen_residual(p)) < 1e-9);
      CHECK(std::abs(m.cod_residual(p)) < 1e-9);
    }
  }
}

TEST_CASE("zero biomass gives zero biological rates") {
  const auto k = KineticConstants::from(KineticParameterSet::defaults());
  auto s = typical_state();
  s[X_AOB] = s[X_NOB] = s[X_OHO] = 0.0;
  s[X_S] = 0.0;
  for (auto v : {ModelVariant::BaselineTwoPathway, ModelVariant::AlternativeAOB}) {
    const auto r = process_rates(s, k, v);
    for (std::size_t p = 0; p < kNumProcesses; ++p) CHECK(r[p] == 0.0);
  }
}

TEST_CASE("anoxic conditions switch off the aerobic steps") {
  const auto k = KineticConstants::from(KineticParameterSet::defaults());
  auto s = typical_state();
  s[S_O2] = 0.0;
  const auto r = process_rates(s, k, ModelVariant::BaselineTwoPathway);
  CHECK(r[AOB_AMO] == 0.0);
  CHECK(r[AOB_HAO] == 0.0);
  CHECK(r[AOB_HAOstar] == 0.0);
  CHECK(r[NOB_GROWTH] == 0.0);
  CHECK(r[OHO_AEROBIC] == 0.0);
  CHECK(r[AOB_ND] == 0.0);  // Haldane(0) = 0
  CHECK(r[OHO_NIR] > 0.0);
  const auto alt = process_rates(s, k, ModelVariant::AlternativeAOB);
  CHECK(alt[AOB_ND] > 0.0);
}

TEST_CASE("process rates match a factor-by-factor hand evaluation") {
  const auto P = KineticParameterSet::defaults();
  const auto k = KineticConstants::from(P);
  const auto s = typical_state();
  auto g = [&](const char* n) { return P.get(n); };
  auto M = [](double S, double K) { return S / (K + S); };
  auto I = [](double S, double K) { return K / (K + S); };
  const double T = s.temperature;
  const double fa = std::pow(g("theta_AOB"), T - 20), fn = std::pow(g("theta_NOB"), T - 20),
               fo = std::pow(g("theta_OHO"), T - 20), fd = std::pow(g("theta_decay"), T - 20),
               fh = std::pow(g("theta_hyd"), T - 20);
  const double O2 = s[S_O2];

  ProcessRateSet e;
  e[AOB_AMO] = g("q_AOB_AMO") * fa * M(O2, g("K_AOB_O2_AMO")) * M(s[S_NH4], g("K_AOB_NH4")) * s[X_AOB];
  e[AOB_HAO] = g("mu_AOB_HAO") * fa * M(O2, g("K_AOB_O2_HAO")) * M(s[S_NH2OH], g("K_AOB_NH2OH")) * s[X_AOB];
  e[AOB_HAOstar] = g("q_AOB_HAOstar") * fa * M(O2, g("K_AOB_O2_HAO")) * M(s[S_NO], g("K_AOB_HAO_NO")) * s[X_AOB];
  e[AOB_NN] = g("q_AOB_NN") * fa * M(s[S_NH2OH], g("K_AOB_NH2OH")) * M(s[S_NO], g("K_AOB_NO_NN")) * s[X_AOB];
  const double hal = O2 / (g("K_AOB_O2_ND") + O2 + O2 * O2 / g("K_AOB_I_O2"));
  e[AOB_ND] = g("q_AOB_ND") * fa * M(s[S_NH2OH], g("K_AOB_NH2OH_ND")) * M(s[S_NO2], g("K_AOB_NO2_ND")) * hal *
              s[X_AOB];
  e[NOB_GROWTH] = g("mu_NOB") * fn * M(O2, g("K_NOB_O2")) * M(s[S_NO2], g("K_NOB_NO2")) *
                  M(s[S_NH4], g("K_NOB_NH4")) * s[X_NOB];
  const double nh4 = M(s[S_NH4], g("K_OHO_NH4"));
  e[OHO_AEROBIC] = g("mu_OHO") * fo * M(s[S_S], g("K_OHO_S")) * M(O2, g("K_OHO_O2")) * nh4 * s[X_OHO];
  const double ax = g("mu_OHO") * fo * M(s[S_S], g("K_OHO_S_anox")) * I(O2, g("K_OHO_I_O2")) * nh4 * s[X_OHO];
  e[OHO_NAR] = ax * g("eta_NAR") * M(s[S_NO3], g("K_OHO_NO3"));
  e[OHO_NIR] = ax * g("eta_NIR") * M(s[S_NO2], g("K_OHO_NO2")) * I(s[S_NO], g("K_OHO_I_NO_NIR"));
  e[OHO_NOR] = ax * g("eta_NOR") * M(s[S_NO], g("K_OHO_NO")) * I(s[S_NO], g("K_OHO_I_NO_NOR"));
  e[OHO_NOS] = ax * g("eta_NOS") * M(s[S_N2O], g("K_OHO_N2O")) * I(s[S_NO], g("K_OHO_I_NO_NOS"));
  const double mo = M(O2, g("K_OHO_O2"));
  const double dec = fd * (mo + g("eta_decay_anox") * (1 - mo));
  e[AOB_DECAY] = g("b_AOB") * dec * s[X_AOB];
  e[NOB_DECAY] = g("b_NOB") * dec * s[X_NOB];
  e[OHO_DECAY] = g("b_OHO") * dec * s[X_OHO];
  const double ratio = s[X_S] / s[X_OHO];
  e[HYDROLYSIS] = g("k_h") * fh * ratio / (g("K_X") + ratio) * s[X_OHO] * (mo + g("eta_h") * (1 - mo));

  const auto r = process_rates(s, k, ModelVariant::BaselineTwoPathway);
  for (std::size_t p = 0; p < kNumProcesses; ++p) {
    INFO(kProcessNames[p]);
    CHECK(std::abs(r[p] - e[p]) <= 1e-10 * std::max(1.0, std::abs(e[p])));
  }
}

TEST_CASE("biological total-N derivative vanishes on random states") {
  const auto k = KineticConstants::from(KineticParameterSet::defaults());
  const auto m = StoichiometryMatrix::build(k);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_state(rng);
    for (auto v : {ModelVariant::BaselineTwoPathway, ModelVariant::AlternativeAOB}) {
      const auto r = process_rates(s, k, v);
      const auto d = derivative(s, r, m);
      double dn = 0.0, dcod = 0.0, scale = 0.0;
      for (std::size_t c = 0; c < kNumComponents; ++c) {
        dn += d[c] * m.n_weight[c];
        dcod += d[c] * m.cod_weight[c];
        scale += std::abs(d[c]);
      }
      CHECK(std::abs(dn) <= 1e-12 * std::max(1.0, scale));
      CHECK(std::abs(dcod) <= 1e-12 * std::max(1.0, scale));
      for (std::size_t p = 0; p < kNumProcesses; ++p) CHECK(r[p] >= 0.0);
    }
  }
}

TEST_CASE("derivative of a single active process is proportional to its row") {
  const auto m = StoichiometryMatrix::build(KineticConstants::from(KineticParameterSet::defaults()));
  ProcessRateSet r;
  CHECK(derivative(r, m) == Concentrations{});
  r[OHO_NIR] = 2.5;
  const auto d = derivative(r, m);
  for (std::size_t c = 0; c < kNumComponents; ++c) CHECK(d[c] == doctest::Approx(2.5 * m.coef[OHO_NIR][c]));
}

TEST_CASE("rates are continuous in the state") {
  const auto k = KineticConstants::from(KineticParameterSet::defaults());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    auto s = random_state(rng);
    const auto r0 = process_rates(s, k, ModelVariant::BaselineTwoPathway);
    for (std::size_t c = 0; c < kNumComponents; ++c) {
      for (double h : {1e-9, -1e-9}) {
        auto t = s;
        t[c] = std::max(0.0, t[c] + h);
        const auto r1 = process_rates(t, k, ModelVariant::BaselineTwoPathway);
        for (std::size_t p = 0; p < kNumProcesses; ++p) {
          if (r0[p] == 0.0) continue;
          CHECK(std::abs(r1[p] - r0[p]) / r0[p] < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("lowering K_OHO_NO never lowers NOR") {
  auto P = KineticParameterSet::defaults();
  const auto s = typical_state();
  double prev = -1.0;
  for (double K : {0.5, 0.05, 0.01, 0.001, 1e-4}) {
    P.set("K_OHO_NO", K);
    const double nor = process_rates(s, KineticConstants::from(P), ModelVariant::BaselineTwoPathway)[OHO_NOR];
    CHECK(nor >= prev);
    prev = nor;
  }
}

TEST_CASE("pathway attribution") {
  const auto m = StoichiometryMatrix::build(KineticConstants::from(KineticParameterSet::defaults()));
  ProcessRateSet r;
  auto a = pathway_attribution(r, m);
  CHECK(a.nn == 0.0);
  CHECK(a.nd == 0.0);
  CHECK(a.hd_production == 0.0);
  CHECK(a.hd_consumption == 0.0);

  r[AOB_ND] = 1.0;
  auto sh = pathway_shares(pathway_attribution(r, m));
  CHECK(sh.nd == doctest::Approx(100.0));
  CHECK(sh.nn == 0.0);
  CHECK(sh.hd == 0.0);

  // Sum equals the biological S_N2O derivative term.
  const auto k = KineticConstants::from(KineticParameterSet::defaults());
  const auto rr = process_rates(typical_state(), k, ModelVariant::BaselineTwoPathway);
  a = pathway_attribution(rr, m);
  CHECK(a.net() == doctest::Approx(derivative(rr, m)[S_N2O]).epsilon(1e-12));
}

TEST_CASE("no-loop diagnostics") {
  const auto m = StoichiometryMatrix::build(KineticConstants::from(KineticParameterSet::defaults()));
  ProcessRateSet r;
  // NIR and NOR transforming the same amount of NO.
  r[OHO_NIR] = 1.0;
  r[OHO_NOR] = m.coef[OHO_NIR][S_NO] / -m.coef[OHO_NOR][S_NO];
  auto d = no_loop_diagnostics({{"t", r}}, m);
  REQUIRE(d.size() == 1);
  REQUIRE(d[0].nor_pct_of_nir.has_value());
  CHECK(*d[0].nor_pct_of_nir == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_FALSE(d[0].haostar_pct_of_hao.has_value());  // HAO = 0: undefined

  ProcessRateSet q;
  q[AOB_HAO] = 0.18;  // 1 gN NH2OH -> NO at Y_AOB = 0.18
  q[AOB_HAOstar] = 1.061;
  q[AOB_AMO] = 1.25;
  d = no_loop_diagnostics({{"rA1", q}}, m);
  CHECK(*d[0].haostar_pct_of_hao == doctest::Approx(106.1));
  CHECK(*d[0].amo_pct_of_hao == doctest::Approx(125.0));
}

TEST_CASE("parameter file round trip and tags") {
  const auto P = KineticParameterSet::defaults();
  CHECK(P.names_with_tag(ParamTag::N2O).size() == 17);
  CHECK(P.names_with_tag(ParamTag::NonN2O).size() == 26);
  CHECK(KineticParameterSet::parse(P.serialize()) == P);
  CHECK(P.get("mu_AOB_HAO") == 0.61);
  CHECK(P.get("K_OHO_NO") == 0.05);
  CHECK(P.get("K_AOB_HAO_NO") == 0.0003);
  CHECK_NOTHROW(P.validate());
  auto bad = P;
  bad.set("K_OHO_NO", 0.0);
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(KineticParameterSet::parse("a = 1\n"), Error);
  CHECK_THROWS_AS(KineticParameterSet::parse("a = x [n2o]\n"), Error);
  CHECK_THROWS_AS(parse_variant("Other"), Error);
}

TEST_CASE("shipped parameter file equals built-in defaults") {
  const auto P = KineticParameterSet::load(std::string(N2OLAB_DEFAULT_DATA_DIR) + "/params/default.params");
  CHECK(P == KineticParameterSet::defaults());
}
