#include "biokinetics/stoichiometry.hpp"

namespace n2olab::bio {

StoichiometryMatrix StoichiometryMatrix::build(const KineticConstants& k) {
  StoichiometryMatrix m;

  auto& nw = m.n_weight;
  nw.fill(0.0);
  for (auto c : {S_NH4, S_NH2OH, S_NO2, S_NO3, S_NO, S_N2O, S_N2}) nw[c] = 1.0;
  nw[S_S] = k.i_NSS;
  nw[S_I] = k.i_NSI;
  nw[X_S] = k.i_NXS;
  nw[X_I] = k.i_NXI;
  nw[X_AOB] = nw[X_NOB] = nw[X_OHO] = k.i_NBM;

  auto& cw = m.cod_weight;
  cw.fill(0.0);
  cw[S_O2] = -1.0;
  cw[S_NH2OH] = kCodNH2OH;
  cw[S_NO2] = kCodNO2;
  cw[S_NO3] = kCodNO3;
  cw[S_NO] = kCodNO;
  cw[S_N2O] = kCodN2O;
  cw[S_N2] = kCodN2;
  for (auto c : {S_S, S_I, X_S, X_I, X_AOB, X_NOB, X_OHO}) cw[c] = 1.0;

  for (auto& row : m.coef) row.fill(0.0);

  {  // AMO: NH4 + O2 -> NH2OH
    auto& a = m.coef[AOB_AMO];
    a[S_NH4] = -1.0;
    a[S_NH2OH] = 1.0;
    a[S_O2] = kCodNH2OH;
  }
  {  // HAO with AOB growth
    auto& a = m.coef[AOB_HAO];
    const double y = k.Y_AOB;
    a[X_AOB] = 1.0;
    a[S_NH2OH] = -1.0 / y;
    a[S_NO] = 1.0 / y;
    a[S_NH4] = -k.i_NBM;
    a[S_O2] = 1.0 + (kCodNO - kCodNH2OH) / y;
  }
  {  // HAO*: NO -> NO2
    auto& a = m.coef[AOB_HAOstar];
    a[S_NO] = -1.0;
    a[S_NO2] = 1.0;
    a[S_O2] = kCodNO2 - kCodNO;
  }
  {  // NN: NH2OH oxidised to NO2, 4 NO reduced to N2O
    auto& a = m.coef[AOB_NN];
    a[S_NH2OH] = -1.0;
    a[S_NO] = -4.0;
    a[S_N2O] = 4.0;
    a[S_NO2] = 1.0;
  }
  {  // ND: NH2OH oxidised to NO2, 2 NO2 reduced to N2O
    auto& a = m.coef[AOB_ND];
    a[S_NH2OH] = -1.0;
    a[S_NO2] = -1.0;
    a[S_N2O] = 2.0;
  }
  {  // NOB growth
    auto& a = m.coef[NOB_GROWTH];
    const double y = k.Y_NOB;
    a[X_NOB] = 1.0;
    a[S_NO2] = -1.0 / y;
    a[S_NO3] = 1.0 / y;
    a[S_NH4] = -k.i_NBM;
    a[S_O2] = 1.0 + (kCodNO3 - kCodNO2) / y;
  }
  const double y = k.Y_OHO;
  const double nh4_growth = -k.i_NBM + k.i_NSS / y;
  {  // aerobic OHO growth
    auto& a = m.coef[OHO_AEROBIC];
    a[X_OHO] = 1.0;
    a[S_S] = -1.0 / y;
    a[S_O2] = -(1.0 - y) / y;
    a[S_NH4] = nh4_growth;
  }
  // Anoxic steps: electrons (1-Y)/Y gCOD accepted by the N-oxide step.
  auto anoxic_step = [&](Process p, Component from, Component to, double cod_from, double cod_to) {
    auto& a = m.coef[p];
    const double n = (1.0 - y) / (y * (cod_to - cod_from));
    a[X_OHO] = 1.0;
    a[S_S] = -1.0 / y;
    a[from] = -n;
    a[to] = n;
    a[S_NH4] = nh4_growth;
  };
  anoxic_step(OHO_NAR, S_NO3, S_NO2, kCodNO3, kCodNO2);
  anoxic_step(OHO_NIR, S_NO2, S_NO, kCodNO2, kCodNO);
  anoxic_step(OHO_NOR, S_NO, S_N2O, kCodNO, kCodN2O);
  anoxic_step(OHO_NOS, S_N2O, S_N2, kCodN2O, kCodN2);

  // Death-regeneration decay to X_S and X_I; N surplus released as NH4.
  auto decay = [&](Process p, Component biomass) {
    auto& a = m.coef[p];
    a[biomass] = -1.0;
    a[X_S] = 1.0 - k.f_I;
    a[X_I] = k.f_I;
    a[S_NH4] = k.i_NBM - (1.0 - k.f_I) * k.i_NXS - k.f_I * k.i_NXI;
  };
  decay(AOB_DECAY, X_AOB);
  decay(NOB_DECAY, X_NOB);
  decay(OHO_DECAY, X_OHO);

  {
    auto& a = m.coef[HYDROLYSIS];
    a[X_S] = -1.0;
    a[S_S] = 1.0;
    a[S_NH4] = k.i_NXS - k.i_NSS;
  }
  return m;
}

double StoichiometryMatrix::nitrogen_residual(std::size_t process) const {
  double s = 0.0;
  for (std::size_t c = 0; c < kNumComponents; ++c) s += coef[process][c] * n_weight[c];
  return s;
}

double StoichiometryMatrix::cod_residual(std::size_t process) const {
  double s = 0.0;
  for (std::size_t c = 0; c < kNumComponents; ++c) s += coef[process][c] * cod_weight[c];
  return s;
}

Concentrations derivative(const ProcessRateSet& rates, const StoichiometryMatrix& stoich) {
  Concentrations d{};
  for (std::size_t p = 0; p < kNumProcesses; ++p) {
    const double rp = rates[p];
    if (rp == 0.0) continue;
    const auto& row = stoich.coef[p];
    for (std::size_t c = 0; c < kNumComponents; ++c) d[c] += row[c] * rp;
  }
  return d;
}

}  // namespace n2olab::bio
