#include "biokinetics/pathways.hpp"

namespace n2olab::bio {

PathwayAttribution pathway_attribution(const ProcessRateSet& rates, const StoichiometryMatrix& stoich) {
  // Same coefficient * rate products that derivative() sums into S_N2O.
  PathwayAttribution a;
  a.nn = stoich.coef[AOB_NN][S_N2O] * rates[AOB_NN];
  a.nd = stoich.coef[AOB_ND][S_N2O] * rates[AOB_ND];
  a.hd_production = stoich.coef[OHO_NOR][S_N2O] * rates[OHO_NOR];
  a.hd_consumption = -stoich.coef[OHO_NOS][S_N2O] * rates[OHO_NOS];
  return a;
}

PathwayShares pathway_shares(const PathwayAttribution& a) {
  PathwayShares s;
  const double g = a.gross();
  if (g <= 0.0) return s;
  s.nn = 100.0 * a.nn / g;
  s.nd = 100.0 * a.nd / g;
  s.hd = 100.0 * a.hd_production / g;
  return s;
}

NoLoopFluxes no_loop_fluxes(const ProcessRateSet& r, const StoichiometryMatrix& m) {
  NoLoopFluxes f;
  f.amo = -m.coef[AOB_AMO][S_NH4] * r[AOB_AMO];
  f.hao = m.coef[AOB_HAO][S_NO] * r[AOB_HAO];
  f.haostar = -m.coef[AOB_HAOstar][S_NO] * r[AOB_HAOstar];
  f.nir = m.coef[OHO_NIR][S_NO] * r[OHO_NIR];
  f.nor = -m.coef[OHO_NOR][S_NO] * r[OHO_NOR];
  f.nn_no = -m.coef[AOB_NN][S_NO] * r[AOB_NN];
  return f;
}

std::vector<NoLoopDiagnostic> no_loop_diagnostics(const std::vector<TankAverages>& tanks,
                                                  const StoichiometryMatrix& stoich) {
  std::vector<NoLoopDiagnostic> out;
  out.reserve(tanks.size());
  for (const auto& t : tanks) {
    NoLoopDiagnostic d;
    d.tank = t.tank;
    d.fluxes = no_loop_fluxes(t.mean_rates, stoich);
    if (d.fluxes.hao > 0.0) {
      d.amo_pct_of_hao = 100.0 * d.fluxes.amo / d.fluxes.hao;
      d.haostar_pct_of_hao = 100.0 * d.fluxes.haostar / d.fluxes.hao;
    }
    if (d.fluxes.nir > 0.0) d.nor_pct_of_nir = 100.0 * d.fluxes.nor / d.fluxes.nir;
    d.shares = pathway_shares(pathway_attribution(t.mean_rates, stoich));
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace n2olab::bio
