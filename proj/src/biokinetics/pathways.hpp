#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biokinetics/kinetics.hpp"
#include "biokinetics/stoichiometry.hpp"

namespace n2olab::bio {

// Instantaneous N2O production split by pathway, gN/m3/d.
struct PathwayAttribution {
  double nn = 0.0;              // nitrifier nitrification
  double nd = 0.0;              // nitrifier denitrification
  double hd_production = 0.0;   // heterotrophic denitrification, NOR step
  double hd_consumption = 0.0;  // NOS step (N2O -> N2)

  double net() const { return nn + nd + hd_production - hd_consumption; }
  double gross() const { return nn + nd + hd_production; }
};

PathwayAttribution pathway_attribution(const ProcessRateSet& rates, const StoichiometryMatrix& stoich);

// Shares (%) of gross production; all zero when nothing is produced.
struct PathwayShares {
  double nn = 0.0, nd = 0.0, hd = 0.0;
};
PathwayShares pathway_shares(const PathwayAttribution& a);

// Nitrogen conversion fluxes (gN/m3/d) of the NO-loop steps.
struct NoLoopFluxes {
  double amo = 0.0;      // NH4 consumed by AMO
  double hao = 0.0;      // NO formed from NH2OH
  double haostar = 0.0;  // NO oxidised to NO2 by AOB
  double nir = 0.0;      // NO formed by heterotrophic NIR
  double nor = 0.0;      // NO consumed by heterotrophic NOR
  double nn_no = 0.0;    // NO consumed by NN
};
NoLoopFluxes no_loop_fluxes(const ProcessRateSet& rates, const StoichiometryMatrix& stoich);

struct TankAverages {
  std::string tank;
  ProcessRateSet mean_rates;
};

struct NoLoopDiagnostic {
  std::string tank;
  NoLoopFluxes fluxes;
  std::optional<double> amo_pct_of_hao;      // AMO / HAO * 100
  std::optional<double> haostar_pct_of_hao;  // HAO* / HAO * 100
  std::optional<double> nor_pct_of_nir;      // NOR / NIR * 100
  PathwayShares shares;
};

std::vector<NoLoopDiagnostic> no_loop_diagnostics(const std::vector<TankAverages>& tanks,
                                                  const StoichiometryMatrix& stoich);

}  // namespace n2olab::bio
