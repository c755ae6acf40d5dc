#pragma once

#include <array>

#include "biokinetics/components.hpp"
#include "biokinetics/kinetics.hpp"
#include "biokinetics/parameters.hpp"

namespace n2olab::bio {

// COD equivalents of the nitrogen species, with NH4 (and organic N) as the
// zero reference: x gO2 needed per gN to reach nitrate from ammonium.
inline constexpr double kCodNH2OH = -16.0 / 14.0;
inline constexpr double kCodNO2 = -48.0 / 14.0;
inline constexpr double kCodNO3 = -64.0 / 14.0;
inline constexpr double kCodNO = -40.0 / 14.0;
inline constexpr double kCodN2O = -32.0 / 14.0;
inline constexpr double kCodN2 = -24.0 / 14.0;

struct StoichiometryMatrix {
  // coef[process][component]
  std::array<Concentrations, kNumProcesses> coef{};
  Concentrations n_weight{};    // gN per unit of component
  Concentrations cod_weight{};  // gCOD per unit of component (O2 counts -1)

  static StoichiometryMatrix build(const KineticConstants& k);

  // Residual of the N (or COD) balance of one process row.
  double nitrogen_residual(std::size_t process) const;
  double cod_residual(std::size_t process) const;
};

// dC/dt from biology alone: stoich^T * rates.
Concentrations derivative(const ProcessRateSet& rates, const StoichiometryMatrix& stoich);

// Overload for callers that carry the state explicitly (checks nothing but
// documents that rates must have been evaluated on that state).
inline Concentrations derivative(const ComponentState&, const ProcessRateSet& rates,
                                 const StoichiometryMatrix& stoich) {
  return derivative(rates, stoich);
}

}  // namespace n2olab::bio
