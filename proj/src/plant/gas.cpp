#include "plant/gas.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace n2olab::plant {

std::string_view to_string(GasSpecies s) {
  switch (s) {
    case GasSpecies::O2: return "O2";
    case GasSpecies::N2O: return "N2O";
    case GasSpecies::NO: return "NO";
    case GasSpecies::N2: return "N2";
  }
  return "?";
}

GasSpecies parse_gas_species(std::string_view name) {
  if (name == "O2") return GasSpecies::O2;
  if (name == "N2O") return GasSpecies::N2O;
  if (name == "NO") return GasSpecies::NO;
  if (name == "N2") return GasSpecies::N2;
  fail(ErrorKind::Parameter, "unknown gas species '" + std::string(name) + "'");
}

std::string_view to_string(GasTransferMode m) {
  return m == GasTransferMode::ZeroHeadspace ? "ZeroHeadspace" : "DynamicHeadspace";
}

GasTransferMode parse_gas_mode(std::string_view name) {
  if (name == "ZeroHeadspace") return GasTransferMode::ZeroHeadspace;
  if (name == "DynamicHeadspace") return GasTransferMode::DynamicHeadspace;
  fail(ErrorKind::Configuration, "unknown gas transfer mode '" + std::string(name) + "'");
}

double o2_saturation(double T) {
  return 14.652 - 0.41022 * T + 0.007991 * T * T - 0.000077774 * T * T * T;
}

double gas_flux(double c_liq, GasSpecies, const GasTransferSpec& spec, GasTransferMode mode,
                const std::optional<HeadspaceState>& headspace) {
  if (!(spec.kla >= 0.0) || !std::isfinite(spec.kla)) fail(ErrorKind::Parameter, "gas_flux: kLa must be >= 0");
  double c_sat = spec.c_sat_ambient;
  if (mode == GasTransferMode::DynamicHeadspace) {
    if (!headspace) fail(ErrorKind::Parameter, "gas_flux: DynamicHeadspace requires a headspace state");
    if (!(spec.henry > 0.0)) fail(ErrorKind::Parameter, "gas_flux: Henry constant must be > 0");
    c_sat = headspace->c_gas / spec.henry;
  }
  return spec.kla * (c_liq - c_sat);
}

}  // namespace n2olab::plant
