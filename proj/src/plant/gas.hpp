#pragma once

#include <optional>
#include <string_view>

namespace n2olab::plant {

enum class GasSpecies { O2, N2O, NO, N2 };
inline constexpr int kNumGasSpecies = 4;

std::string_view to_string(GasSpecies s);
GasSpecies parse_gas_species(std::string_view name);

enum class GasTransferMode {
  ZeroHeadspace,     // liquid exchanges with ambient air of fixed composition
  DynamicHeadspace,  // liquid exchanges with a well mixed gas compartment per tank
};

std::string_view to_string(GasTransferMode m);
GasTransferMode parse_gas_mode(std::string_view name);

// Transfer properties of one species in one tank.
struct GasTransferSpec {
  double kla = 0.0;             // 1/d, already scaled for the species
  double c_sat_ambient = 0.0;   // g/m3 liquid in equilibrium with ambient air
  double henry = 1.0;           // dimensionless C_gas/C_liq at equilibrium
};

struct HeadspaceState {
  double c_gas = 0.0;  // g/m3 gas
};

// Saturation O2 in clean water (gO2/m3) at temperature T (degC).
double o2_saturation(double temperature);

// Liquid-to-gas flux in g/m3/d (positive = to gas).
double gas_flux(double c_liq, GasSpecies species, const GasTransferSpec& spec, GasTransferMode mode,
                const std::optional<HeadspaceState>& headspace = std::nullopt);

}  // namespace n2olab::plant
