#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string_view>

#include "biokinetics/components.hpp"
#include "biokinetics/parameters.hpp"

namespace n2olab::bio {

enum class ModelVariant {
  BaselineTwoPathway,  // ND inhibited by O2 through a Haldane term
  AlternativeAOB,      // ND with noncompetitive O2 inhibition K_I/(K_I + S_O2)
};

std::string_view to_string(ModelVariant v);
ModelVariant parse_variant(std::string_view name);

enum Process : std::size_t {
  AOB_AMO = 0,   // NH4 -> NH2OH
  AOB_HAO,       // NH2OH -> NO, AOB growth
  AOB_HAOstar,   // NO -> NO2
  AOB_NN,        // NH2OH + 4 NO -> NO2 + 2 N2O
  AOB_ND,        // NH2OH + 2 NO2 -> NO2 + N2O
  NOB_GROWTH,    // NO2 -> NO3
  OHO_AEROBIC,
  OHO_NAR,       // NO3 -> NO2
  OHO_NIR,       // NO2 -> NO
  OHO_NOR,       // NO -> N2O
  OHO_NOS,       // N2O -> N2
  AOB_DECAY,
  NOB_DECAY,
  OHO_DECAY,
  HYDROLYSIS,
};

inline constexpr std::size_t kNumProcesses = 15;

inline constexpr std::array<std::string_view, kNumProcesses> kProcessNames = {
    "AOB.AMO", "AOB.HAO", "AOB.HAOstar", "AOB.NN",    "AOB.ND",    "NOB.growth", "OHO.aerobic", "OHO.NAR",
    "OHO.NIR", "OHO.NOR", "OHO.NOS",     "AOB.decay", "NOB.decay", "OHO.decay",  "hydrolysis"};

// Process rates in g/m3/d. Growth processes are expressed in gCOD of biomass
// formed; AMO, HAO*, NN and ND in gN of their substrate.
struct ProcessRateSet {
  std::array<double, kNumProcesses> r{};
  double operator[](std::size_t p) const { return r[p]; }
  double& operator[](std::size_t p) { return r[p]; }
};

// Saturation factor S/(K+S).
double monod(double S, double K);
// Substrate inhibited saturation S/(K_S + S + S^2/K_I).
double haldane(double S, double K_S, double K_I);
// Noncompetitive inhibition K_I/(K_I + S).
inline double inhibition(double S, double K_I) { return K_I / (K_I + S); }

inline double arrhenius(double theta, double temperature) {
  return std::pow(theta, temperature - 20.0);
}

ProcessRateSet process_rates(const ComponentState& state, const KineticConstants& k, ModelVariant variant);

}  // namespace n2olab::bio
