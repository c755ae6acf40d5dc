#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace n2olab::bio {

// Index of each model component inside a tank state vector.
enum Component : std::size_t {
  S_O2 = 0,
  S_NH4,
  S_NH2OH,
  S_NO2,
  S_NO3,
  S_NO,
  S_N2O,
  S_N2,
  S_S,
  S_I,
  X_S,
  X_I,
  X_AOB,
  X_NOB,
  X_OHO,
};

inline constexpr std::size_t kNumComponents = 15;

inline constexpr std::array<std::string_view, kNumComponents> kComponentNames = {
    "S_O2", "S_NH4", "S_NH2OH", "S_NO2", "S_NO3", "S_NO", "S_N2O", "S_N2",
    "S_S",  "S_I",   "X_S",     "X_I",   "X_AOB", "X_NOB", "X_OHO"};

inline constexpr std::array<std::string_view, kNumComponents> kComponentUnits = {
    "gO2/m3", "gN/m3",   "gN/m3",   "gN/m3",   "gN/m3",   "gN/m3",   "gN/m3",   "gN/m3",
    "gCOD/m3", "gCOD/m3", "gCOD/m3", "gCOD/m3", "gCOD/m3", "gCOD/m3", "gCOD/m3"};

inline constexpr bool is_particulate(std::size_t c) { return c >= X_S; }

using Concentrations = std::array<double, kNumComponents>;

// Concentrations of one completely mixed tank plus its (exogenous) temperature.
struct ComponentState {
  Concentrations c{};
  double temperature = 20.0;  // degC

  double& operator[](std::size_t i) { return c[i]; }
  double operator[](std::size_t i) const { return c[i]; }

  // TSS is derived from the particulate COD pool.
  double tss(double i_tss) const {
    return i_tss * (c[X_S] + c[X_I] + c[X_AOB] + c[X_NOB] + c[X_OHO]);
  }
};

}  // namespace n2olab::bio
