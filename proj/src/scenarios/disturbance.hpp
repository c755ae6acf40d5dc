#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "common/hash.hpp"
#include "common/json_util.hpp"
#include "plant/config.hpp"

namespace n2olab::scenarios {

enum class DisturbanceKind {
  None,
  MassTransferEq,       // gas exchange through a dynamic headspace
  AerobicVolume,        // aerated tank volumes scaled down
  MicrobioNonN2O,       // +-rel on every non-N2O kinetic parameter
  MicrobioN2O,          // +-rel on every N2O kinetic parameter
  Influent,             // N-load, temperature and rain raised
  BiologicalStructure,  // alternative AOB model structure
};

std::string_view to_string(DisturbanceKind k);
DisturbanceKind parse_disturbance(std::string_view s);

struct Disturbance {
  DisturbanceKind kind = DisturbanceKind::None;
  double volume_factor = 0.8;
  double relative_change = 0.0;  // 0 -> 0.10 (non-N2O) or 0.20 (N2O)
  double n_load_factor = 1.15;
  double temperature_offset = 2.0;
  double rain_frequency_factor = 2.0;

  static Disturbance from_json(const json& j);
  json to_json() const;
  double effective_relative_change() const;
};

struct DisturbedConfig {
  plant::PlantConfig config;
  json record;  // what was changed, including drawn signs
};

// Pure: the same (base, disturbance, seed) always yields the same config.
DisturbedConfig apply_disturbance(const plant::PlantConfig& base, const Disturbance& d, std::uint64_t seed);

using n2olab::derive_seed;

}  // namespace n2olab::scenarios
