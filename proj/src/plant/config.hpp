#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biokinetics/kinetics.hpp"
#include "biokinetics/parameters.hpp"
#include "common/json_util.hpp"
#include "plant/gas.hpp"
#include "plant/influent.hpp"
#include "plant/settler.hpp"

namespace n2olab::plant {

struct TankSpec {
  std::string name;
  double volume = 0.0;  // m3
  bool aerated = false;
  double do_setpoint = 2.0;         // gO2/m3, aerated tanks under PI control
  std::optional<double> kla_fixed;  // 1/d, replaces the controller when set
};

struct FlowSpec {
  double internal_recycle_factor = 3.0;  // x mean influent flow, last tank -> first tank
  double return_sludge_factor = 1.0;     // x mean influent flow, settler underflow -> first tank
  double wastage = 300.0;                // m3/d from the settler underflow
};

struct PrimarySpec {
  double particulate_removal = 0.4;     // fraction of particulate mass to primary sludge
  double sludge_flow_fraction = 0.007;  // primary sludge flow / influent flow
};

struct AerationSpec {
  double kla_anoxic = 1.1;  // 1/d, surface transfer of non-aerated tanks
  double kla_max = 360.0;
  double kla_initial = 120.0;
  // PI controller on kLa_O2: u = u0 + K e + z, dz/dt = K/Ti e + (u_sat - u)/Tt
  double K = 25.0;     // (1/d)/(gO2/m3)
  double Ti = 0.002;   // d
  double Tt = 0.001;   // d
  double o2_saturation_factor = 0.95;
  // (D_species/D_O2); kLa scales with the square root.
  double diffusivity_N2O = 0.90;
  double diffusivity_NO = 0.95;
  double diffusivity_N2 = 0.90;
};

struct HeadspaceSpec {
  // Dimensionless equilibrium ratios C_gas/C_liq at 20 degC.
  double henry_N2O = 1.73;
  double henry_NO = 21.9;
  double henry_N2 = 65.0;
  double volume_fraction = 0.05;  // gas compartment volume / tank volume
  double gas_flow_ratio = 0.125;  // Q_gas / (kLa_O2 V), m3 gas per m3 liquid
};

struct ProtocolSpec {
  double steady_days = 300.0;
  double dynamic_days = 609.0;
  double record_days = 365.0;
  int samples_per_day = 96;
};

struct SolverSpec {
  double rtol = 1e-5;
  double atol_scale = 1.0;
  double h_max = 0.05;         // d, dynamic phase
  double h_max_steady = 1.0;   // d, constant-influent phase
  double negative_tolerance = 1e-9;
};

struct PlantConfig {
  std::string name = "plant";
  std::vector<TankSpec> tanks;
  FlowSpec flows;
  PrimarySpec primary;
  ClarifierSpec secondary;
  AerationSpec aeration;
  GasTransferMode gas_mode = GasTransferMode::ZeroHeadspace;
  HeadspaceSpec headspace;
  bio::KineticParameterSet params = bio::KineticParameterSet::defaults();
  bio::ModelVariant variant = bio::ModelVariant::BaselineTwoPathway;
  InfluentModel influent = InfluentModel::bsm2_like();
  ProtocolSpec protocol;
  SolverSpec solver;

  static PlantConfig defaults();
  // Parses a config document. Missing sections keep their defaults.
  // `base_dir` resolves a relative "parameter_file".
  static PlantConfig from_json(const json& j, const std::string& base_dir = ".");
  static PlantConfig load(const std::string& path);
  json to_json() const;

  void validate() const;
  std::string hash() const;  // SHA-256 over the canonical JSON form

  double aerobic_volume() const;
  double total_volume() const;
  int index_of(const std::string& tank) const;  // -1 when absent
};

}  // namespace n2olab::plant
