#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biokinetics/kinetics.hpp"
#include "biokinetics/pathways.hpp"
#include "biokinetics/stoichiometry.hpp"
#include "plant/config.hpp"
#include "plant/influent.hpp"
#include "plant/integrator.hpp"

namespace n2olab::plant {

struct ChannelInfo {
  std::string name;
  std::string unit;
};

// Right-hand side of the plant ODE plus the derived signals recorded along a
// trajectory. State layout per tank (kLocal entries): 15 components, gas
// compartment N2O/NO/N2 (g/m3 gas), PI integrator state (1/d).
class PlantModel {
 public:
  static constexpr int kGasN2O = 15, kGasNO = 16, kGasN2 = 17, kPI = 18, kLocal = 19;

  explicit PlantModel(const PlantConfig& config);

  int size() const { return static_cast<int>(config_.tanks.size()) * kLocal; }
  int index(int tank, int local) const { return tank * kLocal + local; }

  // Use a constant influent instead of the generated series (steady phase).
  void set_constant_influent(std::optional<InfluentSample> s) { constant_ = std::move(s); }
  InfluentSample influent(double t) const;

  void rhs(double t, const Vec& y, Vec& dydt) const;
  Vec initial_state() const;
  Vec absolute_tolerances() const;
  std::vector<bool> nonnegative_mask() const;
  std::vector<std::vector<int>> jacobian_sparsity() const;

  const std::vector<ChannelInfo>& channels() const { return channels_; }
  int channel(const std::string& name) const;  // -1 when absent
  // Writes channels().size() values describing the plant at (t, y).
  void signals(double t, const Vec& y, double* out) const;

  // Total N held in liquid and gas compartments (gN).
  double nitrogen_inventory(const Vec& y) const;

  const PlantConfig& config() const { return config_; }
  const bio::StoichiometryMatrix& stoichiometry() const { return stoich_; }
  double mean_flow() const { return q_mean_; }
  double sludge_retention_time(const Vec& y) const;

 private:
  struct Flows {
    double Q_in, Q_ps, Q_p, Q_a, Q_r, Q_w, Q_t, Q_f, Q_u, Q_e;
  };
  Flows flows(double Q_in) const;
  double kla_o2(int tank, const Vec& y) const;
  double kla_unsat(int tank, const Vec& y) const;
  double n_content(const bio::Concentrations& c) const;
  void build_channels();

  PlantConfig config_;
  bio::KineticConstants k_;
  bio::StoichiometryMatrix stoich_;
  InfluentGenerator gen_;
  std::optional<InfluentSample> constant_;
  double q_mean_ = 0.0;
  std::vector<ChannelInfo> channels_;
  int first_aerated_ = -1;
};

}  // namespace n2olab::plant
