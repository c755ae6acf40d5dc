#pragma once

#include <functional>
#include <string>
#include <vector>

#include "biokinetics/pathways.hpp"
#include "plant/config.hpp"
#include "plant/integrator.hpp"
#include "plant/trajectory.hpp"

namespace n2olab::plant {

// Integrated N fluxes over the recorded window (kgN) and the closure error.
struct BalanceSummary {
  double n_in = 0.0;
  double n_effluent = 0.0;
  double n_primary_sludge = 0.0;
  double n_wastage = 0.0;
  double n_gas = 0.0;
  double delta_inventory = 0.0;
  double closure_relative = 0.0;  // (in - out - dInventory) / in
};

struct SimulationResult {
  Trajectory trajectory;
  SolverStats steady_stats;
  SolverStats dynamic_stats;
  BalanceSummary balance;
  bool steady_converged = false;
  double steady_drift = 0.0;  // ||dy/dt|| / ||y|| at the end of the steady phase, 1/d
  double srt = 0.0;           // d, at the end of the run
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

using ProgressFn = std::function<void(const std::string& phase, double t)>;

// Steady phase with the flow-weighted mean influent, then the dynamic phase;
// the final record_days are sampled on the uniform output grid.
SimulationResult simulate(const PlantConfig& config, const ProgressFn& progress = {});
SimulationResult simulate(PlantConfig config, const InfluentModel& influent, const ProtocolSpec& protocol,
                          const ProgressFn& progress = {});

// Trapezoid integral of y over the grid t.
double trapezoid(const std::vector<double>& t, const std::vector<double>& y);

BalanceSummary nitrogen_balance(const Trajectory& traj);

// Recorded-window mean of the process rates of each tank.
std::vector<bio::TankAverages> mean_process_rates(const Trajectory& traj, const std::vector<std::string>& tanks);

json to_json(const SolverStats& s);
json to_json(const BalanceSummary& b);

}  // namespace n2olab::plant
