#pragma once

#include <string>
#include <vector>

#include "metrics/statistics.hpp"
#include "plant/trajectory.hpp"

namespace n2olab::metrics {

// 100 * integral(Gas.TOT) / integral(influent.Q * influent.TKN), trapezoid on
// the recorded grid. Error(Data) when the N-load is zero.
double emission_factor(const plant::Trajectory& traj);
// Same for one emission channel (gN/d).
double emission_factor(const plant::Trajectory& traj, const std::string& channel);

struct LocationEmission {
  std::string location;
  double mean_kg_per_d = 0.0;
  double share_pct = 0.0;  // of the site total
  double ef_pct = 0.0;
};

struct PathwayShareRow {
  std::string location;  // tank name, or "aerated" for the volume-weighted sum
  double nn = 0.0, nd = 0.0, hd = 0.0;  // % of gross production
};

struct EmissionReport {
  std::vector<LocationEmission> locations;  // every tank with a gas channel, then the settler
  double total_kg_per_d = 0.0;
  double ef_pct = 0.0;
  double no_to_n2o = 0.0;  // emitted NO-N / emitted N2O-N
  std::vector<PathwayShareRow> pathways;

  const LocationEmission& at(const std::string& location) const;
  json to_json() const;
};

EmissionReport emission_report(const plant::Trajectory& traj);

// One column of a Table-2-style report.
struct DynamicsColumn {
  std::string label;
  SignalSummary summary;          // on the gN/d series
  std::optional<double> corr_to_site;
  double mean_per_volume = 0.0;  // gN/(m3 d)
};

struct DynamicsTable {
  std::vector<DynamicsColumn> columns;  // site first
  json to_json() const;
  std::string to_csv() const;
  std::string to_text() const;
};

struct NamedSeries {
  std::string label;
  std::vector<double> values;  // gN/d
  double volume = 0.0;         // normalising volume, m3
};

// Column 0 is the site scale; the others are correlated against it.
// Error(Structural) when the series lengths differ.
DynamicsTable dynamics_table(const std::vector<NamedSeries>& series, double duration,
                             const std::vector<std::size_t>& lags = {});
// TOT plus every aerated tank, volumes from the trajectory metadata.
DynamicsTable dynamics_table(const plant::Trajectory& traj, const std::vector<std::size_t>& lags = {});

// Recorded duration in days: rows * sampling interval.
double recorded_duration(const plant::Trajectory& traj);

}  // namespace n2olab::metrics
