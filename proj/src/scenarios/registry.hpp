#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plant/trajectory.hpp"
#include "scenarios/dataset.hpp"
#include "scenarios/disturbance.hpp"
#include "scenarios/features.hpp"

namespace n2olab::scenarios {

// One plant simulation. A composite simulation has no run of its own: its
// N2O channels are the pointwise mean over `composite_of`, everything else
// comes from `base`.
struct SimulationSpec {
  int id = 0;
  std::string key;
  std::string description;
  Disturbance disturbance;
  std::vector<int> composite_of;
  int base = 0;

  bool composite() const { return !composite_of.empty(); }
};

enum class Composition { None, BiasedTarget, SixYearConcat };
std::string_view to_string(Composition c);
Composition parse_composition(std::string_view s);

struct ScenarioSpec {
  int id = 0;
  std::string key;
  std::string simulation_label;  // as listed in the experimental design, e.g. "7" or "1:6"
  // Sources. BiasedTarget: features from the first, target averaged over the
  // rest. SixYearConcat: concatenated in order.
  std::vector<int> simulations;
  FeatureSetId features = FeatureSetId::F14;
  TargetKind target = TargetKind::GasTOT;
  int interval_minutes = 15;
  Composition composition = Composition::None;
  std::string aim;

  json to_json() const;
  static ScenarioSpec from_json(const json& j);
  bool operator==(const ScenarioSpec& o) const;
};

class Registry {
 public:
  static Registry defaults();
  static Registry load(const std::string& path);
  static Registry from_json(const json& j);
  json to_json() const;

  const std::vector<SimulationSpec>& simulations() const { return simulations_; }
  const std::vector<ScenarioSpec>& scenarios() const { return scenarios_; }
  const FeatureCatalog& catalog() const { return catalog_; }

  // Lookup by numeric id or key; Error(Configuration) when unknown.
  const SimulationSpec& simulation(const std::string& id_or_key) const;
  const SimulationSpec& simulation(int id) const;
  const ScenarioSpec& scenario(const std::string& id_or_key) const;

  // Simulations that must actually be run to build the given scenarios.
  std::vector<int> required_runs(const std::vector<ScenarioSpec>& specs) const;

 private:
  void check() const;
  std::vector<SimulationSpec> simulations_;
  std::vector<ScenarioSpec> scenarios_;
  FeatureCatalog catalog_;
};

// N2O-related channels averaged by a composite simulation.
bool is_n2o_channel(const std::string& channel);

// Builds the composite trajectory from its base and source runs.
plant::Trajectory compose_trajectory(const SimulationSpec& spec, const std::map<int, const plant::Trajectory*>& runs);

// Selects features and target from the run(s) of a scenario and decimates at
// phase 0. Error(Schema) when a channel is missing.
TabularDataset extract_dataset(const ScenarioSpec& spec, const FeatureCatalog& catalog,
                               const std::map<int, const plant::Trajectory*>& runs);

}  // namespace n2olab::scenarios
