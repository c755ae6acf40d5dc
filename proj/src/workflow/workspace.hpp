#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "plant/config.hpp"
#include "plant/simulate.hpp"
#include "scenarios/registry.hpp"

namespace n2olab::workflow {

inline constexpr const char* kToolVersion = "0.4.0";

struct WorkspaceOptions {
  std::string data_dir;     // empty: $N2OLAB_DATA, then the build-time data directory
  std::string cache_dir;    // empty: $N2OLAB_CACHE, then ./n2olab-cache
  std::string config_path;  // plant config; empty: <data_dir>/plant/default.json
  std::string registry_path;
  std::uint64_t seed = 1;   // influent seed; disturbance seeds derive from it
  unsigned jobs = 1;
  bool use_cache = true;
  std::function<void(const std::string&)> log;
};

// A simulated (or composed) run together with what produced it.
struct RunRecord {
  int simulation = 0;
  std::string key;
  std::string config_hash;
  json disturbance = json::object();
  std::shared_ptr<const plant::Trajectory> trajectory;
  bool from_cache = false;
};

// Resolves configs, runs simulations and memoises their trajectories, both in
// memory and on disk (cache/sim_<config hash>.traj).
class Workspace {
 public:
  explicit Workspace(WorkspaceOptions opt);

  const WorkspaceOptions& options() const { return opt_; }
  const scenarios::Registry& registry() const { return registry_; }
  const plant::PlantConfig& base_config() const { return base_; }

  // Disturbed config of a simulation; composite simulations have none.
  scenarios::DisturbedConfig simulation_config(int id) const;

  // Runs every listed simulation that is neither in memory nor on disk,
  // `jobs` at a time. Composite ids pull in their sources.
  void ensure(const std::vector<int>& ids);
  const RunRecord& run(int id);

  // Any config; keyed by its hash.
  std::shared_ptr<const plant::Trajectory> trajectory(const plant::PlantConfig& config, bool* from_cache = nullptr);
  void ensure_configs(const std::vector<plant::PlantConfig>& configs);

  scenarios::TabularDataset dataset(const scenarios::ScenarioSpec& spec);

  int simulations_run() const { return simulated_; }
  std::string cache_path(const std::string& hash) const;
  void log(const std::string& msg) const;
  // Drops in-memory trajectories (the disk cache stays).
  void release();

 private:
  std::shared_ptr<const plant::Trajectory> load_or_run(const plant::PlantConfig& config, bool* from_cache);

  WorkspaceOptions opt_;
  scenarios::Registry registry_;
  plant::PlantConfig base_;
  std::map<std::string, std::shared_ptr<const plant::Trajectory>> memo_;
  std::map<int, RunRecord> runs_;
  int simulated_ = 0;
  mutable std::mutex mu_;
};

std::string default_data_dir();

}  // namespace n2olab::workflow
