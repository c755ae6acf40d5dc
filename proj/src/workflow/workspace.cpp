#include "workflow/workspace.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

#include "common/parallel.hpp"

namespace n2olab::workflow {

namespace fs = std::filesystem;

std::string default_data_dir() {
  if (const char* e = std::getenv("N2OLAB_DATA"); e && *e) return e;
#ifdef N2OLAB_DEFAULT_DATA_DIR
  return N2OLAB_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

Workspace::Workspace(WorkspaceOptions opt) : opt_(std::move(opt)) {
  if (opt_.data_dir.empty()) opt_.data_dir = default_data_dir();
  if (opt_.cache_dir.empty()) {
    const char* e = std::getenv("N2OLAB_CACHE");
    opt_.cache_dir = e && *e ? e : "n2olab-cache";
  }
  if (opt_.config_path.empty()) opt_.config_path = (fs::path(opt_.data_dir) / "plant" / "default.json").string();
  if (opt_.registry_path.empty())
    opt_.registry_path = (fs::path(opt_.data_dir) / "scenarios" / "registry.json").string();
  base_ = plant::PlantConfig::load(opt_.config_path);
  base_.influent.seed = opt_.seed;
  base_.validate();
  registry_ = scenarios::Registry::load(opt_.registry_path);
}

void Workspace::log(const std::string& msg) const {
  if (!opt_.log) return;
  std::lock_guard lk(mu_);
  opt_.log(msg);
}

std::string Workspace::cache_path(const std::string& hash) const {
  return (fs::path(opt_.cache_dir) / ("sim_" + hash.substr(0, 32) + ".traj")).string();
}

scenarios::DisturbedConfig Workspace::simulation_config(int id) const {
  const auto& spec = registry_.simulation(id);
  if (spec.composite()) fail(ErrorKind::Configuration, "simulation " + spec.key + " is composite and has no config");
  auto d = scenarios::apply_disturbance(base_, spec.disturbance, derive_seed(opt_.seed, static_cast<std::uint64_t>(id)));
  d.config.name = spec.key;
  return d;
}

std::shared_ptr<const plant::Trajectory> Workspace::load_or_run(const plant::PlantConfig& config, bool* from_cache) {
  const auto hash = config.hash();
  {
    std::lock_guard lk(mu_);
    if (auto it = memo_.find(hash); it != memo_.end()) {
      if (from_cache) *from_cache = true;
      return it->second;
    }
  }
  const auto path = cache_path(hash);
  std::shared_ptr<plant::Trajectory> traj;
  bool cached = false;
  if (opt_.use_cache && fs::exists(path)) {
    try {
      auto t = plant::Trajectory::load_binary(path);
      if (t.meta.value("config_hash", "") == hash) {
        traj = std::make_shared<plant::Trajectory>(std::move(t));
        cached = true;
        log("cache hit " + config.name + " (" + hash.substr(0, 12) + ")");
      }
    } catch (const Error&) {
      log("ignoring unreadable cache file " + path);
    }
  }
  if (!traj) {
    log("simulating " + config.name + " (" + hash.substr(0, 12) + ")");
    auto res = plant::simulate(config);
    for (const auto& w : res.warnings) log(config.name + ": " + w);
    log(config.name + ": done in " + std::to_string(static_cast<int>(res.wall_seconds)) + " s");
    traj = std::make_shared<plant::Trajectory>(std::move(res.trajectory));
    if (opt_.use_cache) {
      std::error_code ec;
      fs::create_directories(opt_.cache_dir, ec);
      traj->save_binary(path);
    }
  }
  std::lock_guard lk(mu_);
  if (!cached) ++simulated_;
  if (from_cache) *from_cache = cached;
  return memo_.emplace(hash, traj).first->second;
}

std::shared_ptr<const plant::Trajectory> Workspace::trajectory(const plant::PlantConfig& config, bool* from_cache) {
  config.validate();
  return load_or_run(config, from_cache);
}

void Workspace::ensure_configs(const std::vector<plant::PlantConfig>& configs) {
  for (const auto& c : configs) c.validate();
  parallel_for(configs.size(), opt_.jobs, [&](std::size_t i) { load_or_run(configs[i], nullptr); });
}

void Workspace::ensure(const std::vector<int>& ids) {
  std::set<int> real;
  for (int id : ids) {
    const auto& s = registry_.simulation(id);
    if (s.composite()) {
      real.insert(s.base);
      real.insert(s.composite_of.begin(), s.composite_of.end());
    } else {
      real.insert(id);
    }
  }
  std::vector<int> todo;
  for (int id : real)
    if (!runs_.count(id)) todo.push_back(id);
  std::vector<scenarios::DisturbedConfig> cfg;
  for (int id : todo) cfg.push_back(simulation_config(id));
  std::vector<RunRecord> rec(todo.size());
  parallel_for(todo.size(), opt_.jobs, [&](std::size_t i) {
    auto& r = rec[i];
    r.simulation = todo[i];
    r.key = cfg[i].config.name;
    r.config_hash = cfg[i].config.hash();
    r.disturbance = cfg[i].record;
    r.trajectory = load_or_run(cfg[i].config, &r.from_cache);
  });
  for (auto& r : rec) runs_[r.simulation] = std::move(r);

  for (int id : ids) {
    const auto& s = registry_.simulation(id);
    if (!s.composite() || runs_.count(id)) continue;
    std::map<int, const plant::Trajectory*> src;
    src[s.base] = runs_.at(s.base).trajectory.get();
    for (int c : s.composite_of) src[c] = runs_.at(c).trajectory.get();
    RunRecord r;
    r.simulation = id;
    r.key = s.key;
    r.from_cache = true;
    r.trajectory = std::make_shared<plant::Trajectory>(scenarios::compose_trajectory(s, src));
    r.config_hash = r.trajectory->meta.value("config_hash", "");
    json parts = json::array();
    for (int c : s.composite_of) parts.push_back({{"simulation", c}, {"config_hash", runs_.at(c).config_hash}});
    r.disturbance = {{"composite_of", parts}, {"base", s.base}};
    runs_[id] = std::move(r);
  }
}

const RunRecord& Workspace::run(int id) {
  ensure({id});
  return runs_.at(id);
}

scenarios::TabularDataset Workspace::dataset(const scenarios::ScenarioSpec& spec) {
  ensure(spec.simulations);
  std::map<int, const plant::Trajectory*> src;
  for (int s : spec.simulations) src[s] = run(s).trajectory.get();
  return scenarios::extract_dataset(spec, registry_.catalog(), src);
}

void Workspace::release() {
  std::lock_guard lk(mu_);
  memo_.clear();
  runs_.clear();
}

}  // namespace n2olab::workflow
