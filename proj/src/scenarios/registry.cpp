#include "scenarios/registry.hpp"

#include <algorithm>
#include <set>

#include "common/error.hpp"

namespace n2olab::scenarios {

using plant::Trajectory;

std::string_view to_string(Composition c) {
  switch (c) {
    case Composition::None: return "None";
    case Composition::BiasedTarget: return "BiasedTarget";
    case Composition::SixYearConcat: return "SixYearConcat";
  }
  return "None";
}

Composition parse_composition(std::string_view s) {
  if (s == "None") return Composition::None;
  if (s == "BiasedTarget") return Composition::BiasedTarget;
  if (s == "SixYearConcat") return Composition::SixYearConcat;
  fail(ErrorKind::Configuration, "unknown composition '" + std::string(s) + "'");
}

json ScenarioSpec::to_json() const {
  return {{"id", id},
          {"key", key},
          {"simulation", simulation_label},
          {"sources", simulations},
          {"features", std::string(scenarios::to_string(features))},
          {"target", std::string(scenarios::to_string(target))},
          {"interval_minutes", interval_minutes},
          {"composition", std::string(scenarios::to_string(composition))},
          {"aim", aim}};
}

ScenarioSpec ScenarioSpec::from_json(const json& j) {
  ScenarioSpec s;
  const std::string w = "scenario";
  s.id = require_field<int>(j, "id", w);
  const std::string wi = w + "[" + std::to_string(s.id) + "]";
  s.key = require_field<std::string>(j, "key", wi);
  s.simulation_label = require_field<std::string>(j, "simulation", wi);
  s.simulations = require_field<std::vector<int>>(j, "sources", wi);
  s.features = parse_feature_set(require_field<std::string>(j, "features", wi));
  s.target = parse_target(require_field<std::string>(j, "target", wi));
  read_field(j, "interval_minutes", s.interval_minutes, wi);
  std::string comp = "None";
  read_field(j, "composition", comp, wi);
  s.composition = parse_composition(comp);
  read_field(j, "aim", s.aim, wi);
  if (s.simulations.empty()) fail(ErrorKind::Configuration, wi + ".sources: at least one simulation required");
  if (s.interval_minutes < 15 || s.interval_minutes % 15 != 0)
    fail(ErrorKind::Configuration, wi + ".interval_minutes must be a positive multiple of 15");
  if (s.composition == Composition::None && s.simulations.size() != 1)
    fail(ErrorKind::Configuration, wi + ": several sources need a composition rule");
  if (s.composition != Composition::None && s.simulations.size() < 2)
    fail(ErrorKind::Configuration, wi + ": composition needs at least two sources");
  return s;
}

bool ScenarioSpec::operator==(const ScenarioSpec& o) const { return to_json() == o.to_json(); }

namespace {

SimulationSpec sim(int id, std::string key, std::string description, DisturbanceKind kind) {
  SimulationSpec s;
  s.id = id;
  s.key = std::move(key);
  s.description = std::move(description);
  s.disturbance.kind = kind;
  return s;
}

ScenarioSpec scen(int id, std::string key, std::string label, std::vector<int> sources, FeatureSetId f, TargetKind t,
                  int minutes, Composition c, std::string aim) {
  ScenarioSpec s;
  s.id = id;
  s.key = std::move(key);
  s.simulation_label = std::move(label);
  s.simulations = std::move(sources);
  s.features = f;
  s.target = t;
  s.interval_minutes = minutes;
  s.composition = c;
  s.aim = std::move(aim);
  return s;
}

}  // namespace

Registry Registry::defaults() {
  using D = DisturbanceKind;
  using F = FeatureSetId;
  using T = TargetKind;
  using C = Composition;
  Registry r;
  r.catalog_ = FeatureCatalog::defaults();
  r.simulations_ = {
      sim(1, "baseline", "reference plant and dynamic influent", D::None),
      sim(2, "mass_transfer_eq", "gas exchange with a dynamic headspace (partial equilibrium)", D::MassTransferEq),
      sim(3, "aerobic_volume", "aerated volumes reduced to 80% (dead zones)", D::AerobicVolume),
      sim(4, "microbio_non_n2o", "non-N2O kinetic parameters perturbed by +-10%", D::MicrobioNonN2O),
      sim(5, "microbio_n2o", "N2O kinetic parameters perturbed by +-20%", D::MicrobioN2O),
      sim(6, "influent", "higher N-load, warmer, twice the rain events", D::Influent),
      sim(7, "biased_n2o", "baseline signals with N2O channels averaged over simulations 2-6", D::None),
      sim(8, "biological_structure", "alternative AOB N2O model structure", D::BiologicalStructure),
  };
  r.simulations_[6].composite_of = {2, 3, 4, 5, 6};
  r.simulations_[6].base = 1;
  r.scenarios_ = {
      scen(1, "N2O_Gas_rA1", "1", {1}, F::F12, T::GasRA1, 15, C::None, "one aerated reactor, gas"),
      scen(2, "N2O_Gas_TOT", "1", {1}, F::F12, T::GasTOT, 15, C::None, "site level, gas"),
      scen(3, "N2O_Liq_rA1", "1", {1}, F::F12, T::LiqRA1, 15, C::None, "one aerated reactor, liquid"),
      scen(4, "N2O_Gas_rA1_14feat", "1", {1}, F::F14, T::GasRA1, 15, C::None, "adds aeration kLa and influent COD"),
      scen(5, "N2O_Gas_rA1_21feat", "1", {1}, F::F21, T::GasRA1, 15, C::None,
           "adds NH2OH, NO, soluble organics and biomass abundances"),
      scen(6, "Baseline", "1", {1}, F::F14, T::GasTOT, 15, C::None, "site level, gas"),
      scen(7, "Baseline_1h", "1", {1}, F::F14, T::GasTOT, 60, C::None, "hourly sampling"),
      scen(8, "Baseline_3h", "1", {1}, F::F14, T::GasTOT, 180, C::None, "three-hourly sampling"),
      scen(9, "MassTransferEq", "2", {2}, F::F14, T::GasTOT, 15, C::None, "partial-equilibrium gas transfer"),
      scen(10, "AerobicVolume", "3", {3}, F::F14, T::GasTOT, 15, C::None, "80% aerobic volume"),
      scen(11, "MicrobioNonN2O", "4", {4}, F::F14, T::GasTOT, 15, C::None, "+-10% on 26 non-N2O parameters"),
      scen(12, "MicrobioN2O", "5", {5}, F::F14, T::GasTOT, 15, C::None, "+-20% on 17 N2O parameters"),
      scen(13, "Influent", "6", {6}, F::F14, T::GasTOT, 15, C::None, "N-load, temperature and rain raised"),
      scen(14, "BiasedN2O", "7", {1, 2, 3, 4, 5, 6}, F::F14, T::GasTOT, 15, C::BiasedTarget,
           "features of simulation 1, N2O from simulations 2-6"),
      scen(15, "SixYear", "1:6", {1, 2, 3, 4, 5, 6}, F::F14, T::GasTOT, 15, C::SixYearConcat,
           "six yearly campaigns concatenated, every sixth sample kept"),
      scen(16, "BiologicalStructure", "8", {8}, F::F14, T::GasTOT, 15, C::None, "alternative AOB structure"),
  };
  r.check();
  return r;
}

Registry Registry::load(const std::string& path) { return from_json(read_json_file(path)); }

Registry Registry::from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Configuration, "registry: expected an object");
  Registry r;
  r.catalog_ = j.contains("feature_sets") ? FeatureCatalog::from_json(j["feature_sets"]) : FeatureCatalog::defaults();
  const auto& sims = j.value("simulations", json::array());
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const std::string w = "registry.simulations[" + std::to_string(i) + "]";
    SimulationSpec s;
    s.id = require_field<int>(sims[i], "id", w);
    s.key = require_field<std::string>(sims[i], "key", w);
    read_field(sims[i], "description", s.description, w);
    if (sims[i].contains("disturbance")) s.disturbance = Disturbance::from_json(sims[i]["disturbance"]);
    if (sims[i].contains("composite_of")) {
      s.composite_of = require_field<std::vector<int>>(sims[i], "composite_of", w);
      s.base = require_field<int>(sims[i], "base", w);
    }
    r.simulations_.push_back(std::move(s));
  }
  const auto& scs = j.value("scenarios", json::array());
  for (const auto& s : scs) r.scenarios_.push_back(ScenarioSpec::from_json(s));
  r.check();
  return r;
}

json Registry::to_json() const {
  json sims = json::array();
  for (const auto& s : simulations_) {
    json o{{"id", s.id}, {"key", s.key}, {"description", s.description}, {"disturbance", s.disturbance.to_json()}};
    if (s.composite()) {
      o["composite_of"] = s.composite_of;
      o["base"] = s.base;
    }
    sims.push_back(o);
  }
  json scs = json::array();
  for (const auto& s : scenarios_) scs.push_back(s.to_json());
  return {{"feature_sets", catalog_.to_json()}, {"simulations", sims}, {"scenarios", scs}};
}

void Registry::check() const {
  std::set<int> ids;
  std::set<std::string> keys;
  for (const auto& s : simulations_) {
    if (!ids.insert(s.id).second || !keys.insert(s.key).second)
      fail(ErrorKind::Configuration, "registry: duplicate simulation id or key '" + s.key + "'");
  }
  for (const auto& s : simulations_)
    for (int src : s.composite_of) {
      if (!ids.count(src) || simulation(src).composite())
        fail(ErrorKind::Configuration, "registry: composite " + s.key + " refers to an unknown or composite run");
    }
  std::set<int> sids;
  std::set<std::string> skeys;
  for (const auto& s : scenarios_) {
    if (!sids.insert(s.id).second || !skeys.insert(s.key).second)
      fail(ErrorKind::Configuration, "registry: duplicate scenario id or key '" + s.key + "'");
    for (int src : s.simulations)
      if (!ids.count(src))
        fail(ErrorKind::Configuration, "registry: scenario " + s.key + " refers to unknown simulation " +
                                           std::to_string(src));
  }
}

const SimulationSpec& Registry::simulation(int id) const {
  for (const auto& s : simulations_)
    if (s.id == id) return s;
  fail(ErrorKind::Configuration, "unknown simulation " + std::to_string(id));
}

const SimulationSpec& Registry::simulation(const std::string& id_or_key) const {
  for (const auto& s : simulations_)
    if (s.key == id_or_key || std::to_string(s.id) == id_or_key) return s;
  fail(ErrorKind::Configuration, "unknown simulation '" + id_or_key + "'");
}

const ScenarioSpec& Registry::scenario(const std::string& id_or_key) const {
  for (const auto& s : scenarios_)
    if (s.key == id_or_key || std::to_string(s.id) == id_or_key) return s;
  fail(ErrorKind::Configuration, "unknown scenario '" + id_or_key + "'");
}

std::vector<int> Registry::required_runs(const std::vector<ScenarioSpec>& specs) const {
  std::set<int> runs;
  for (const auto& sc : specs)
    for (int id : sc.simulations) {
      const auto& s = simulation(id);
      if (s.composite()) {
        runs.insert(s.base);
        runs.insert(s.composite_of.begin(), s.composite_of.end());
      } else {
        runs.insert(id);
      }
    }
  return {runs.begin(), runs.end()};
}

bool is_n2o_channel(const std::string& c) {
  auto ends_with = [&](const std::string& suffix) {
    return c.size() >= suffix.size() && c.compare(c.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return c == "Gas.TOT" || c == "settler.N2O" || ends_with(".gas_N2O") || ends_with(".S_N2O");
}

namespace {

const Trajectory& run_of(const std::map<int, const Trajectory*>& runs, int id) {
  auto it = runs.find(id);
  if (it == runs.end() || !it->second)
    fail(ErrorKind::Configuration, "simulation " + std::to_string(id) + " has not been run");
  return *it->second;
}

std::vector<double> mean_series(const std::map<int, const Trajectory*>& runs, const std::vector<int>& ids,
                                const std::string& channel, std::size_t rows) {
  std::vector<double> m(rows, 0.0);
  for (int id : ids) {
    const auto& s = run_of(runs, id).series(channel);
    if (s.size() != rows)
      fail(ErrorKind::Structural, "simulation " + std::to_string(id) + ": recorded grid differs from the base run");
    for (std::size_t i = 0; i < rows; ++i) m[i] += s[i];
  }
  for (auto& v : m) v /= static_cast<double>(ids.size());
  return m;
}

}  // namespace

Trajectory compose_trajectory(const SimulationSpec& spec, const std::map<int, const Trajectory*>& runs) {
  if (!spec.composite()) fail(ErrorKind::Configuration, "simulation " + spec.key + " is not a composite");
  Trajectory t = run_of(runs, spec.base);
  for (std::size_t k = 0; k < t.channels.size(); ++k)
    if (is_n2o_channel(t.channels[k].name))
      t.columns[k] = mean_series(runs, spec.composite_of, t.channels[k].name, t.rows());
  json sources = json::array();
  for (int id : spec.composite_of) sources.push_back(run_of(runs, id).meta.value("config_hash", ""));
  t.meta["composite"] = {{"key", spec.key}, {"base", spec.base}, {"sources", spec.composite_of},
                         {"source_hashes", sources}};
  return t;
}

TabularDataset extract_dataset(const ScenarioSpec& spec, const FeatureCatalog& catalog,
                               const std::map<int, const Trajectory*>& runs) {
  const auto feats = catalog.features(spec.features);
  const auto target = target_signal(spec.target);
  const std::size_t step = static_cast<std::size_t>(spec.interval_minutes / 15);

  TabularDataset d;
  d.id = spec.key;
  for (const auto& f : feats) d.feature_names.push_back(f.token());
  d.target_name = target.token();

  auto fill = [&](const Trajectory& tr, std::size_t row0, double t0, std::size_t stride, std::size_t phase) {
    std::vector<const std::vector<double>*> cols;
    for (const auto& f : feats) cols.push_back(&tr.series(f.channel));
    std::size_t r = row0;
    for (std::size_t i = phase; i < tr.rows(); i += stride, ++r) {
      d.time[r] = t0 + tr.time[i];
      for (std::size_t j = 0; j < feats.size(); ++j) d.X(static_cast<Eigen::Index>(r), j) = (*cols[j])[i];
    }
    return r;
  };
  auto allocate = [&](std::size_t n) {
    d.time.assign(n, 0.0);
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(feats.size()));
    d.y.resize(static_cast<Eigen::Index>(n));
  };
  auto rows_after = [](std::size_t n, std::size_t stride, std::size_t phase) {
    return n > phase ? (n - phase + stride - 1) / stride : 0;
  };

  json sources = json::array();
  for (int id : spec.simulations) {
    const auto& tr = run_of(runs, id);
    sources.push_back({{"simulation", id}, {"config_hash", tr.meta.value("config_hash", "")},
                       {"influent_seed", tr.meta.value("influent_seed", json())}});
  }

  switch (spec.composition) {
    case Composition::None: {
      const auto& tr = run_of(runs, spec.simulations.front());
      allocate(rows_after(tr.rows(), step, 0));
      fill(tr, 0, 0.0, step, 0);
      const auto& ys = tr.series(target.channel);
      for (std::size_t i = 0, r = 0; i < tr.rows(); i += step, ++r) d.y[static_cast<Eigen::Index>(r)] = ys[i];
      break;
    }
    case Composition::BiasedTarget: {
      const auto& tr = run_of(runs, spec.simulations.front());
      allocate(rows_after(tr.rows(), step, 0));
      fill(tr, 0, 0.0, step, 0);
      const std::vector<int> rest(spec.simulations.begin() + 1, spec.simulations.end());
      const auto ys = mean_series(runs, rest, target.channel, tr.rows());
      for (std::size_t i = 0, r = 0; i < tr.rows(); i += step, ++r) d.y[static_cast<Eigen::Index>(r)] = ys[i];
      break;
    }
    case Composition::SixYearConcat: {
      // Concatenate chronologically, then keep every k-th sample of the
      // combined series (k = number of sources).
      const std::size_t k = spec.simulations.size() * step;
      std::size_t total = 0, offset = 0;
      for (int id : spec.simulations) {
        const auto n = run_of(runs, id).rows();
        total += rows_after(n, k, (k - offset % k) % k);
        offset += n;
      }
      allocate(total);
      std::size_t r = 0;
      double t0 = 0.0;
      offset = 0;
      for (int id : spec.simulations) {
        const auto& tr = run_of(runs, id);
        const std::size_t phase = (k - offset % k) % k;
        const std::size_t r0 = r;
        r = fill(tr, r0, t0, k, phase);
        const auto& ys = tr.series(target.channel);
        for (std::size_t i = phase, q = r0; i < tr.rows(); i += k, ++q) d.y[static_cast<Eigen::Index>(q)] = ys[i];
        const double dt = tr.rows() > 1 ? tr.time[1] - tr.time[0] : 0.0;
        t0 += tr.time.empty() ? 0.0 : tr.time.back() + dt;
        offset += tr.rows();
      }
      break;
    }
  }
  d.meta = {{"scenario_id", spec.id},
            {"scenario", spec.key},
            {"simulation", spec.simulation_label},
            {"sources", sources},
            {"features", std::string(to_string(spec.features))},
            {"target", std::string(to_string(spec.target))},
            {"interval_minutes", spec.interval_minutes},
            {"composition", std::string(to_string(spec.composition))},
            {"decimation_phase", 0}};
  d.validate();
  return d;
}

}  // namespace n2olab::scenarios
