#include "plant/config.hpp"

#include <cmath>
#include <filesystem>

#include "common/hash.hpp"

namespace n2olab::plant {

using namespace bio;

PlantConfig PlantConfig::defaults() {
  PlantConfig c;
  c.name = "baseline";
  for (int i = 1; i <= 4; ++i) c.tanks.push_back({"anox" + std::to_string(i), 750.0, false, 0.0, std::nullopt});
  const double do_setpoints[3] = {1.0, 1.5, 2.0};
  for (int i = 1; i <= 3; ++i)
    c.tanks.push_back({"rA" + std::to_string(i), 3000.0, true, do_setpoints[i - 1], std::nullopt});
  return c;
}

namespace {

json concentrations_to_json(const Concentrations& c) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumComponents; ++i) j[std::string(kComponentNames[i])] = c[i];
  return j;
}

void concentrations_from_json(const json& j, Concentrations& c, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::Configuration, where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::size_t idx = kNumComponents;
    for (std::size_t i = 0; i < kNumComponents; ++i)
      if (kComponentNames[i] == it.key()) idx = i;
    if (idx == kNumComponents) fail(ErrorKind::Configuration, where + ": unknown component '" + it.key() + "'");
    if (!it->is_number()) fail(ErrorKind::Configuration, where + "." + it.key() + ": expected a number");
    c[idx] = it->get<double>();
  }
}

json influent_to_json(const InfluentModel& m) {
  return json{{"flow", m.flow},
              {"infiltration_fraction", m.infiltration_fraction},
              {"concentration", concentrations_to_json(m.concentration)},
              {"flow_diurnal", {m.flow_diurnal[0], m.flow_diurnal[1]}},
              {"flow_diurnal_phase", {m.flow_diurnal_phase[0], m.flow_diurnal_phase[1]}},
              {"load_diurnal", {m.load_diurnal[0], m.load_diurnal[1]}},
              {"load_diurnal_phase", {m.load_diurnal_phase[0], m.load_diurnal_phase[1]}},
              {"weekly_amplitude", m.weekly_amplitude},
              {"lowfreq_amplitude", m.lowfreq_amplitude},
              {"lowfreq_terms", m.lowfreq_terms},
              {"temperature_mean", m.temperature_mean},
              {"temperature_amplitude", m.temperature_amplitude},
              {"temperature_peak_day", m.temperature_peak_day},
              {"temperature_diurnal", m.temperature_diurnal},
              {"rain_events_per_year", m.rain_events_per_year},
              {"rain_duration", {m.rain_duration_min, m.rain_duration_max}},
              {"rain_peak", {m.rain_peak_min, m.rain_peak_max}},
              {"n_load_factor", m.n_load_factor},
              {"temperature_offset", m.temperature_offset},
              {"rain_frequency_factor", m.rain_frequency_factor},
              {"seed", m.seed}};
}

void pair_field(const json& j, const char* key, double* out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
    fail(ErrorKind::Configuration, where + "." + key + ": expected [number, number]");
  out[0] = (*it)[0].get<double>();
  out[1] = (*it)[1].get<double>();
}

void influent_from_json(const json& j, InfluentModel& m) {
  const std::string w = "influent";
  read_field(j, "flow", m.flow, w);
  read_field(j, "infiltration_fraction", m.infiltration_fraction, w);
  if (j.contains("concentration")) concentrations_from_json(j["concentration"], m.concentration, w + ".concentration");
  pair_field(j, "flow_diurnal", m.flow_diurnal, w);
  pair_field(j, "flow_diurnal_phase", m.flow_diurnal_phase, w);
  pair_field(j, "load_diurnal", m.load_diurnal, w);
  pair_field(j, "load_diurnal_phase", m.load_diurnal_phase, w);
  read_field(j, "weekly_amplitude", m.weekly_amplitude, w);
  read_field(j, "lowfreq_amplitude", m.lowfreq_amplitude, w);
  read_field(j, "lowfreq_terms", m.lowfreq_terms, w);
  read_field(j, "temperature_mean", m.temperature_mean, w);
  read_field(j, "temperature_amplitude", m.temperature_amplitude, w);
  read_field(j, "temperature_peak_day", m.temperature_peak_day, w);
  read_field(j, "temperature_diurnal", m.temperature_diurnal, w);
  read_field(j, "rain_events_per_year", m.rain_events_per_year, w);
  double d[2] = {m.rain_duration_min, m.rain_duration_max};
  pair_field(j, "rain_duration", d, w);
  m.rain_duration_min = d[0];
  m.rain_duration_max = d[1];
  double p[2] = {m.rain_peak_min, m.rain_peak_max};
  pair_field(j, "rain_peak", p, w);
  m.rain_peak_min = p[0];
  m.rain_peak_max = p[1];
  read_field(j, "n_load_factor", m.n_load_factor, w);
  read_field(j, "temperature_offset", m.temperature_offset, w);
  read_field(j, "rain_frequency_factor", m.rain_frequency_factor, w);
  read_field(j, "seed", m.seed, w);
}

}  // namespace

PlantConfig PlantConfig::from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) fail(ErrorKind::Configuration, "plant config: expected a JSON object");
  PlantConfig c = defaults();
  read_field(j, "name", c.name, "config");

  if (j.contains("tanks")) {
    const auto& arr = j["tanks"];
    if (!arr.is_array() || arr.empty()) fail(ErrorKind::Configuration, "config.tanks: expected a non-empty array");
    c.tanks.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = "config.tanks[" + std::to_string(i) + "]";
      TankSpec t;
      t.name = require_field<std::string>(arr[i], "name", w);
      t.volume = require_field<double>(arr[i], "volume", w);
      read_field(arr[i], "aerated", t.aerated, w);
      read_field(arr[i], "do_setpoint", t.do_setpoint, w);
      if (arr[i].contains("kla_fixed") && !arr[i]["kla_fixed"].is_null())
        t.kla_fixed = require_field<double>(arr[i], "kla_fixed", w);
      c.tanks.push_back(t);
    }
  }
  if (j.contains("flows")) {
    const auto& f = j["flows"];
    read_field(f, "internal_recycle_factor", c.flows.internal_recycle_factor, "config.flows");
    read_field(f, "return_sludge_factor", c.flows.return_sludge_factor, "config.flows");
    read_field(f, "wastage", c.flows.wastage, "config.flows");
  }
  if (j.contains("primary")) {
    read_field(j["primary"], "particulate_removal", c.primary.particulate_removal, "config.primary");
    read_field(j["primary"], "sludge_flow_fraction", c.primary.sludge_flow_fraction, "config.primary");
  }
  if (j.contains("secondary")) read_field(j["secondary"], "capture", c.secondary.capture, "config.secondary");
  if (j.contains("aeration")) {
    const auto& a = j["aeration"];
    const std::string w = "config.aeration";
    read_field(a, "kla_anoxic", c.aeration.kla_anoxic, w);
    read_field(a, "kla_max", c.aeration.kla_max, w);
    read_field(a, "kla_initial", c.aeration.kla_initial, w);
    read_field(a, "K", c.aeration.K, w);
    read_field(a, "Ti", c.aeration.Ti, w);
    read_field(a, "Tt", c.aeration.Tt, w);
    read_field(a, "o2_saturation_factor", c.aeration.o2_saturation_factor, w);
    read_field(a, "diffusivity_N2O", c.aeration.diffusivity_N2O, w);
    read_field(a, "diffusivity_NO", c.aeration.diffusivity_NO, w);
    read_field(a, "diffusivity_N2", c.aeration.diffusivity_N2, w);
  }
  if (j.contains("gas_mode")) c.gas_mode = parse_gas_mode(require_field<std::string>(j, "gas_mode", "config"));
  if (j.contains("headspace")) {
    const auto& h = j["headspace"];
    const std::string w = "config.headspace";
    read_field(h, "henry_N2O", c.headspace.henry_N2O, w);
    read_field(h, "henry_NO", c.headspace.henry_NO, w);
    read_field(h, "henry_N2", c.headspace.henry_N2, w);
    read_field(h, "volume_fraction", c.headspace.volume_fraction, w);
    read_field(h, "gas_flow_ratio", c.headspace.gas_flow_ratio, w);
  }
  if (j.contains("parameter_file")) {
    std::filesystem::path p = require_field<std::string>(j, "parameter_file", "config");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.params = KineticParameterSet::load(p.string());
  }
  if (j.contains("parameters")) {
    const auto& p = j["parameters"];
    if (!p.is_object()) fail(ErrorKind::Configuration, "config.parameters: expected an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
      if (!c.params.contains(it.key()))
        fail(ErrorKind::Configuration, "config.parameters: unknown parameter '" + it.key() + "'");
      if (!it->is_number()) fail(ErrorKind::Configuration, "config.parameters." + it.key() + ": expected a number");
      c.params.set(it.key(), it->get<double>());
    }
  }
  if (j.contains("variant")) c.variant = parse_variant(require_field<std::string>(j, "variant", "config"));
  if (j.contains("influent")) influent_from_json(j["influent"], c.influent);
  if (j.contains("protocol")) {
    const auto& p = j["protocol"];
    read_field(p, "steady_days", c.protocol.steady_days, "config.protocol");
    read_field(p, "dynamic_days", c.protocol.dynamic_days, "config.protocol");
    read_field(p, "record_days", c.protocol.record_days, "config.protocol");
    read_field(p, "samples_per_day", c.protocol.samples_per_day, "config.protocol");
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    read_field(s, "rtol", c.solver.rtol, "config.solver");
    read_field(s, "atol_scale", c.solver.atol_scale, "config.solver");
    read_field(s, "h_max", c.solver.h_max, "config.solver");
    read_field(s, "h_max_steady", c.solver.h_max_steady, "config.solver");
    read_field(s, "negative_tolerance", c.solver.negative_tolerance, "config.solver");
  }
  // Influent organic N follows the kinetic composition parameters.
  auto& n = c.influent.n_content;
  n[S_S] = c.params.get("i_NSS");
  n[S_I] = c.params.get("i_NSI");
  n[X_S] = c.params.get("i_NXS");
  n[X_I] = c.params.get("i_NXI");
  n[X_AOB] = n[X_NOB] = n[X_OHO] = c.params.get("i_NBM");
  c.influent.horizon = c.protocol.dynamic_days;
  c.validate();
  return c;
}

PlantConfig PlantConfig::load(const std::string& path) {
  const json j = read_json_file(path);
  return from_json(j, std::filesystem::path(path).parent_path().string());
}

json PlantConfig::to_json() const {
  json j;
  j["name"] = name;
  json tanks_j = json::array();
  for (const auto& t : tanks) {
    json tj{{"name", t.name}, {"volume", t.volume}, {"aerated", t.aerated}, {"do_setpoint", t.do_setpoint}};
    tj["kla_fixed"] = t.kla_fixed ? json(*t.kla_fixed) : json(nullptr);
    tanks_j.push_back(tj);
  }
  j["tanks"] = tanks_j;
  j["flows"] = {{"internal_recycle_factor", flows.internal_recycle_factor},
                {"return_sludge_factor", flows.return_sludge_factor},
                {"wastage", flows.wastage}};
  j["primary"] = {{"particulate_removal", primary.particulate_removal},
                  {"sludge_flow_fraction", primary.sludge_flow_fraction}};
  j["secondary"] = {{"capture", secondary.capture}};
  j["aeration"] = {{"kla_anoxic", aeration.kla_anoxic},
                   {"kla_max", aeration.kla_max},
                   {"kla_initial", aeration.kla_initial},
                   {"K", aeration.K},
                   {"Ti", aeration.Ti},
                   {"Tt", aeration.Tt},
                   {"o2_saturation_factor", aeration.o2_saturation_factor},
                   {"diffusivity_N2O", aeration.diffusivity_N2O},
                   {"diffusivity_NO", aeration.diffusivity_NO},
                   {"diffusivity_N2", aeration.diffusivity_N2}};
  j["gas_mode"] = std::string(to_string(gas_mode));
  j["headspace"] = {{"henry_N2O", headspace.henry_N2O},
                    {"henry_NO", headspace.henry_NO},
                    {"henry_N2", headspace.henry_N2},
                    {"volume_fraction", headspace.volume_fraction},
                    {"gas_flow_ratio", headspace.gas_flow_ratio}};
  json p = json::object();
  for (const auto& n : params.names()) p[n] = params.get(n);
  j["parameters"] = p;
  j["variant"] = std::string(to_string(variant));
  j["influent"] = influent_to_json(influent);
  j["protocol"] = {{"steady_days", protocol.steady_days},
                   {"dynamic_days", protocol.dynamic_days},
                   {"record_days", protocol.record_days},
                   {"samples_per_day", protocol.samples_per_day}};
  j["solver"] = {{"rtol", solver.rtol},
                 {"atol_scale", solver.atol_scale},
                 {"h_max", solver.h_max},
                 {"h_max_steady", solver.h_max_steady},
                 {"negative_tolerance", solver.negative_tolerance}};
  return j;
}

void PlantConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorKind::Configuration, m); };
  if (tanks.size() < 1) bad("config: at least one tank required");
  for (std::size_t i = 0; i < tanks.size(); ++i) {
    const auto& t = tanks[i];
    if (!(t.volume > 0.0)) bad("config.tanks[" + std::to_string(i) + "].volume must be > 0");
    if (t.kla_fixed && !(*t.kla_fixed >= 0.0)) bad("config.tanks[" + std::to_string(i) + "].kla_fixed must be >= 0");
    if (t.aerated && !(t.do_setpoint >= 0.0)) bad("config.tanks[" + std::to_string(i) + "].do_setpoint must be >= 0");
    for (std::size_t k = 0; k < i; ++k)
      if (tanks[k].name == t.name) bad("config.tanks: duplicate tank name '" + t.name + "'");
  }
  if (!(flows.internal_recycle_factor >= 0.0 && flows.return_sludge_factor >= 0.0 && flows.wastage >= 0.0))
    bad("config.flows: flows must be >= 0");
  if (!(primary.particulate_removal >= 0.0 && primary.particulate_removal < 1.0))
    bad("config.primary.particulate_removal must lie in [0, 1)");
  if (!(primary.sludge_flow_fraction >= 0.0 && primary.sludge_flow_fraction < 0.5))
    bad("config.primary.sludge_flow_fraction must lie in [0, 0.5)");
  if (primary.particulate_removal > 0.0 && primary.sludge_flow_fraction == 0.0)
    bad("config.primary: particulate removal needs a primary sludge flow");
  if (!(secondary.capture >= 0.0 && secondary.capture <= 1.0)) bad("config.secondary.capture must lie in [0, 1]");
  if (secondary.capture > 0.0 && flows.return_sludge_factor == 0.0 && flows.wastage == 0.0)
    bad("config.secondary: solids captured but no underflow");
  const auto& a = aeration;
  if (!(a.kla_anoxic >= 0.0 && a.kla_max > 0.0 && a.K > 0.0 && a.Ti > 0.0 && a.Tt > 0.0))
    bad("config.aeration: kLa bounds and controller constants must be positive");
  if (!(a.diffusivity_N2O > 0.0 && a.diffusivity_NO > 0.0 && a.diffusivity_N2 > 0.0))
    bad("config.aeration: diffusivity ratios must be > 0");
  const auto& h = headspace;
  if (!(h.henry_N2O > 0.0 && h.henry_NO > 0.0 && h.henry_N2 > 0.0 && h.volume_fraction > 0.0 &&
        h.gas_flow_ratio >= 0.0))
    bad("config.headspace: constants must be positive");
  if (!(protocol.steady_days >= 0.0 && protocol.dynamic_days > 0.0 && protocol.record_days > 0.0 &&
        protocol.record_days <= protocol.dynamic_days && protocol.samples_per_day > 0))
    bad("config.protocol: need 0 < record_days <= dynamic_days and samples_per_day > 0");
  if (!(solver.rtol > 0.0 && solver.atol_scale > 0.0 && solver.h_max > 0.0 && solver.h_max_steady > 0.0))
    bad("config.solver: tolerances and step limits must be > 0");
  if (flows.wastage >= influent.flow * (1.0 - primary.sludge_flow_fraction))
    bad("config.flows.wastage exceeds the clarified influent flow");
  try {
    params.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Parameter, e.what());
  }
}

std::string PlantConfig::hash() const { return sha256_hex(to_json().dump()); }

double PlantConfig::aerobic_volume() const {
  double v = 0.0;
  for (const auto& t : tanks)
    if (t.aerated) v += t.volume;
  return v;
}

double PlantConfig::total_volume() const {
  double v = 0.0;
  for (const auto& t : tanks) v += t.volume;
  return v;
}

int PlantConfig::index_of(const std::string& tank) const {
  for (std::size_t i = 0; i < tanks.size(); ++i)
    if (tanks[i].name == tank) return static_cast<int>(i);
  return -1;
}

}  // namespace n2olab::plant
