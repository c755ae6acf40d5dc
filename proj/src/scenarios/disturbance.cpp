#include "scenarios/disturbance.hpp"

#include <random>

#include "common/error.hpp"

namespace n2olab::scenarios {

using plant::PlantConfig;

std::string_view to_string(DisturbanceKind k) {
  switch (k) {
    case DisturbanceKind::None: return "None";
    case DisturbanceKind::MassTransferEq: return "MassTransferEq";
    case DisturbanceKind::AerobicVolume: return "AerobicVolume";
    case DisturbanceKind::MicrobioNonN2O: return "MicrobioNonN2O";
    case DisturbanceKind::MicrobioN2O: return "MicrobioN2O";
    case DisturbanceKind::Influent: return "Influent";
    case DisturbanceKind::BiologicalStructure: return "BiologicalStructure";
  }
  return "None";
}

DisturbanceKind parse_disturbance(std::string_view s) {
  for (auto k : {DisturbanceKind::None, DisturbanceKind::MassTransferEq, DisturbanceKind::AerobicVolume,
                 DisturbanceKind::MicrobioNonN2O, DisturbanceKind::MicrobioN2O, DisturbanceKind::Influent,
                 DisturbanceKind::BiologicalStructure})
    if (to_string(k) == s) return k;
  fail(ErrorKind::Configuration, "unknown disturbance '" + std::string(s) + "'");
}

Disturbance Disturbance::from_json(const json& j) {
  Disturbance d;
  if (j.is_string()) {
    d.kind = parse_disturbance(j.get<std::string>());
    return d;
  }
  if (!j.is_object()) fail(ErrorKind::Configuration, "disturbance: expected a name or an object");
  d.kind = parse_disturbance(require_field<std::string>(j, "kind", "disturbance"));
  read_field(j, "volume_factor", d.volume_factor, "disturbance");
  read_field(j, "relative_change", d.relative_change, "disturbance");
  read_field(j, "n_load_factor", d.n_load_factor, "disturbance");
  read_field(j, "temperature_offset", d.temperature_offset, "disturbance");
  read_field(j, "rain_frequency_factor", d.rain_frequency_factor, "disturbance");
  if (!(d.volume_factor > 0.0 && d.relative_change >= 0.0 && d.relative_change < 1.0 && d.n_load_factor > 0.0 &&
        d.rain_frequency_factor >= 0.0))
    fail(ErrorKind::Configuration, "disturbance: magnitudes out of range");
  return d;
}

json Disturbance::to_json() const {
  json j{{"kind", std::string(to_string(kind))}};
  switch (kind) {
    case DisturbanceKind::AerobicVolume: j["volume_factor"] = volume_factor; break;
    case DisturbanceKind::MicrobioNonN2O:
    case DisturbanceKind::MicrobioN2O: j["relative_change"] = effective_relative_change(); break;
    case DisturbanceKind::Influent:
      j["n_load_factor"] = n_load_factor;
      j["temperature_offset"] = temperature_offset;
      j["rain_frequency_factor"] = rain_frequency_factor;
      break;
    default: break;
  }
  return j;
}

double Disturbance::effective_relative_change() const {
  if (relative_change > 0.0) return relative_change;
  if (kind == DisturbanceKind::MicrobioNonN2O) return 0.10;
  if (kind == DisturbanceKind::MicrobioN2O) return 0.20;
  return 0.0;
}

DisturbedConfig apply_disturbance(const PlantConfig& base, const Disturbance& d, std::uint64_t seed) {
  DisturbedConfig out{base, d.to_json()};
  auto& c = out.config;
  out.record["seed"] = seed;
  switch (d.kind) {
    case DisturbanceKind::None: break;
    case DisturbanceKind::MassTransferEq: c.gas_mode = plant::GasTransferMode::DynamicHeadspace; break;
    case DisturbanceKind::AerobicVolume: {
      json changed = json::object();
      for (auto& t : c.tanks)
        if (t.aerated) {
          t.volume *= d.volume_factor;
          changed[t.name] = t.volume;
        }
      out.record["volumes"] = changed;
      break;
    }
    case DisturbanceKind::MicrobioNonN2O:
    case DisturbanceKind::MicrobioN2O: {
      const auto tag = d.kind == DisturbanceKind::MicrobioN2O ? bio::ParamTag::N2O : bio::ParamTag::NonN2O;
      const double rel = d.effective_relative_change();
      std::mt19937_64 rng(seed);
      json signs = json::object();
      for (const auto& name : c.params.names_with_tag(tag)) {
        const int sign = (rng() >> 63) ? 1 : -1;
        c.params.set(name, base.params.get(name) * (1.0 + sign * rel));
        signs[name] = sign;
      }
      out.record["signs"] = signs;
      break;
    }
    case DisturbanceKind::Influent:
      c.influent.n_load_factor = d.n_load_factor;
      c.influent.temperature_offset = d.temperature_offset;
      c.influent.rain_frequency_factor = d.rain_frequency_factor;
      break;
    case DisturbanceKind::BiologicalStructure: c.variant = bio::ModelVariant::AlternativeAOB; break;
  }
  c.validate();
  return out;
}

}  // namespace n2olab::scenarios
