#include "scenarios/features.hpp"

#include "common/error.hpp"

namespace n2olab::scenarios {

std::string_view to_string(FeatureSetId f) {
  switch (f) {
    case FeatureSetId::F12: return "F12";
    case FeatureSetId::F14: return "F14";
    case FeatureSetId::F21: return "F21";
  }
  return "F12";
}

FeatureSetId parse_feature_set(std::string_view s) {
  if (s == "F12") return FeatureSetId::F12;
  if (s == "F14") return FeatureSetId::F14;
  if (s == "F21") return FeatureSetId::F21;
  fail(ErrorKind::Configuration, "unknown feature set '" + std::string(s) + "' (expected F12, F14 or F21)");
}

std::string_view to_string(TargetKind t) {
  switch (t) {
    case TargetKind::GasRA1: return "Gas.rA1";
    case TargetKind::LiqRA1: return "Liq.rA1";
    case TargetKind::GasTOT: return "Gas.TOT";
  }
  return "Gas.TOT";
}

TargetKind parse_target(std::string_view s) {
  if (s == "Gas.rA1") return TargetKind::GasRA1;
  if (s == "Liq.rA1") return TargetKind::LiqRA1;
  if (s == "Gas.TOT") return TargetKind::GasTOT;
  fail(ErrorKind::Configuration, "unknown target '" + std::string(s) + "' (expected Gas.rA1, Liq.rA1 or Gas.TOT)");
}

std::string FeatureSignal::token() const { return name + "@" + location + "[" + unit + "]"; }

ColumnToken parse_token(std::string_view token) {
  const auto at = token.find('@');
  const auto lb = token.find('[', at == std::string_view::npos ? 0 : at);
  if (at == std::string_view::npos || at == 0 || lb == std::string_view::npos || lb == at + 1 ||
      token.back() != ']')
    fail(ErrorKind::Schema, "malformed column token '" + std::string(token) + "' (expected name@location[unit])");
  return {std::string(token.substr(0, at)), std::string(token.substr(at + 1, lb - at - 1)),
          std::string(token.substr(lb + 1, token.size() - lb - 2))};
}

FeatureCatalog FeatureCatalog::defaults() {
  FeatureCatalog c;
  c.f12 = {
      {"Flow", "influent", "m3/d", "influent.Q"},
      {"TKN", "influent", "gN/m3", "influent.TKN"},
      {"Temperature", "plant", "degC", "influent.T"},
      {"NO3", "anox4", "gN/m3", "anox4.S_NO3"},
      {"NH4", "rA1", "gN/m3", "rA1.S_NH4"},
      {"DO", "rA1", "gO2/m3", "rA1.S_O2"},
      {"DO", "rA2", "gO2/m3", "rA2.S_O2"},
      {"NH4", "rA3", "gN/m3", "rA3.S_NH4"},
      {"NO2", "rA3", "gN/m3", "rA3.S_NO2"},
      {"NO3", "rA3", "gN/m3", "rA3.S_NO3"},
      {"DO", "rA3", "gO2/m3", "rA3.S_O2"},
      {"TSS", "rA3", "g/m3", "rA3.TSS"},
  };
  c.f14_extra = {
      {"kLa_O2", "rA1", "1/d", "rA1.kLa"},
      {"COD", "influent", "gCOD/m3", "influent.COD"},
  };
  c.f21_extra = {
      {"NH2OH", "rA1", "gN/m3", "rA1.S_NH2OH"},   {"NO", "rA1", "gN/m3", "rA1.S_NO"},
      {"S_S", "rA1", "gCOD/m3", "rA1.S_S"},       {"S_I", "rA1", "gCOD/m3", "rA1.S_I"},
      {"X_OHO", "rA1", "gCOD/m3", "rA1.X_OHO"},   {"X_AOB", "rA1", "gCOD/m3", "rA1.X_AOB"},
      {"X_NOB", "rA1", "gCOD/m3", "rA1.X_NOB"},
  };
  return c;
}

namespace {

std::vector<FeatureSignal> signals_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorKind::Configuration, where + ": expected an array");
  std::vector<FeatureSignal> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    FeatureSignal s;
    s.name = require_field<std::string>(j[i], "name", w);
    s.location = require_field<std::string>(j[i], "location", w);
    s.unit = require_field<std::string>(j[i], "unit", w);
    s.channel = require_field<std::string>(j[i], "channel", w);
    out.push_back(std::move(s));
  }
  return out;
}

json signals_to_json(const std::vector<FeatureSignal>& v) {
  json a = json::array();
  for (const auto& s : v)
    a.push_back({{"name", s.name}, {"location", s.location}, {"unit", s.unit}, {"channel", s.channel}});
  return a;
}

}  // namespace

FeatureCatalog FeatureCatalog::from_json(const json& j) {
  FeatureCatalog c;
  c.f12 = signals_from_json(j.value("F12", json()), "feature_sets.F12");
  c.f14_extra = signals_from_json(j.value("F14_extra", json()), "feature_sets.F14_extra");
  c.f21_extra = signals_from_json(j.value("F21_extra", json()), "feature_sets.F21_extra");
  const auto all = c.features(FeatureSetId::F21);
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (all[a].token() == all[b].token())
        fail(ErrorKind::Configuration, "feature_sets: duplicate signal " + all[a].token());
  return c;
}

json FeatureCatalog::to_json() const {
  return {{"F12", signals_to_json(f12)}, {"F14_extra", signals_to_json(f14_extra)},
          {"F21_extra", signals_to_json(f21_extra)}};
}

std::vector<FeatureSignal> FeatureCatalog::features(FeatureSetId id) const {
  std::vector<FeatureSignal> out = f12;
  if (id == FeatureSetId::F12) return out;
  out.insert(out.end(), f14_extra.begin(), f14_extra.end());
  if (id == FeatureSetId::F14) return out;
  out.insert(out.end(), f21_extra.begin(), f21_extra.end());
  return out;
}

FeatureSignal target_signal(TargetKind t) {
  switch (t) {
    case TargetKind::GasRA1: return {"N2O_gas", "rA1", "gN/d", "rA1.gas_N2O"};
    case TargetKind::LiqRA1: return {"N2O_liq", "rA1", "gN/m3", "rA1.S_N2O"};
    case TargetKind::GasTOT: return {"N2O_gas", "TOT", "gN/d", "Gas.TOT"};
  }
  return {};
}

}  // namespace n2olab::scenarios
