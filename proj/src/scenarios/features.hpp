#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "common/json_util.hpp"

namespace n2olab::scenarios {

enum class FeatureSetId { F12, F14, F21 };
enum class TargetKind { GasRA1, LiqRA1, GasTOT };

std::string_view to_string(FeatureSetId f);
FeatureSetId parse_feature_set(std::string_view s);
std::string_view to_string(TargetKind t);
TargetKind parse_target(std::string_view s);

// One monitored signal: how it is labelled in datasets and which trajectory
// channel it is read from.
struct FeatureSignal {
  std::string name;
  std::string location;
  std::string unit;
  std::string channel;

  // "name@location[unit]"
  std::string token() const;
  bool operator==(const FeatureSignal& o) const = default;
};

struct ColumnToken {
  std::string name, location, unit;
};
// Throws Error(Schema) on a malformed token.
ColumnToken parse_token(std::string_view token);

// Sensor layout of the three feature sets (F12 is a prefix of F14, which is a
// prefix of F21).
struct FeatureCatalog {
  std::vector<FeatureSignal> f12;
  std::vector<FeatureSignal> f14_extra;
  std::vector<FeatureSignal> f21_extra;

  static FeatureCatalog defaults();
  static FeatureCatalog from_json(const json& j);
  json to_json() const;

  std::vector<FeatureSignal> features(FeatureSetId id) const;
};

FeatureSignal target_signal(TargetKind t);

}  // namespace n2olab::scenarios
