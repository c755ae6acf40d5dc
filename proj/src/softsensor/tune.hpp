#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scenarios/dataset.hpp"
#include "softsensor/model.hpp"

namespace n2olab::soft {

// One searched hyperparameter: either a value list or a [low, high] range.
struct SearchParam {
  std::string name;
  std::vector<double> values;
  double low = 0.0, high = 0.0;
  bool integer = false;
  bool log = false;

  json to_json() const;
  static SearchParam from_json(const json& j);
};
using SearchSpace = std::vector<SearchParam>;

SearchSpace default_search_space(Family f);

struct TuneOptions {
  int budget = 16;  // number of configurations
  std::uint64_t seed = 1;
  std::optional<SearchSpace> space;
  double holdout = 0.2;  // trailing fraction used for scoring
  unsigned jobs = 1;
};

struct TuneResult {
  ModelSpec best;
  double best_score = 0.0;  // holdout R2 at the final rung
  json log = json::array();
};

// Successive halving: `budget` configurations (the first is the base spec),
// scored on growing evenly-spaced fractions of the training block; the better
// half survives each rung. When the space is a finite grid no larger than the
// budget, every grid point is tried.
TuneResult tune(const ModelSpec& base, const scenarios::TabularDataset& d, const TuneOptions& opt = {});

}  // namespace n2olab::soft
