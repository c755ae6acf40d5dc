#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "common/json_util.hpp"

namespace n2olab::soft {

// Per-feature z-score fitted on training rows. Zero-variance columns are
// dropped; `kept` indexes the surviving input columns.
struct Standardizer {
  std::vector<int> kept;
  Eigen::VectorXd mean;   // of kept columns
  Eigen::VectorXd scale;  // population stdev of kept columns
  std::vector<std::string> dropped;
  std::size_t inputs = 0;

  static Standardizer fit(const Eigen::MatrixXd& X, const std::vector<std::string>& names);
  // Error(Structural) when the column count differs from the fitted input.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;

  json to_json() const;
  static Standardizer from_json(const json& j);
};

}  // namespace n2olab::soft
