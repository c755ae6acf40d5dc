#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "common/json_util.hpp"

namespace n2olab::scenarios {

// Timestamped feature matrix plus target; columns are named with
// name@location[unit] tokens.
struct TabularDataset {
  std::string id;
  std::vector<double> time;  // d
  std::vector<std::string> feature_names;
  Eigen::MatrixXd X;  // rows x features
  std::string target_name;
  Eigen::VectorXd y;
  json meta = json::object();

  std::size_t rows() const { return time.size(); }
  std::size_t features() const { return feature_names.size(); }
  int feature_index(const std::string& token) const;  // -1 when absent

  // Throws Error(Structural/Data) on shape mismatch, non-finite values or a
  // time column that is not strictly increasing.
  void validate() const;

  // Keeps rows phase, phase+step, ...
  TabularDataset decimate(std::size_t step, std::size_t phase = 0) const;
  // Keeps the named feature columns in the given order; Error(Schema) when absent.
  TabularDataset select(const std::vector<std::string>& tokens) const;

  // Header: time token, features, target last. No units row; units live in the tokens.
  void write_csv(const std::string& path) const;
  static TabularDataset read_csv(const std::string& path);
};

}  // namespace n2olab::scenarios
