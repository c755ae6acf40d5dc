#include "softsensor/preprocess.hpp"

#include <cmath>

#include "common/error.hpp"

namespace n2olab::soft {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
  if (X.rows() < 2) fail(ErrorKind::Data, "standardize: need at least two training rows");
  if (!X.allFinite()) fail(ErrorKind::Data, "standardize: missing or non-finite values");
  Standardizer s;
  s.inputs = static_cast<std::size_t>(X.cols());
  std::vector<double> mu, sd;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double m = X.col(j).mean();
    const double v = (X.col(j).array() - m).square().mean();
    // relative test so a large constant offset with rounding noise counts as constant
    if (!(v > 1e-24 * std::max(1.0, m * m))) {
      s.dropped.push_back(j < static_cast<Eigen::Index>(names.size()) ? names[j] : "#" + std::to_string(j));
      continue;
    }
    s.kept.push_back(static_cast<int>(j));
    mu.push_back(m);
    sd.push_back(std::sqrt(v));
  }
  s.mean = Eigen::Map<Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
  s.scale = Eigen::Map<Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != inputs)
    fail(ErrorKind::Structural, "standardize: expected " + std::to_string(inputs) + " columns, got " +
                                    std::to_string(X.cols()));
  Eigen::MatrixXd Z(X.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    Z.col(k) = (X.col(kept[j]).array() - mean[k]) / scale[k];
  }
  return Z;
}

json Standardizer::to_json() const {
  return {{"inputs", inputs},
          {"kept", kept},
          {"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
          {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())},
          {"dropped", dropped}};
}

Standardizer Standardizer::from_json(const json& j) {
  Standardizer s;
  s.inputs = require_field<std::size_t>(j, "inputs", "transform");
  s.kept = require_field<std::vector<int>>(j, "kept", "transform");
  auto m = require_field<std::vector<double>>(j, "mean", "transform");
  auto sd = require_field<std::vector<double>>(j, "scale", "transform");
  read_field(j, "dropped", s.dropped, "transform");
  if (m.size() != s.kept.size() || sd.size() != s.kept.size())
    fail(ErrorKind::Configuration, "transform: kept/mean/scale lengths differ");
  s.mean = Eigen::Map<Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  s.scale = Eigen::Map<Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return s;
}

}  // namespace n2olab::soft
