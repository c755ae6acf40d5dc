#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "common/json_util.hpp"
#include "softsensor/preprocess.hpp"

namespace n2olab::soft {

enum class Family { KNN, RandomForest, GradientBoostedTrees, OLS, SecondOrderInteractions, StepwiseLinear };

// Short names: knn, rf, gbt, ols, poly2, stepwise.
std::string_view to_string(Family f);
Family parse_family(std::string_view s);  // short or long name
std::vector<Family> all_families();

struct HyperparameterRange {
  double low, high;
  bool integer;
  double fallback;
};

// Declared hyperparameters of each family with their valid ranges.
const std::map<std::string, HyperparameterRange>& hyperparameter_ranges(Family f);

struct ModelSpec {
  Family family = Family::RandomForest;
  std::map<std::string, double> hyper;  // missing entries take the declared fallback
  std::uint64_t seed = 1;

  double get(const std::string& name) const;
  // Error(Parameter) on unknown names, out-of-range values or non-integers.
  void validate() const;
  // All declared hyperparameters with values filled in.
  std::map<std::string, double> resolved() const;

  json to_json() const;
  static ModelSpec from_json(const json& j);
};

// Fitted regressor on standardised features.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& Z) const = 0;
  // Number of fitted terms excluding the intercept, for adjusted R2; empty
  // for non-linear families.
  virtual std::optional<int> linear_terms() const { return std::nullopt; }
  virtual json to_json() const = 0;
};

struct FitOptions {
  unsigned jobs = 1;
};

std::unique_ptr<Regressor> fit_regressor(const ModelSpec& spec, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                         const std::vector<std::string>& names, const FitOptions& opt = {});
std::unique_ptr<Regressor> regressor_from_json(Family f, const json& j);

// Transform plus regressor, taking raw feature columns in `features` order.
struct TrainedModel {
  ModelSpec spec;
  std::vector<std::string> features;
  std::string target;
  Standardizer transform;
  std::shared_ptr<const Regressor> regressor;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

  // Self-describing artifact; from_json(to_json()) predicts bit-identically.
  json to_json() const;
  static TrainedModel from_json(const json& j);
};

TrainedModel train(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<std::string>& features, const std::string& target, const FitOptions& opt = {});

}  // namespace n2olab::soft
