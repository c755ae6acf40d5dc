#include "softsensor/model.hpp"

#include <cmath>

#include "common/error.hpp"
#include "softsensor/knn.hpp"
#include "softsensor/linear.hpp"
#include "softsensor/trees.hpp"

namespace n2olab::soft {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::KNN: return "knn";
    case Family::RandomForest: return "rf";
    case Family::GradientBoostedTrees: return "gbt";
    case Family::OLS: return "ols";
    case Family::SecondOrderInteractions: return "poly2";
    case Family::StepwiseLinear: return "stepwise";
  }
  return "rf";
}

Family parse_family(std::string_view s) {
  for (auto f : all_families())
    if (to_string(f) == s) return f;
  if (s == "kNN") return Family::KNN;
  if (s == "RandomForest") return Family::RandomForest;
  if (s == "GradientBoostedTrees") return Family::GradientBoostedTrees;
  if (s == "SecondOrderInteractions") return Family::SecondOrderInteractions;
  if (s == "StepwiseLinear") return Family::StepwiseLinear;
  fail(ErrorKind::Configuration, "unknown model family '" + std::string(s) + "'");
}

std::vector<Family> all_families() {
  return {Family::KNN, Family::RandomForest, Family::GradientBoostedTrees, Family::OLS,
          Family::SecondOrderInteractions, Family::StepwiseLinear};
}

const std::map<std::string, HyperparameterRange>& hyperparameter_ranges(Family f) {
  static const std::map<std::string, HyperparameterRange> knn{{"k", {1, 500, true, 20}},
                                                              {"weighted", {0, 1, true, 0}}};
  static const std::map<std::string, HyperparameterRange> rf{
      {"n_trees", {1, 2000, true, 100}},        {"max_depth", {0, 64, true, 0}},
      {"min_samples_leaf", {1, 1000, true, 3}}, {"max_features", {0.01, 1, false, 0.5}},
      {"bootstrap", {0, 1, true, 1}},           {"max_bins", {2, 256, true, 255}}};
  static const std::map<std::string, HyperparameterRange> gbt{
      {"n_rounds", {1, 5000, true, 300}},        {"learning_rate", {1e-3, 1, false, 0.1}},
      {"max_depth", {1, 16, true, 6}},           {"min_samples_leaf", {1, 1000, true, 10}},
      {"subsample", {0.05, 1, false, 0.8}},      {"max_features", {0.01, 1, false, 1.0}},
      {"max_bins", {2, 256, true, 255}}};
  static const std::map<std::string, HyperparameterRange> none;
  static const std::map<std::string, HyperparameterRange> step{{"alpha", {1e-9, 0.5, false, 0.05}},
                                                               {"degree", {1, 2, true, 2}}};
  switch (f) {
    case Family::KNN: return knn;
    case Family::RandomForest: return rf;
    case Family::GradientBoostedTrees: return gbt;
    case Family::StepwiseLinear: return step;
    default: return none;
  }
}

double ModelSpec::get(const std::string& name) const {
  const auto& r = hyperparameter_ranges(family);
  const auto it = r.find(name);
  if (it == r.end())
    fail(ErrorKind::Parameter, std::string(to_string(family)) + ": no hyperparameter '" + name + "'");
  const auto h = hyper.find(name);
  return h == hyper.end() ? it->second.fallback : h->second;
}

void ModelSpec::validate() const {
  const auto& r = hyperparameter_ranges(family);
  for (const auto& [name, v] : hyper) {
    const auto it = r.find(name);
    const std::string where = std::string(to_string(family)) + "." + name;
    if (it == r.end()) fail(ErrorKind::Parameter, where + ": unknown hyperparameter");
    if (!(v >= it->second.low && v <= it->second.high))
      fail(ErrorKind::Parameter, where + " = " + std::to_string(v) + " outside [" + std::to_string(it->second.low) +
                                     ", " + std::to_string(it->second.high) + "]");
    if (it->second.integer && v != std::floor(v)) fail(ErrorKind::Parameter, where + " must be an integer");
  }
}

std::map<std::string, double> ModelSpec::resolved() const {
  std::map<std::string, double> out;
  for (const auto& [name, r] : hyperparameter_ranges(family)) out[name] = get(name);
  return out;
}

json ModelSpec::to_json() const {
  return {{"family", std::string(to_string(family))}, {"hyperparameters", resolved()}, {"seed", seed}};
}

ModelSpec ModelSpec::from_json(const json& j) {
  ModelSpec s;
  s.family = parse_family(require_field<std::string>(j, "family", "model"));
  read_field(j, "hyperparameters", s.hyper, "model");
  read_field(j, "seed", s.seed, "model");
  s.validate();
  return s;
}

namespace {

int feature_count(double fraction, Eigen::Index p) {
  return std::max(1, static_cast<int>(std::lround(fraction * static_cast<double>(p))));
}

}  // namespace

std::unique_ptr<Regressor> fit_regressor(const ModelSpec& spec, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                         const std::vector<std::string>& names, const FitOptions& opt) {
  spec.validate();
  if (Z.rows() != y.size()) fail(ErrorKind::Structural, "train: feature and target rows differ");
  if (Z.rows() < 2) fail(ErrorKind::Data, "train: need at least two rows");
  auto i = [&](const char* n) { return static_cast<int>(spec.get(n)); };
  switch (spec.family) {
    case Family::KNN:
      return std::make_unique<KnnRegressor>(Z, y, std::min<int>(i("k"), static_cast<int>(Z.rows())),
                                            i("weighted") != 0);
    case Family::RandomForest: {
      TreeParams p{i("max_depth"), i("min_samples_leaf"), feature_count(spec.get("max_features"), Z.cols())};
      return ForestRegressor::fit(Z, y, i("n_trees"), p, i("bootstrap") != 0, i("max_bins"), spec.seed, opt.jobs);
    }
    case Family::GradientBoostedTrees: {
      TreeParams p{i("max_depth"), i("min_samples_leaf"), feature_count(spec.get("max_features"), Z.cols())};
      return BoostedRegressor::fit(Z, y, i("n_rounds"), spec.get("learning_rate"), p, spec.get("subsample"),
                                   i("max_bins"), spec.seed);
    }
    case Family::OLS: return LinearRegressor::fit(Z, y, first_order_terms(static_cast<int>(Z.cols())), names);
    case Family::SecondOrderInteractions:
      return LinearRegressor::fit(Z, y, second_order_terms(static_cast<int>(Z.cols())), names);
    case Family::StepwiseLinear: {
      const int p = static_cast<int>(Z.cols());
      return LinearRegressor::stepwise(Z, y, i("degree") == 1 ? first_order_terms(p) : second_order_terms(p), names,
                                       spec.get("alpha"));
    }
  }
  fail(ErrorKind::Parameter, "train: unsupported family");
}

std::unique_ptr<Regressor> regressor_from_json(Family f, const json& j) {
  switch (f) {
    case Family::KNN: return KnnRegressor::from_json(j);
    case Family::RandomForest: return ForestRegressor::from_json(j);
    case Family::GradientBoostedTrees: return BoostedRegressor::from_json(j);
    default: return LinearRegressor::from_json(j);
  }
}

Eigen::VectorXd TrainedModel::predict(const Eigen::MatrixXd& X) const { return regressor->predict(transform.apply(X)); }

json TrainedModel::to_json() const {
  return {{"format", "n2olab-model"}, {"version", 1},          {"spec", spec.to_json()},
          {"features", features},     {"target", target},      {"transform", transform.to_json()},
          {"model", regressor->to_json()}};
}

TrainedModel TrainedModel::from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "n2olab-model")
    fail(ErrorKind::Configuration, "not a model artifact (format != n2olab-model)");
  if (j.value("version", 0) != 1) fail(ErrorKind::Configuration, "unsupported model artifact version");
  TrainedModel m;
  m.spec = ModelSpec::from_json(require_field<json>(j, "spec", "artifact"));
  m.features = require_field<std::vector<std::string>>(j, "features", "artifact");
  m.target = require_field<std::string>(j, "target", "artifact");
  m.transform = Standardizer::from_json(require_field<json>(j, "transform", "artifact"));
  if (m.transform.inputs != m.features.size())
    fail(ErrorKind::Configuration, "artifact: transform does not match the feature list");
  m.regressor = regressor_from_json(m.spec.family, require_field<json>(j, "model", "artifact"));
  return m;
}

TrainedModel train(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<std::string>& features, const std::string& target, const FitOptions& opt) {
  if (static_cast<std::size_t>(X.cols()) != features.size())
    fail(ErrorKind::Structural, "train: feature names do not match the matrix");
  TrainedModel m;
  m.spec = spec;
  m.features = features;
  m.target = target;
  m.transform = Standardizer::fit(X, features);
  std::vector<std::string> kept;
  for (int k : m.transform.kept) kept.push_back(features[k]);
  m.regressor = fit_regressor(spec, m.transform.apply(X), y, kept, opt);
  return m;
}

}  // namespace n2olab::soft
