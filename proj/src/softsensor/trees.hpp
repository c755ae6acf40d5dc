#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "softsensor/model.hpp"

namespace n2olab::soft {

// Feature columns quantised to at most max_bins codes. When a column has no
// more distinct values than bins, thresholds are the midpoints between
// consecutive distinct values and splits are exact.
struct BinnedMatrix {
  int rows = 0, cols = 0;
  std::vector<std::uint8_t> codes;  // column-major
  std::vector<std::vector<double>> thresholds;

  static BinnedMatrix build(const Eigen::MatrixXd& Z, int max_bins);
  std::uint8_t code(int row, int col) const { return codes[static_cast<std::size_t>(col) * rows + row]; }
  int bins(int col) const { return static_cast<int>(thresholds[col].size()) + 1; }
};

struct TreeParams {
  int max_depth = 0;  // 0 = unbounded
  int min_samples_leaf = 1;
  int max_features = 0;  // candidate features per split; 0 = all
};

// Binary regression tree; x <= threshold goes left.
struct Tree {
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int bin = 0;  // split code: code <= bin goes left
    int left = -1, right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(const double* x) const;
  double predict_binned(const BinnedMatrix& B, int row) const;
  json to_json() const;
  static Tree from_json(const json& j);
};

// Fits on the rows listed in `rows` (repeats count as weights) to minimise
// squared error against `target`.
Tree fit_tree(const BinnedMatrix& B, const double* target, std::vector<int> rows, const TreeParams& p,
              std::mt19937_64& rng);

class ForestRegressor final : public Regressor {
 public:
  explicit ForestRegressor(std::vector<Tree> trees) : trees_(std::move(trees)) {}
  static std::unique_ptr<ForestRegressor> fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, int n_trees,
                                              const TreeParams& p, bool bootstrap, int max_bins, std::uint64_t seed,
                                              unsigned jobs);
  Eigen::VectorXd predict(const Eigen::MatrixXd& Z) const override;
  json to_json() const override;
  static std::unique_ptr<ForestRegressor> from_json(const json& j);
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  std::vector<Tree> trees_;
};

class BoostedRegressor final : public Regressor {
 public:
  BoostedRegressor(double base, double rate, std::vector<Tree> trees)
      : base_(base), rate_(rate), trees_(std::move(trees)) {}
  static std::unique_ptr<BoostedRegressor> fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, int rounds,
                                               double rate, const TreeParams& p, double subsample, int max_bins,
                                               std::uint64_t seed);
  Eigen::VectorXd predict(const Eigen::MatrixXd& Z) const override;
  json to_json() const override;
  static std::unique_ptr<BoostedRegressor> from_json(const json& j);

 private:
  double base_, rate_;
  std::vector<Tree> trees_;
};

}  // namespace n2olab::soft
