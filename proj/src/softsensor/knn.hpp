#pragma once

#include <vector>

#include "softsensor/model.hpp"

namespace n2olab::soft {

// k-nearest-neighbour regression over a KD-tree. Ties in distance are broken
// by training row index, so results do not depend on traversal order.
class KnnRegressor final : public Regressor {
 public:
  KnnRegressor(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, int k, bool weighted);

  Eigen::VectorXd predict(const Eigen::MatrixXd& Z) const override;
  json to_json() const override;
  static std::unique_ptr<KnnRegressor> from_json(const json& j);

  // Indices of the k nearest training rows, nearest first.
  std::vector<int> neighbours(const double* q) const;

 private:
  struct Node {
    int lo, hi;         // range in perm_
    int dim = -1;       // -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
  };
  void build();
  int build(int lo, int hi);
  double predict_one(const double* q) const;

  int k_;
  bool weighted_;
  int dim_;
  std::vector<double> points_;  // row-major
  std::vector<double> y_;
  std::vector<int> perm_;
  std::vector<Node> nodes_;
};

}  // namespace n2olab::soft
