#include "softsensor/knn.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "common/error.hpp"

namespace n2olab::soft {

namespace {

constexpr int kLeafSize = 16;

struct Candidate {
  double d2;
  int index;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};

}  // namespace

KnnRegressor::KnnRegressor(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, int k, bool weighted)
    : k_(k), weighted_(weighted), dim_(static_cast<int>(Z.cols())) {
  if (Z.rows() != y.size()) fail(ErrorKind::Structural, "knn: feature and target rows differ");
  if (k < 1 || k > Z.rows()) fail(ErrorKind::Parameter, "knn: k must be between 1 and the number of training rows");
  points_.resize(static_cast<std::size_t>(Z.rows() * Z.cols()));
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.cols(); ++j) points_[static_cast<std::size_t>(i * Z.cols() + j)] = Z(i, j);
  y_.assign(y.data(), y.data() + y.size());
  build();
}

void KnnRegressor::build() {
  const int n = static_cast<int>(y_.size());
  perm_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm_[i] = i;
  nodes_.clear();
  build(0, n);
}

int KnnRegressor::build(int lo, int hi) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({lo, hi});
  if (hi - lo <= kLeafSize || dim_ == 0) return id;
  int best = -1;
  double spread = 0.0;
  for (int d = 0; d < dim_; ++d) {
    double mn = HUGE_VAL, mx = -HUGE_VAL;
    for (int i = lo; i < hi; ++i) {
      const double v = points_[static_cast<std::size_t>(perm_[i]) * dim_ + d];
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mx - mn > spread) {
      spread = mx - mn;
      best = d;
    }
  }
  if (best < 0) return id;  // all points identical
  const int mid = lo + (hi - lo) / 2;
  auto key = [&](int r) { return points_[static_cast<std::size_t>(r) * dim_ + best]; };
  std::nth_element(perm_.begin() + lo, perm_.begin() + mid, perm_.begin() + hi,
                   [&](int a, int b) { return key(a) < key(b) || (key(a) == key(b) && a < b); });
  const double split = key(perm_[mid]);
  const int l = build(lo, mid);
  const int r = build(mid, hi);
  nodes_[id].dim = best;
  nodes_[id].split = split;
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

std::vector<int> KnnRegressor::neighbours(const double* q) const {
  std::priority_queue<Candidate> heap;  // max-heap on (d2, index)
  auto visit = [&](auto&& self, int id) -> void {
    const Node& nd = nodes_[id];
    if (nd.dim < 0) {
      for (int i = nd.lo; i < nd.hi; ++i) {
        const int r = perm_[i];
        const double* p = &points_[static_cast<std::size_t>(r) * dim_];
        double d2 = 0.0;
        for (int d = 0; d < dim_; ++d) d2 += (p[d] - q[d]) * (p[d] - q[d]);
        const Candidate c{d2, r};
        if (static_cast<int>(heap.size()) < k_) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = q[nd.dim] - nd.split;
    const int near = diff < 0.0 ? nd.left : nd.right;
    const int far = diff < 0.0 ? nd.right : nd.left;
    self(self, near);
    // <= keeps equal-distance candidates reachable for the index tie-break
    if (static_cast<int>(heap.size()) < k_ || diff * diff <= heap.top().d2) self(self, far);
  };
  visit(visit, 0);
  std::vector<int> out(heap.size());
  for (auto i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    out[i] = heap.top().index;
    heap.pop();
  }
  return out;
}

double KnnRegressor::predict_one(const double* q) const {
  const auto nb = neighbours(q);
  if (!weighted_) {
    double s = 0.0;
    for (int r : nb) s += y_[r];
    return s / static_cast<double>(nb.size());
  }
  double sw = 0.0, s = 0.0, s0 = 0.0;
  int zero = 0;
  for (int r : nb) {
    const double* p = &points_[static_cast<std::size_t>(r) * dim_];
    double d2 = 0.0;
    for (int d = 0; d < dim_; ++d) d2 += (p[d] - q[d]) * (p[d] - q[d]);
    if (d2 == 0.0) {
      ++zero;
      s0 += y_[r];
    } else {
      const double w = 1.0 / std::sqrt(d2);
      sw += w;
      s += w * y_[r];
    }
  }
  return zero > 0 ? s0 / zero : s / sw;
}

Eigen::VectorXd KnnRegressor::predict(const Eigen::MatrixXd& Z) const {
  if (Z.cols() != dim_) fail(ErrorKind::Structural, "knn: feature count differs from training");
  Eigen::VectorXd out(Z.rows());
  std::vector<double> q(static_cast<std::size_t>(dim_));
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    for (int d = 0; d < dim_; ++d) q[d] = Z(i, d);
    out[i] = predict_one(q.data());
  }
  return out;
}

json KnnRegressor::to_json() const {
  return {{"k", k_}, {"weighted", weighted_}, {"dim", dim_}, {"points", points_}, {"y", y_}};
}

std::unique_ptr<KnnRegressor> KnnRegressor::from_json(const json& j) {
  const int dim = require_field<int>(j, "dim", "knn");
  const auto pts = require_field<std::vector<double>>(j, "points", "knn");
  auto y = require_field<std::vector<double>>(j, "y", "knn");
  if (dim < 0 || pts.size() != y.size() * static_cast<std::size_t>(dim))
    fail(ErrorKind::Configuration, "knn: points do not match dim x rows");
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(y.size()), dim);
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (int d = 0; d < dim; ++d) Z(i, d) = pts[static_cast<std::size_t>(i * dim + d)];
  return std::make_unique<KnnRegressor>(Z, Eigen::Map<Eigen::VectorXd>(y.data(), Z.rows()),
                                        require_field<int>(j, "k", "knn"), require_field<bool>(j, "weighted", "knn"));
}

}  // namespace n2olab::soft
