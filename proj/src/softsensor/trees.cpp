#include "softsensor/trees.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/parallel.hpp"

namespace n2olab::soft {

BinnedMatrix BinnedMatrix::build(const Eigen::MatrixXd& Z, int max_bins) {
  if (max_bins < 2 || max_bins > 256) fail(ErrorKind::Parameter, "max_bins must be in [2, 256]");
  BinnedMatrix B;
  B.rows = static_cast<int>(Z.rows());
  B.cols = static_cast<int>(Z.cols());
  B.codes.resize(static_cast<std::size_t>(B.rows) * B.cols);
  B.thresholds.resize(static_cast<std::size_t>(B.cols));
  std::vector<double> v(static_cast<std::size_t>(B.rows));
  for (int j = 0; j < B.cols; ++j) {
    for (int i = 0; i < B.rows; ++i) v[i] = Z(i, j);
    std::sort(v.begin(), v.end());
    std::vector<double> uniq;
    for (double x : v)
      if (uniq.empty() || x != uniq.back()) uniq.push_back(x);
    auto& th = B.thresholds[j];
    if (static_cast<int>(uniq.size()) <= max_bins) {
      for (std::size_t k = 1; k < uniq.size(); ++k) th.push_back(0.5 * (uniq[k - 1] + uniq[k]));
    } else {
      // quantile cut points on the sorted values, each placed between two
      // distinct neighbours
      for (int q = 1; q < max_bins; ++q) {
        const auto pos = static_cast<std::size_t>(static_cast<double>(q) * B.rows / max_bins);
        const double lo = v[pos - 1];
        const auto hi_it = std::upper_bound(v.begin(), v.end(), lo);
        if (hi_it == v.end()) break;
        const double t = 0.5 * (lo + *hi_it);
        if (th.empty() || t > th.back()) th.push_back(t);
      }
    }
    for (int i = 0; i < B.rows; ++i) {
      const double x = Z(i, j);
      B.codes[static_cast<std::size_t>(j) * B.rows + i] =
          static_cast<std::uint8_t>(std::lower_bound(th.begin(), th.end(), x) - th.begin());
    }
  }
  return B;
}

double Tree::predict(const double* x) const {
  int n = 0;
  while (nodes[n].feature >= 0) n = x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
  return nodes[n].value;
}

double Tree::predict_binned(const BinnedMatrix& B, int row) const {
  int n = 0;
  while (nodes[n].feature >= 0) n = B.code(row, nodes[n].feature) <= nodes[n].bin ? nodes[n].left : nodes[n].right;
  return nodes[n].value;
}

json Tree::to_json() const {
  // parallel arrays keep artifacts compact
  std::vector<int> f, l, r, b;
  std::vector<double> t, v;
  for (const auto& n : nodes) {
    f.push_back(n.feature);
    t.push_back(n.threshold);
    b.push_back(n.bin);
    l.push_back(n.left);
    r.push_back(n.right);
    v.push_back(n.value);
  }
  return {{"feature", f}, {"threshold", t}, {"bin", b}, {"left", l}, {"right", r}, {"value", v}};
}

Tree Tree::from_json(const json& j) {
  const auto f = require_field<std::vector<int>>(j, "feature", "tree");
  const auto t = require_field<std::vector<double>>(j, "threshold", "tree");
  const auto b = require_field<std::vector<int>>(j, "bin", "tree");
  const auto l = require_field<std::vector<int>>(j, "left", "tree");
  const auto r = require_field<std::vector<int>>(j, "right", "tree");
  const auto v = require_field<std::vector<double>>(j, "value", "tree");
  const auto n = f.size();
  if (n == 0 || t.size() != n || b.size() != n || l.size() != n || r.size() != n || v.size() != n)
    fail(ErrorKind::Configuration, "tree: node arrays differ in length");
  Tree tr;
  for (std::size_t i = 0; i < n; ++i) {
    if (f[i] >= 0 && (l[i] <= static_cast<int>(i) || r[i] <= static_cast<int>(i) || l[i] >= static_cast<int>(n) ||
                      r[i] >= static_cast<int>(n)))
      fail(ErrorKind::Configuration, "tree: child index out of range");
    tr.nodes.push_back({f[i], t[i], b[i], l[i], r[i], v[i]});
  }
  return tr;
}

Tree fit_tree(const BinnedMatrix& B, const double* target, std::vector<int> rows, const TreeParams& p,
              std::mt19937_64& rng) {
  if (rows.empty()) fail(ErrorKind::Data, "tree: no training rows");
  Tree tree;
  struct Task {
    int node, lo, hi, depth;
  };
  std::vector<Task> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, static_cast<int>(rows.size()), 0});

  const int mtry = p.max_features > 0 ? std::min(p.max_features, B.cols) : B.cols;
  std::vector<int> features(static_cast<std::size_t>(B.cols));
  std::vector<double> hsum(256);
  std::vector<int> hcnt(256);

  while (!stack.empty()) {
    const Task t = stack.back();
    stack.pop_back();
    double S = 0.0, SS = 0.0;
    for (int i = t.lo; i < t.hi; ++i) {
      const double v = target[rows[i]];
      S += v;
      SS += v * v;
    }
    const int N = t.hi - t.lo;
    tree.nodes[t.node].value = S / N;
    if ((p.max_depth > 0 && t.depth >= p.max_depth) || N < 2 * p.min_samples_leaf) continue;

    for (int j = 0; j < B.cols; ++j) features[j] = j;
    if (mtry < B.cols) {
      for (int i = 0; i < mtry; ++i) {
        const auto k = i + static_cast<int>(rng() % static_cast<std::uint64_t>(B.cols - i));
        std::swap(features[i], features[k]);
      }
      std::sort(features.begin(), features.begin() + mtry);
    }

    const double base = S * S / N;
    const double tol = 1e-12 * std::max(SS, 1e-300);
    double best = tol;
    int best_f = -1, best_bin = -1;
    for (int fi = 0; fi < mtry; ++fi) {
      const int f = features[fi];
      const int nb = B.bins(f);
      if (nb < 2) continue;
      std::fill(hsum.begin(), hsum.begin() + nb, 0.0);
      std::fill(hcnt.begin(), hcnt.begin() + nb, 0);
      const std::uint8_t* col = &B.codes[static_cast<std::size_t>(f) * B.rows];
      for (int i = t.lo; i < t.hi; ++i) {
        const int r = rows[i];
        hsum[col[r]] += target[r];
        ++hcnt[col[r]];
      }
      double SL = 0.0;
      int NL = 0;
      for (int s = 0; s + 1 < nb; ++s) {
        SL += hsum[s];
        NL += hcnt[s];
        if (NL < p.min_samples_leaf || hcnt[s] == 0) continue;
        const int NR = N - NL;
        if (NR < p.min_samples_leaf) break;
        const double gain = SL * SL / NL + (S - SL) * (S - SL) / NR - base;
        if (gain > best + tol) {
          best = gain;
          best_f = f;
          best_bin = s;
        }
      }
    }
    if (best_f < 0) continue;

    const std::uint8_t* col = &B.codes[static_cast<std::size_t>(best_f) * B.rows];
    const auto mid = std::stable_partition(rows.begin() + t.lo, rows.begin() + t.hi,
                                           [&](int r) { return col[r] <= best_bin; }) -
                     rows.begin();
    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& nd = tree.nodes[t.node];
    nd.feature = best_f;
    nd.bin = best_bin;
    nd.threshold = B.thresholds[best_f][best_bin];
    nd.left = l;
    nd.right = l + 1;
    // right pushed first so the left subtree is grown first
    stack.push_back({l + 1, static_cast<int>(mid), t.hi, t.depth + 1});
    stack.push_back({l, t.lo, static_cast<int>(mid), t.depth + 1});
  }
  return tree;
}

namespace {

Eigen::VectorXd predict_trees(const std::vector<Tree>& trees, const Eigen::MatrixXd& Z, double base, double scale,
                              bool average) {
  Eigen::VectorXd out(Z.rows());
  std::vector<double> x(static_cast<std::size_t>(Z.cols()));
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    for (Eigen::Index j = 0; j < Z.cols(); ++j) x[j] = Z(i, j);
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x.data());
    out[i] = average ? s / static_cast<double>(trees.size()) : base + scale * s;
  }
  return out;
}

json trees_json(const std::vector<Tree>& trees) {
  json a = json::array();
  for (const auto& t : trees) a.push_back(t.to_json());
  return a;
}

std::vector<Tree> trees_from(const json& j, const char* what) {
  if (!j.contains("trees") || !j["trees"].is_array() || j["trees"].empty())
    fail(ErrorKind::Configuration, std::string(what) + ": missing trees");
  std::vector<Tree> out;
  for (const auto& t : j["trees"]) out.push_back(Tree::from_json(t));
  return out;
}

}  // namespace

std::unique_ptr<ForestRegressor> ForestRegressor::fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                                      int n_trees, const TreeParams& p, bool bootstrap,
                                                      int max_bins, std::uint64_t seed, unsigned jobs) {
  if (n_trees < 1) fail(ErrorKind::Parameter, "random forest: n_trees must be >= 1");
  const auto B = BinnedMatrix::build(Z, max_bins);
  const int n = B.rows;
  std::vector<Tree> trees(static_cast<std::size_t>(n_trees));
  parallel_for(trees.size(), jobs, [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[i] = bootstrap ? static_cast<int>(rng() % static_cast<std::uint64_t>(n)) : i;
    if (bootstrap) std::sort(rows.begin(), rows.end());
    trees[t] = fit_tree(B, y.data(), std::move(rows), p, rng);
  });
  return std::make_unique<ForestRegressor>(std::move(trees));
}

Eigen::VectorXd ForestRegressor::predict(const Eigen::MatrixXd& Z) const {
  return predict_trees(trees_, Z, 0.0, 1.0, true);
}

json ForestRegressor::to_json() const { return {{"trees", trees_json(trees_)}}; }

std::unique_ptr<ForestRegressor> ForestRegressor::from_json(const json& j) {
  return std::make_unique<ForestRegressor>(trees_from(j, "random forest"));
}

std::unique_ptr<BoostedRegressor> BoostedRegressor::fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                                        int rounds, double rate, const TreeParams& p,
                                                        double subsample, int max_bins, std::uint64_t seed) {
  if (rounds < 1) fail(ErrorKind::Parameter, "boosting: n_rounds must be >= 1");
  const auto B = BinnedMatrix::build(Z, max_bins);
  const int n = B.rows;
  const double base = y.mean();
  std::vector<double> F(static_cast<std::size_t>(n), base), resid(static_cast<std::size_t>(n));
  std::vector<Tree> trees;
  std::mt19937_64 rng(seed);
  const int m = std::max(1, static_cast<int>(std::lround(subsample * n)));
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int r = 0; r < rounds; ++r) {
    for (int i = 0; i < n; ++i) resid[i] = y[i] - F[i];
    for (int i = 0; i < n; ++i) all[i] = i;
    std::vector<int> rows;
    if (m < n) {
      for (int i = 0; i < m; ++i) {
        const auto k = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
        std::swap(all[i], all[k]);
      }
      rows.assign(all.begin(), all.begin() + m);
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all;
    }
    trees.push_back(fit_tree(B, resid.data(), std::move(rows), p, rng));
    for (int i = 0; i < n; ++i) F[i] += rate * trees.back().predict_binned(B, i);
  }
  return std::make_unique<BoostedRegressor>(base, rate, std::move(trees));
}

Eigen::VectorXd BoostedRegressor::predict(const Eigen::MatrixXd& Z) const {
  return predict_trees(trees_, Z, base_, rate_, false);
}

json BoostedRegressor::to_json() const { return {{"base", base_}, {"rate", rate_}, {"trees", trees_json(trees_)}}; }

std::unique_ptr<BoostedRegressor> BoostedRegressor::from_json(const json& j) {
  return std::make_unique<BoostedRegressor>(require_field<double>(j, "base", "boosting"),
                                            require_field<double>(j, "rate", "boosting"),
                                            trees_from(j, "boosting"));
}

}  // namespace n2olab::soft
