#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "common/error.hpp"
#include "doctest.h"
#include "scenarios/dataset.hpp"
#include "softsensor/evaluate.hpp"
#include "softsensor/knn.hpp"
#include "softsensor/linear.hpp"
#include "softsensor/model.hpp"
#include "softsensor/preprocess.hpp"
#include "softsensor/trees.hpp"
#include "softsensor/tune.hpp"

using namespace n2olab;
using namespace n2olab::soft;
using scenarios::TabularDataset;

namespace {

Eigen::MatrixXd random_matrix(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = g(rng);
  return X;
}

TabularDataset make_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::string& id = "synthetic") {
  TabularDataset d;
  d.id = id;
  for (Eigen::Index i = 0; i < X.rows(); ++i) d.time.push_back(static_cast<double>(i) / 96.0);
  for (Eigen::Index j = 0; j < X.cols(); ++j) d.feature_names.push_back("f" + std::to_string(j) + "@test[-]");
  d.X = X;
  d.y = y;
  d.target_name = "y@test[-]";
  return d;
}

// Smooth nonlinear target over a slowly varying input trajectory.
TabularDataset smooth_dataset(int n, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double t = 0.05 * i;
    X(i, 0) = std::sin(t) + 0.3 * g(rng);
    X(i, 1) = std::cos(0.7 * t) + 0.3 * g(rng);
    X(i, 2) = g(rng);
    X(i, 3) = 0.5 * std::sin(0.13 * t) + 0.3 * g(rng);
    y[i] = std::sin(2.0 * X(i, 0)) + X(i, 1) * X(i, 1) + 0.5 * X(i, 3) + noise * g(rng);
  }
  return make_dataset(X, y);
}

// Exhaustive-split regression tree; thresholds are the midpoints between the
// distinct values of each whole column, candidates in (feature, threshold) order.
struct OracleTree {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  std::vector<std::vector<double>> mids;
  struct Node {
    int f = -1;
    double t = 0;
    int l = -1, r = -1;
    double v = 0;
  };
  std::vector<Node> nodes;

  OracleTree(const Eigen::MatrixXd& X_, const Eigen::VectorXd& y_) : X(X_), y(y_) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      std::vector<double> u(X.col(j).data(), X.col(j).data() + X.rows());
      std::sort(u.begin(), u.end());
      u.erase(std::unique(u.begin(), u.end()), u.end());
      std::vector<double> m;
      for (std::size_t k = 1; k < u.size(); ++k) m.push_back(0.5 * (u[k - 1] + u[k]));
      mids.push_back(m);
    }
    std::vector<int> all(static_cast<std::size_t>(X.rows()));
    std::iota(all.begin(), all.end(), 0);
    grow(all);
  }

  int grow(const std::vector<int>& rows) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double S = 0, SS = 0;
    for (int r : rows) {
      S += y[r];
      SS += y[r] * y[r];
    }
    const double N = static_cast<double>(rows.size());
    nodes[id].v = S / N;
    if (rows.size() < 2) return id;
    const double tol = 1e-12 * std::max(SS, 1e-300);
    double best = tol;
    int bf = -1;
    double bt = 0;
    for (int f = 0; f < X.cols(); ++f) {
      std::size_t prev = 0;
      for (double t : mids[f]) {
        double SL = 0;
        std::size_t NL = 0;
        for (int r : rows)
          if (X(r, f) <= t) {
            SL += y[r];
            ++NL;
          }
        if (NL == prev) continue;  // same partition as the previous threshold
        prev = NL;
        if (NL == 0 || NL == rows.size()) continue;
        const double NR = N - NL;
        const double gain = SL * SL / NL + (S - SL) * (S - SL) / NR - S * S / N;
        if (gain > best + tol) {
          best = gain;
          bf = f;
          bt = t;
        }
      }
    }
    if (bf < 0) return id;
    std::vector<int> L, R;
    for (int r : rows) (X(r, bf) <= bt ? L : R).push_back(r);
    const int l = grow(L);
    const int rr = grow(R);
    nodes[id].f = bf;
    nodes[id].t = bt;
    nodes[id].l = l;
    nodes[id].r = rr;
    return id;
  }

  double predict(const Eigen::RowVectorXd& x) const {
    int n = 0;
    while (nodes[n].f >= 0) n = x[nodes[n].f] <= nodes[n].t ? nodes[n].l : nodes[n].r;
    return nodes[n].v;
  }
};

}  // namespace

TEST_CASE("standardiser: moments, dropped columns and bit-identical re-application") {
  Eigen::MatrixXd X = random_matrix(200, 3, 5);
  X.col(1).setConstant(7.5);
  X.col(2) = 1000.0 + 50.0 * X.col(2).array();
  const auto s = Standardizer::fit(X, {"a", "b", "c"});
  REQUIRE(s.kept == std::vector<int>{0, 2});
  CHECK(s.dropped == std::vector<std::string>{"b"});
  const auto Z = s.apply(X);
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    CHECK(std::abs(Z.col(j).mean()) < 1e-9);
    CHECK(std::abs(std::sqrt((Z.col(j).array() - Z.col(j).mean()).square().mean()) - 1.0) < 1e-9);
  }
  CHECK(s.apply(X) == Z);
  CHECK(Standardizer::from_json(json::parse(s.to_json().dump())).apply(X) == Z);
  CHECK_THROWS_AS(s.apply(Eigen::MatrixXd(3, 2)), Error);
}

TEST_CASE("k-fold splits") {
  const auto f = kfold_split(10, 5);
  REQUIRE(f.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(f[i] == std::vector<int>{2 * i, 2 * i + 1});
  const auto s1 = kfold_split(103, 5, FoldMode::Shuffled, 9);
  CHECK(s1 == kfold_split(103, 5, FoldMode::Shuffled, 9));
  CHECK(s1 != kfold_split(103, 5, FoldMode::Shuffled, 10));
  std::set<int> all;
  std::size_t total = 0;
  for (const auto& fold : s1) {
    total += fold.size();
    all.insert(fold.begin(), fold.end());
    CHECK(std::is_sorted(fold.begin(), fold.end()));
  }
  CHECK(total == 103);
  CHECK(all.size() == 103);
  CHECK(complement(f[1], 10) == std::vector<int>{0, 1, 4, 5, 6, 7, 8, 9});
  CHECK_THROWS_AS(kfold_split(4, 5), Error);
}

TEST_CASE("score functions") {
  Eigen::VectorXd y(4), p(4);
  y << 1, 2, 3, 4;
  p << 1, 2, 3, 5;
  CHECK(r2_score(y, y) == 1.0);
  CHECK(r2_score(y, p) == doctest::Approx(1.0 - 1.0 / 5.0));
  CHECK(mse(y, p) == doctest::Approx(0.25));
  CHECK(mae(y, p) == doctest::Approx(0.25));
  CHECK(adjusted_r2(0.8, 100, 5) < 0.8);
  CHECK(adjusted_r2(1.0, 100, 5) == 1.0);
}

TEST_CASE("kNN memorises its training set and matches brute-force neighbours") {
  const auto X = random_matrix(300, 5, 21);
  Eigen::VectorXd y = X.col(0).array().sin() + X.col(1).array();
  KnnRegressor one(X, y, 1, false);
  CHECK(r2_score(y, one.predict(X)) == 1.0);

  KnnRegressor knn(X, y, 7, false);
  const auto Q = random_matrix(50, 5, 22);
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    std::vector<std::pair<double, int>> all;
    for (Eigen::Index r = 0; r < X.rows(); ++r) all.push_back({(X.row(r) - Q.row(i)).squaredNorm(), static_cast<int>(r)});
    std::sort(all.begin(), all.end());
    std::vector<double> q(Q.row(i).data(), Q.row(i).data() + 5);
    Eigen::RowVectorXd row = Q.row(i);
    std::vector<double> qq(row.data(), row.data() + row.size());
    const auto nb = knn.neighbours(qq.data());
    REQUIRE(nb.size() == 7);
    for (int k = 0; k < 7; ++k) CHECK(nb[k] == all[k].second);
  }
  CHECK_THROWS_AS(KnnRegressor(X, y, 0, false), Error);
}

TEST_CASE("single unbounded tree matches the exhaustive-split oracle on 50 rows") {
  const auto X = random_matrix(50, 4, 31);
  std::mt19937_64 g(32);
  std::normal_distribution<double> e;
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) y[i] = X(i, 0) * X(i, 1) + std::abs(X(i, 2)) + 0.3 * e(g);
  const auto forest = ForestRegressor::fit(X, y, 1, TreeParams{0, 1, 0}, false, 255, 1, 1);
  const OracleTree oracle(X, y);
  CHECK(forest->trees()[0].nodes.size() == oracle.nodes.size());
  const auto Q = random_matrix(500, 4, 33);
  const auto pred = forest->predict(Q);
  for (Eigen::Index i = 0; i < Q.rows(); ++i) CHECK(pred[i] == oracle.predict(Q.row(i)));
  const auto ptrain = forest->predict(X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) CHECK(ptrain[i] == doctest::Approx(y[i]));

  // the same through the RF family with subsampling disabled
  ModelSpec spec;
  spec.family = Family::RandomForest;
  spec.hyper = {{"n_trees", 1}, {"bootstrap", 0}, {"max_features", 1.0}, {"min_samples_leaf", 1}, {"max_depth", 0}};
  const auto reg = fit_regressor(spec, X, y, {});
  CHECK(reg->predict(Q) == pred);
}

TEST_CASE("binning is exact below the bin count and quantised above it") {
  Eigen::MatrixXd X(6, 1);
  X << 3, 1, 2, 2, 5, 1;
  const auto B = BinnedMatrix::build(X, 8);
  CHECK(B.thresholds[0] == std::vector<double>{1.5, 2.5, 4.0});
  CHECK(B.code(0, 0) == 2);
  CHECK(B.code(4, 0) == 3);
  const auto big = BinnedMatrix::build(random_matrix(5000, 1, 3), 32);
  CHECK(big.bins(0) <= 32);
  std::vector<int> counts(32, 0);
  for (int i = 0; i < 5000; ++i) ++counts[big.code(i, 0)];
  for (int b = 0; b < big.bins(0); ++b) CHECK(counts[b] > 50);
}

TEST_CASE("OLS recovers exact linear coefficients") {
  const auto X = random_matrix(120, 3, 41);
  Eigen::VectorXd y = 2.0 + 1.5 * X.col(0).array() - 0.25 * X.col(1).array() + 4.0 * X.col(2).array();
  const auto f = fit_linear(X, y, first_order_terms(3), {"a", "b", "c"});
  CHECK(std::abs(f.coef[0] - 2.0) < 1e-8);
  CHECK(std::abs(f.coef[1] - 1.5) < 1e-8);
  CHECK(std::abs(f.coef[2] + 0.25) < 1e-8);
  CHECK(std::abs(f.coef[3] - 4.0) < 1e-8);
  CHECK(f.r2 == doctest::Approx(1.0));

  ModelSpec spec;
  spec.family = Family::OLS;
  const auto m = train(spec, X, y, {"a", "b", "c"}, "y");
  CHECK(r2_score(y, m.predict(X)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(second_order_terms(14).size() == 1 + 14 + 14 + 91);
}

TEST_CASE("rank-deficient design names the dependent columns") {
  Eigen::MatrixXd X = random_matrix(60, 3, 43);
  X.col(2) = 2.0 * X.col(0) - X.col(1);
  const Eigen::VectorXd y = X.col(0);
  try {
    fit_linear(X, y, first_order_terms(3), {"a", "b", "c"});
    FAIL("accepted a singular design");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("rank-deficient") != std::string::npos);
  }
}

TEST_CASE("backward elimination removes an appended noise feature") {
  auto X = random_matrix(400, 3, 51);
  std::mt19937_64 g(52);
  std::normal_distribution<double> e;
  Eigen::VectorXd y(400);
  for (int i = 0; i < 400; ++i) y[i] = 1.0 + 2.0 * X(i, 0) - X(i, 1) + 0.1 * e(g);
  const auto m = LinearRegressor::stepwise(X, y, first_order_terms(3), {"a", "b", "noise"}, 0.05);
  CHECK(m->term_names() == std::vector<std::string>{"(intercept)", "a", "b"});
  REQUIRE(m->history().size() == 1);
  CHECK(m->history()[0].removed == "noise");
  CHECK(m->history()[0].p_value > 0.05);

  Eigen::MatrixXd X2 = X.leftCols(2);
  const auto keep = LinearRegressor::stepwise(X2, y, first_order_terms(2), {"a", "b"}, 0.05);
  CHECK(keep->history().empty());
  const auto full = LinearRegressor::fit(X2, y, first_order_terms(2), {"a", "b"});
  CHECK((keep->coefficients() - full->coefficients()).norm() < 1e-12);

  Eigen::VectorXd pure(400);
  for (int i = 0; i < 400; ++i) pure[i] = e(g);
  const auto none = LinearRegressor::stepwise(X, pure, first_order_terms(3), {"a", "b", "c"}, 1e-6);
  CHECK(none->intercept_only());
}

TEST_CASE("second-order model beats first order on an interaction target") {
  auto d = smooth_dataset(1500, 0.05, 61);
  ModelSpec lin, quad;
  lin.family = Family::StepwiseLinear;
  lin.hyper["degree"] = 1;
  quad.family = Family::StepwiseLinear;
  const auto a = cross_validate(lin, d).report;
  const auto b = cross_validate(quad, d).report;
  CHECK(*b.mean_train_adj_r2 > *a.mean_train_adj_r2);
  CHECK(*a.mean_train_adj_r2 <= a.mean_train_r2);
}

TEST_CASE("cross-validation: held-out scores, overfit guard and determinism") {
  const auto d = smooth_dataset(2000, 0.1, 71);
  for (auto fam : {Family::KNN, Family::RandomForest, Family::GradientBoostedTrees, Family::OLS,
                   Family::SecondOrderInteractions}) {
    ModelSpec s;
    s.family = fam;
    if (fam == Family::RandomForest) s.hyper["n_trees"] = 30;
    if (fam == Family::GradientBoostedTrees) s.hyper["n_rounds"] = 80;
    const auto cv = cross_validate(s, d);
    CAPTURE(to_string(fam));
    CHECK(cv.report.folds.size() == 5);
    CHECK(cv.report.mean_val_r2 <= cv.report.mean_train_r2);
    if (cv.report.mean_train_adj_r2) CHECK(*cv.report.mean_train_adj_r2 <= cv.report.mean_train_r2);
    if (fam != Family::OLS) CHECK(cv.report.mean_val_r2 > 0.6);
    std::size_t n = 0;
    for (const auto& f : cv.report.folds) n += f.n_val;
    CHECK(n == d.rows());
  }
  ModelSpec rf;
  rf.family = Family::RandomForest;
  rf.hyper["n_trees"] = 12;
  rf.seed = 5;
  CvOptions serial, threaded;
  threaded.jobs = 4;
  const auto a = cross_validate(rf, d, serial);
  const auto b = cross_validate(rf, d, threaded);
  CHECK(a.report.to_json() == b.report.to_json());
  CHECK(a.models[2].to_json() == b.models[2].to_json());
}

TEST_CASE("model artifacts round-trip bit-identically") {
  const auto d = smooth_dataset(600, 0.1, 81);
  for (auto fam : all_families()) {
    ModelSpec s;
    s.family = fam;
    s.hyper = fam == Family::RandomForest ? std::map<std::string, double>{{"n_trees", 5}}
              : fam == Family::GradientBoostedTrees ? std::map<std::string, double>{{"n_rounds", 20}}
                                                    : std::map<std::string, double>{};
    const auto m = train(s, d.X, d.y, d.feature_names, d.target_name);
    const auto back = TrainedModel::from_json(json::parse(m.to_json().dump()));
    CAPTURE(to_string(fam));
    CHECK(back.predict(d.X) == m.predict(d.X));
    CHECK(back.to_json() == m.to_json());
  }
  CHECK_THROWS_AS(TrainedModel::from_json(json{{"format", "other"}}), Error);
}

TEST_CASE("hyperparameter validation") {
  ModelSpec s;
  s.family = Family::KNN;
  s.hyper["k"] = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s.hyper["k"] = 2.5;
  CHECK_THROWS_AS(s.validate(), Error);
  s.hyper = {{"depth", 3}};
  CHECK_THROWS_AS(s.validate(), Error);
  CHECK(parse_family("RandomForest") == Family::RandomForest);
  CHECK_THROWS_AS(parse_family("svr"), Error);
}

TEST_CASE("permutation importance: noise, copied feature and rescaling") {
  auto X = random_matrix(3000, 3, 91);
  Eigen::VectorXd y = X.col(0).array().sin() * 2.0 + X.col(1).array();
  const auto d = make_dataset(X, y);
  ModelSpec s;
  s.family = Family::GradientBoostedTrees;
  s.hyper["n_rounds"] = 100;
  const auto cv = cross_validate(s, d);
  const auto imp = permutation_importance(cv, d, {20, 3, 1000, 1});
  CHECK(std::abs(imp.importance[2]) < 0.01);
  CHECK(imp.rank[2] == 3);
  CHECK(imp.repeats == 20);

  // rescaled feature: standardisation absorbs the scale, ranks do not change
  auto X2 = X;
  X2.col(1) = 40.0 * X2.col(1).array() + 3.0;
  const auto d2 = make_dataset(X2, y);
  const auto imp2 = permutation_importance(cross_validate(s, d2), d2, {20, 3, 1000, 1});
  CHECK(imp2.rank == imp.rank);

  Eigen::VectorXd copy = X.col(1);
  const auto d3 = make_dataset(X, copy);
  ModelSpec ols;
  ols.family = Family::OLS;
  const auto imp3 = permutation_importance(cross_validate(ols, d3), d3);
  CHECK(imp3.sorted_features.front() == d3.feature_names[1]);
  CHECK(imp3.cumulative.front() >= 0.95);
  CHECK(imp3.n90 == 1);
  CHECK(imp3.importance[1] == doctest::Approx(imp3.baseline_r2 * 2.0).epsilon(0.1));

  CHECK_THROWS_AS(permutation_importance(cv, d, {1, 3, 100, 1}), Error);
}

TEST_CASE("importance is reproducible across thread counts") {
  const auto d = smooth_dataset(800, 0.1, 95);
  ModelSpec s;
  s.family = Family::KNN;
  const auto cv = cross_validate(s, d);
  const auto a = permutation_importance(cv, d, {5, 7, 300, 1});
  const auto b = permutation_importance(cv, d, {5, 7, 300, 3});
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("ranking helpers") {
  ImportanceReport r;
  r.features = {"a", "b", "c", "d"};
  r.importance = {0.1, 0.5, -0.02, 0.4};
  finalize_ranking(r);
  CHECK(r.rank == std::vector<int>{3, 1, 4, 2});
  CHECK(r.sorted_features == std::vector<std::string>{"b", "d", "a", "c"});
  CHECK(r.cumulative.back() == doctest::Approx(1.0));
  CHECK(r.n90 == 2);
  CHECK(r.normalized_rank[1] == 1.0);
  CHECK(r.normalized_rank[2] == 0.0);
  CHECK(*spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(*spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(*spearman({1, 2, 2, 3}, {1, 2, 2, 3}) == doctest::Approx(1.0));
}

TEST_CASE("transfer: identical target gives zero drop, schema mismatch is explicit") {
  const auto d = smooth_dataset(1000, 0.1, 101);
  ModelSpec s;
  s.family = Family::KNN;
  const auto cv = cross_validate(s, d);
  const auto same = transfer_evaluate(cv, d);
  CHECK(same.drop == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(same.target_r2 == doctest::Approx(cv.report.mean_val_r2));

  auto shifted = d;
  shifted.y.array() += 2.0;
  CHECK(transfer_evaluate(cv, shifted).drop_pct > 10.0);

  auto other = d.select({d.feature_names[0], d.feature_names[1], d.feature_names[2]});
  try {
    transfer_evaluate(cv, other);
    FAIL("accepted a different schema");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
    CHECK(std::string(e.what()).find("missing: f3@test[-]") != std::string::npos);
  }
}

TEST_CASE("tuning: single configuration and a kNN grid") {
  const auto d = smooth_dataset(1500, 0.4, 111);
  ModelSpec base;
  base.family = Family::KNN;
  base.hyper["k"] = 3;
  TuneOptions one;
  one.budget = 1;
  const auto r1 = tune(base, d, one);
  CHECK(r1.best.get("k") == 3);
  one.budget = 0;
  CHECK_THROWS_AS(tune(base, d, one), Error);

  SearchParam k{"k"};
  for (int i = 1; i <= 20; ++i) k.values.push_back(i);
  TuneOptions grid;
  grid.budget = 20;
  grid.space = SearchSpace{k};
  const auto r = tune(base, d, grid);
  // exhaustive oracle on the same holdout at full training size
  const std::size_t n_val = 300, n_train = d.rows() - n_val;
  Eigen::MatrixXd Xt = d.X.topRows(n_train), Xv = d.X.bottomRows(n_val);
  Eigen::VectorXd yt = d.y.head(n_train), yv = d.y.tail(n_val);
  double best = -1e9;
  int best_k = 0;
  std::vector<double> scores(21);
  for (int kk = 1; kk <= 20; ++kk) {
    ModelSpec s = base;
    s.hyper["k"] = kk;
    scores[kk] = r2_score(yv, train(s, Xt, yt, d.feature_names, d.target_name).predict(Xv));
    if (scores[kk] > best) {
      best = scores[kk];
      best_k = kk;
    }
  }
  CHECK(best_k > 1);
  CHECK(r.best.get("k") > 1);
  CHECK(scores[static_cast<int>(r.best.get("k"))] >= best - 0.02);
  CHECK(r.log.size() >= 20);
  CHECK(tune(base, d, grid).best.to_json() == r.best.to_json());
}
