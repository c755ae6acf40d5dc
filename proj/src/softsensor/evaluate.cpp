#include "softsensor/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/parallel.hpp"
#include "metrics/statistics.hpp"

namespace n2olab::soft {

using scenarios::TabularDataset;

std::string_view to_string(FoldMode m) { return m == FoldMode::Shuffled ? "shuffled" : "contiguous"; }

FoldMode parse_fold_mode(std::string_view s) {
  if (s == "contiguous") return FoldMode::Contiguous;
  if (s == "shuffled") return FoldMode::Shuffled;
  fail(ErrorKind::Configuration, "unknown fold mode '" + std::string(s) + "'");
}

std::vector<std::vector<int>> kfold_split(std::size_t n, int k, FoldMode mode, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::Parameter, "kfold: k must be >= 2");
  if (n < static_cast<std::size_t>(k))
    fail(ErrorKind::Data, "kfold: " + std::to_string(n) + " rows cannot form " + std::to_string(k) + " folds");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (mode == FoldMode::Shuffled) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
  }
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    const std::size_t lo = n * f / k, hi = n * (f + 1) / k;
    folds[f].assign(order.begin() + lo, order.begin() + hi);
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

std::vector<int> complement(const std::vector<int>& fold, std::size_t n) {
  std::vector<char> in(n, 0);
  for (int i : fold) in[i] = 1;
  std::vector<int> out;
  out.reserve(n - fold.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(static_cast<int>(i));
  return out;
}

double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  if (y.size() != pred.size() || y.size() == 0) fail(ErrorKind::Structural, "r2: length mismatch or empty");
  const double ss_res = (y - pred).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

double mse(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) { return (y - pred).squaredNorm() / y.size(); }

double mae(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) { return (y - pred).cwiseAbs().mean(); }

double adjusted_r2(double r2, std::size_t n, int k) {
  const double dof = static_cast<double>(n) - k - 1.0;
  if (dof <= 0.0) return r2;
  return 1.0 - (1.0 - r2) * (static_cast<double>(n) - 1.0) / dof;
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
  return out;
}

Eigen::VectorXd rows_of(const Eigen::VectorXd& y, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[idx[i]];
  return out;
}

std::vector<int> spread(const std::vector<int>& idx, std::size_t cap) {
  if (cap == 0 || idx.size() <= cap) return idx;
  std::vector<int> out(cap);
  for (std::size_t i = 0; i < cap; ++i) out[i] = idx[i * idx.size() / cap];
  return out;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Eigen::MatrixXd align_features(const TabularDataset& d, const std::vector<std::string>& features) {
  std::vector<std::string> missing, extra;
  for (const auto& f : features)
    if (d.feature_index(f) < 0) missing.push_back(f);
  for (const auto& f : d.feature_names)
    if (std::find(features.begin(), features.end(), f) == features.end()) extra.push_back(f);
  if (!missing.empty() || !extra.empty()) {
    auto list = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
      return s.empty() ? std::string("none") : s;
    };
    fail(ErrorKind::Schema, "dataset " + d.id + " feature schema differs; missing: " + list(missing) +
                                "; extra: " + list(extra));
  }
  return d.select(features).X;
}

CvResult cross_validate(const ModelSpec& spec, const TabularDataset& d, const CvOptions& opt) {
  d.validate();
  CvResult res;
  res.features = d.feature_names;
  res.folds = kfold_split(d.rows(), opt.k, opt.mode, opt.fold_seed);
  auto& rep = res.report;
  rep.dataset = d.id;
  rep.spec = spec;
  rep.mode = opt.mode;
  rep.fold_seed = opt.fold_seed;
  Eigen::VectorXd resid(static_cast<Eigen::Index>(d.rows()));
  bool linear = false;
  for (const auto& val : res.folds) {
    const auto train_idx = complement(val, d.rows());
    const auto Xtr = rows_of(d.X, train_idx), Xva = rows_of(d.X, val);
    const auto ytr = rows_of(d.y, train_idx), yva = rows_of(d.y, val);
    auto m = train(spec, Xtr, ytr, d.feature_names, d.target_name, {opt.jobs});
    const auto ptr = m.predict(Xtr), pva = m.predict(Xva);
    FoldScores s;
    s.n_train = train_idx.size();
    s.n_val = val.size();
    s.train_r2 = r2_score(ytr, ptr);
    s.train_mse = mse(ytr, ptr);
    s.train_mae = mae(ytr, ptr);
    s.val_r2 = r2_score(yva, pva);
    s.val_mse = mse(yva, pva);
    s.val_mae = mae(yva, pva);
    if (auto k = m.regressor->linear_terms()) {
      linear = true;
      s.train_adj_r2 = adjusted_r2(s.train_r2, s.n_train, *k);
      s.val_adj_r2 = adjusted_r2(s.val_r2, s.n_val, *k);
    }
    for (std::size_t i = 0; i < val.size(); ++i) resid[val[i]] = yva[static_cast<Eigen::Index>(i)] - pva[static_cast<Eigen::Index>(i)];
    for (const auto& dname : m.transform.dropped)
      if (std::find(rep.dropped_features.begin(), rep.dropped_features.end(), dname) == rep.dropped_features.end())
        rep.dropped_features.push_back(dname);
    rep.folds.push_back(s);
    res.models.push_back(std::move(m));
  }
  const double k = static_cast<double>(rep.folds.size());
  for (const auto& s : rep.folds) {
    rep.mean_train_r2 += s.train_r2 / k;
    rep.mean_val_r2 += s.val_r2 / k;
    rep.mean_train_mse += s.train_mse / k;
    rep.mean_val_mse += s.val_mse / k;
    rep.mean_train_mae += s.train_mae / k;
    rep.mean_val_mae += s.val_mae / k;
  }
  if (linear) {
    double a = 0, b = 0;
    for (const auto& s : rep.folds) {
      a += *s.train_adj_r2 / k;
      b += *s.val_adj_r2 / k;
    }
    rep.mean_train_adj_r2 = a;
    rep.mean_val_adj_r2 = b;
  }
  const std::vector<double> r(resid.data(), resid.data() + resid.size());
  if (r.size() >= 3) rep.residual_lag1 = metrics::autocorr(r, 1);
  const Eigen::Map<const Eigen::VectorXd> t(d.time.data(), static_cast<Eigen::Index>(d.time.size()));
  const double tm = t.mean();
  const double stt = (t.array() - tm).square().sum();
  rep.residual_slope = stt > 0.0 ? ((t.array() - tm) * (resid.array() - resid.mean())).sum() / stt : 0.0;
  return res;
}

json EvaluationReport::to_json() const {
  json folds_j = json::array();
  for (const auto& s : folds)
    folds_j.push_back({{"n_train", s.n_train},
                       {"n_val", s.n_val},
                       {"train_r2", s.train_r2},
                       {"train_mse", s.train_mse},
                       {"train_mae", s.train_mae},
                       {"val_r2", s.val_r2},
                       {"val_mse", s.val_mse},
                       {"val_mae", s.val_mae},
                       {"train_adj_r2", opt(s.train_adj_r2)},
                       {"val_adj_r2", opt(s.val_adj_r2)}});
  return {{"dataset", dataset},
          {"model", spec.to_json()},
          {"folds", {{"k", folds.size()}, {"mode", std::string(to_string(mode))}, {"seed", fold_seed}}},
          {"fold_scores", folds_j},
          {"mean_train_r2", mean_train_r2},
          {"mean_val_r2", mean_val_r2},
          {"mean_train_mse", mean_train_mse},
          {"mean_val_mse", mean_val_mse},
          {"mean_train_mae", mean_train_mae},
          {"mean_val_mae", mean_val_mae},
          {"mean_train_adj_r2", opt(mean_train_adj_r2)},
          {"mean_val_adj_r2", opt(mean_val_adj_r2)},
          {"residual_lag1_autocorr", opt(residual_lag1)},
          {"residual_time_slope", residual_slope},
          {"dropped_features", dropped_features}};
}

namespace {

struct RawImportance {
  std::vector<std::vector<double>> drops;  // feature -> repeat values
  double base = 0.0;
};

RawImportance raw_importance(const TrainedModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             int repeats, std::uint64_t seed, unsigned jobs) {
  RawImportance r;
  r.base = r2_score(y, m.predict(X));
  const auto p = static_cast<std::size_t>(X.cols());
  r.drops.assign(p, std::vector<double>(static_cast<std::size_t>(repeats)));
  const auto n = static_cast<std::size_t>(X.rows());
  parallel_for(p * repeats, jobs, [&](std::size_t task) {
    const std::size_t j = task / repeats, rep = task % repeats;
    std::mt19937_64 rng(derive_seed(seed, j * 1000003ULL + rep));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);
    Eigen::MatrixXd Xp = X;
    for (std::size_t i = 0; i < n; ++i) Xp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = X(perm[i], static_cast<Eigen::Index>(j));
    r.drops[j][rep] = r.base - r2_score(y, m.predict(Xp));
  });
  return r;
}

void check_repeats(int repeats) {
  if (repeats < 2) fail(ErrorKind::Parameter, "permutation importance: repeats must be >= 2");
}

}  // namespace

void finalize_ranking(ImportanceReport& r) {
  const auto p = r.importance.size();
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return r.importance[a] > r.importance[b]; });
  r.rank.assign(p, 0);
  r.normalized_rank.assign(p, 1.0);
  for (std::size_t i = 0; i < p; ++i) {
    r.rank[order[i]] = static_cast<int>(i) + 1;
    r.normalized_rank[order[i]] = p > 1 ? 1.0 - static_cast<double>(i) / static_cast<double>(p - 1) : 1.0;
  }
  r.sorted_features.clear();
  r.cumulative.clear();
  double total = 0.0;
  for (double v : r.importance) total += std::max(v, 0.0);
  double acc = 0.0;
  r.n90 = 0;
  for (std::size_t i = 0; i < p; ++i) {
    r.sorted_features.push_back(r.features[order[i]]);
    acc += std::max(r.importance[order[i]], 0.0);
    r.cumulative.push_back(total > 0.0 ? acc / total : 0.0);
    if (r.n90 == 0 && total > 0.0 && acc / total >= 0.9 - 1e-12) r.n90 = static_cast<int>(i) + 1;
  }
}

ImportanceReport permutation_importance(const TrainedModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const ImportanceOptions& opt) {
  check_repeats(opt.repeats);
  std::vector<int> all(static_cast<std::size_t>(X.rows()));
  std::iota(all.begin(), all.end(), 0);
  const auto idx = spread(all, opt.max_rows);
  const auto raw = raw_importance(m, rows_of(X, idx), rows_of(y, idx), opt.repeats, opt.seed, opt.jobs);
  ImportanceReport r;
  r.features = m.features;
  for (const auto& d : raw.drops) {
    r.importance.push_back(metrics::mean(d));
    r.stdev.push_back(metrics::stdev(d));
  }
  r.repeats = opt.repeats;
  r.seed = opt.seed;
  r.rows = idx.size();
  r.baseline_r2 = raw.base;
  finalize_ranking(r);
  return r;
}

ImportanceReport permutation_importance(const CvResult& cv, const TabularDataset& d, const ImportanceOptions& opt) {
  check_repeats(opt.repeats);
  const auto X = align_features(d, cv.features);
  ImportanceReport r;
  r.features = cv.features;
  const auto p = cv.features.size();
  std::vector<std::vector<double>> pooled(p);
  const std::size_t cap = opt.max_rows == 0 ? 0 : std::max<std::size_t>(1, opt.max_rows / cv.folds.size());
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    const auto idx = spread(cv.folds[f], cap);
    const auto raw =
        raw_importance(cv.models[f], rows_of(X, idx), rows_of(d.y, idx), opt.repeats, derive_seed(opt.seed, f), opt.jobs);
    for (std::size_t j = 0; j < p; ++j) pooled[j].insert(pooled[j].end(), raw.drops[j].begin(), raw.drops[j].end());
    r.baseline_r2 += raw.base / static_cast<double>(cv.folds.size());
    r.rows += idx.size();
  }
  for (const auto& d2 : pooled) {
    r.importance.push_back(metrics::mean(d2));
    r.stdev.push_back(metrics::stdev(d2));
  }
  r.repeats = opt.repeats;
  r.seed = opt.seed;
  finalize_ranking(r);
  return r;
}

json ImportanceReport::to_json() const {
  json feats = json::array();
  for (std::size_t i = 0; i < features.size(); ++i)
    feats.push_back({{"feature", features[i]},
                     {"importance", importance[i]},
                     {"stdev", stdev[i]},
                     {"rank", rank[i]},
                     {"normalized_rank", normalized_rank[i]}});
  return {{"features", feats},      {"sorted", sorted_features}, {"cumulative", cumulative},
          {"n90", n90},             {"repeats", repeats},        {"seed", seed},
          {"rows", rows},           {"baseline_r2", baseline_r2}};
}

std::string ImportanceReport::to_csv() const {
  std::string out = "feature,importance,stdev,rank,normalized_rank\n";
  char buf[160];
  for (std::size_t i = 0; i < features.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%d,%.6g\n", importance[i], stdev[i], rank[i], normalized_rank[i]);
    out += features[i] + buf;
  }
  return out;
}

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorKind::Structural, "spearman: lengths differ");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<int> o(v.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int x, int y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < o.size();) {
      std::size_t j = i;
      while (j + 1 < o.size() && v[o[j + 1]] == v[o[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[o[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  return metrics::pearson(ranks(a), ranks(b));
}

TransferReport transfer_evaluate(const CvResult& source, const TabularDataset& target) {
  target.validate();
  const auto X = align_features(target, source.features);
  TransferReport t;
  t.source = source.report.dataset;
  t.target = target.id;
  t.in_scenario_r2 = source.report.mean_val_r2;
  std::size_t n_source = 0;
  for (const auto& f : source.folds) n_source += f.size();
  const auto k = static_cast<int>(source.folds.size());
  const auto folds = target.rows() == n_source ? source.folds : kfold_split(target.rows(), k, FoldMode::Contiguous);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto pred = source.models[f].predict(rows_of(X, folds[f]));
    t.fold_r2.push_back(r2_score(rows_of(target.y, folds[f]), pred));
    t.target_r2 += t.fold_r2.back() / static_cast<double>(folds.size());
  }
  t.drop = t.in_scenario_r2 - t.target_r2;
  t.drop_pct = t.in_scenario_r2 != 0.0 ? 100.0 * t.drop / std::abs(t.in_scenario_r2) : 0.0;
  return t;
}

json TransferReport::to_json() const {
  return {{"source", source},     {"target", target}, {"in_scenario_r2", in_scenario_r2}, {"target_r2", target_r2},
          {"fold_r2", fold_r2}, {"drop", drop},     {"drop_pct", drop_pct}};
}

}  // namespace n2olab::soft
