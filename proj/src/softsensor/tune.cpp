#include "softsensor/tune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "softsensor/evaluate.hpp"

namespace n2olab::soft {

json SearchParam::to_json() const {
  json j{{"name", name}};
  if (!values.empty()) {
    j["values"] = values;
  } else {
    j["low"] = low;
    j["high"] = high;
    j["integer"] = integer;
    j["log"] = log;
  }
  return j;
}

SearchParam SearchParam::from_json(const json& j) {
  SearchParam p;
  p.name = require_field<std::string>(j, "name", "search");
  read_field(j, "values", p.values, "search." + p.name);
  if (p.values.empty()) {
    p.low = require_field<double>(j, "low", "search." + p.name);
    p.high = require_field<double>(j, "high", "search." + p.name);
    read_field(j, "integer", p.integer, "search." + p.name);
    read_field(j, "log", p.log, "search." + p.name);
    if (!(p.low <= p.high) || (p.log && p.low <= 0.0))
      fail(ErrorKind::Configuration, "search." + p.name + ": invalid range");
  }
  return p;
}

SearchSpace default_search_space(Family f) {
  switch (f) {
    case Family::KNN: return {{"k", {}, 1, 60, true, true}, {"weighted", {0, 1}}};
    case Family::RandomForest:
      return {{"max_features", {}, 0.2, 1.0, false, false},
              {"min_samples_leaf", {}, 1, 30, true, true},
              {"max_depth", {0, 10, 20, 30}}};
    case Family::GradientBoostedTrees:
      return {{"learning_rate", {}, 0.02, 0.3, false, true},
              {"max_depth", {}, 2, 8, true, false},
              {"min_samples_leaf", {}, 1, 50, true, true},
              {"subsample", {}, 0.5, 1.0, false, false}};
    case Family::StepwiseLinear: return {{"alpha", {0.01, 0.05, 0.1}}};
    default: return {};
  }
}

namespace {

std::vector<std::map<std::string, double>> grid(const SearchSpace& s) {
  std::vector<std::map<std::string, double>> out{{}};
  for (const auto& p : s) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& partial : out)
      for (double v : p.values) {
        auto m = partial;
        m[p.name] = v;
        next.push_back(std::move(m));
      }
    out = std::move(next);
  }
  return out;
}

double sample(const SearchParam& p, std::mt19937_64& rng) {
  if (!p.values.empty()) return p.values[rng() % p.values.size()];
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double v = p.log ? std::exp(std::log(p.low) + u * (std::log(p.high) - std::log(p.low))) : p.low + u * (p.high - p.low);
  if (p.integer) v = std::clamp(std::round(v), std::ceil(p.low), std::floor(p.high));
  return v;
}

Eigen::MatrixXd take(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[idx[i]];
  return out;
}

}  // namespace

TuneResult tune(const ModelSpec& base, const scenarios::TabularDataset& d, const TuneOptions& opt) {
  if (opt.budget < 1) fail(ErrorKind::Parameter, "tune: budget too small for one full fit");
  if (!(opt.holdout > 0.0 && opt.holdout < 1.0)) fail(ErrorKind::Parameter, "tune: holdout must be in (0, 1)");
  d.validate();
  const SearchSpace space = opt.space ? *opt.space : default_search_space(base.family);
  const auto& ranges = hyperparameter_ranges(base.family);
  for (const auto& p : space)
    if (!ranges.count(p.name))
      fail(ErrorKind::Configuration, "tune: " + std::string(to_string(base.family)) + " has no hyperparameter '" +
                                         p.name + "'");

  std::vector<ModelSpec> configs;
  const bool finite = std::all_of(space.begin(), space.end(), [](const SearchParam& p) { return !p.values.empty(); });
  std::size_t grid_size = 1;
  for (const auto& p : space) grid_size *= finite ? p.values.size() : 1;
  if (!space.empty() && finite && grid_size <= static_cast<std::size_t>(opt.budget)) {
    for (const auto& g : grid(space)) {
      auto s = base;
      for (const auto& [k, v] : g) s.hyper[k] = v;
      configs.push_back(s);
    }
  } else {
    configs.push_back(base);
    std::mt19937_64 rng(opt.seed);
    for (int i = 1; i < opt.budget && !space.empty(); ++i) {
      auto s = base;
      for (const auto& p : space) s.hyper[p.name] = sample(p, rng);
      configs.push_back(s);
    }
  }
  for (const auto& c : configs) c.validate();

  const auto n = d.rows();
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(opt.holdout * n)));
  if (n < n_val + 2) fail(ErrorKind::Data, "tune: dataset too small for a holdout split");
  const std::size_t n_train = n - n_val;
  std::vector<int> val(n_val);
  std::iota(val.begin(), val.end(), static_cast<int>(n_train));
  const auto Xv = take(d.X, val);
  const auto yv = take(d.y, val);

  TuneResult res;
  std::vector<int> alive(configs.size());
  std::iota(alive.begin(), alive.end(), 0);
  const int rungs = configs.size() > 1 ? static_cast<int>(std::ceil(std::log2(static_cast<double>(configs.size())))) : 0;
  std::vector<double> score(configs.size(), -HUGE_VAL);
  for (int r = 0; r <= rungs; ++r) {
    const double frac = std::ldexp(1.0, r - rungs);
    const auto m = std::min(n_train, std::max<std::size_t>(std::min<std::size_t>(n_train, 20),
                                                           static_cast<std::size_t>(std::lround(frac * n_train))));
    std::vector<int> rows(m);
    for (std::size_t i = 0; i < m; ++i) rows[i] = static_cast<int>(i * n_train / m);
    const auto Xt = take(d.X, rows);
    const auto yt = take(d.y, rows);
    for (int c : alive) {
      const auto model = train(configs[c], Xt, yt, d.feature_names, d.target_name, {opt.jobs});
      score[c] = r2_score(yv, model.predict(Xv));
      res.log.push_back({{"rung", r},
                         {"fraction", frac},
                         {"rows", m},
                         {"config", c},
                         {"hyperparameters", configs[c].resolved()},
                         {"score", score[c]}});
    }
    std::stable_sort(alive.begin(), alive.end(), [&](int a, int b) { return score[a] > score[b]; });
    if (r < rungs) alive.resize((alive.size() + 1) / 2);
  }
  res.best = configs[alive.front()];
  res.best_score = score[alive.front()];
  return res;
}

}  // namespace n2olab::soft
