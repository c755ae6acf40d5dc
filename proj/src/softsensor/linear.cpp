#include "softsensor/linear.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "common/error.hpp"

namespace n2olab::soft {

std::vector<Term> first_order_terms(int p) {
  std::vector<Term> t{{}};
  for (int i = 0; i < p; ++i) t.push_back({i});
  return t;
}

std::vector<Term> second_order_terms(int p) {
  auto t = first_order_terms(p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) t.push_back({i, j});
  return t;
}

std::string term_name(const Term& t, const std::vector<std::string>& names) {
  if (t.empty()) return "(intercept)";
  std::string s;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (k) s += " * ";
    s += t[k] < static_cast<int>(names.size()) ? names[t[k]] : "#" + std::to_string(t[k]);
  }
  return s;
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& Z, const std::vector<Term>& terms) {
  Eigen::MatrixXd X(Z.rows(), static_cast<Eigen::Index>(terms.size()));
  for (std::size_t c = 0; c < terms.size(); ++c) {
    auto col = X.col(static_cast<Eigen::Index>(c));
    col.setOnes();
    for (int f : terms[c]) {
      if (f < 0 || f >= Z.cols()) fail(ErrorKind::Structural, "linear model: term refers to a missing feature");
      col.array() *= Z.col(f).array();
    }
  }
  return X;
}

namespace {

struct Normal {
  Eigen::MatrixXd X;
  Eigen::MatrixXd XtX;
  Eigen::VectorXd Xty;
};

Normal normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Normal n{X, Eigen::MatrixXd(X.cols(), X.cols()), X.transpose() * y};
  n.XtX.setZero();
  n.XtX.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  n.XtX = n.XtX.selfadjointView<Eigen::Lower>();
  return n;
}

LinearFit solve(const Normal& ne, const Eigen::VectorXd& y, const std::vector<int>& active,
                const std::vector<std::string>& term_names) {
  const auto n = ne.X.rows();
  const auto m = static_cast<Eigen::Index>(active.size());
  if (n <= m)
    fail(ErrorKind::Data, "linear model: " + std::to_string(m) + " terms need more than " + std::to_string(n) +
                              " rows");
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b[i] = ne.Xty[active[i]];
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = ne.XtX(active[i], active[j]);
  }
  // rank test on the unit-diagonal scaling so column magnitudes do not matter
  Eigen::VectorXd d = A.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd C = d.asDiagonal() * A * d.asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C);
  qr.setThreshold(1e-11);
  if (qr.rank() < m || A.diagonal().minCoeff() <= 0.0) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < m; ++k) {
      if (!cols.empty()) cols += ", ";
      cols += term_names[active[perm[k]]];
    }
    fail(ErrorKind::Data, "linear model: rank-deficient design (dependent terms: " + cols + ")");
  }
  const Eigen::MatrixXd Cinv = qr.inverse();
  LinearFit f;
  f.coef = d.asDiagonal() * (Cinv * (d.asDiagonal() * b));
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) pred += f.coef[i] * ne.X.col(active[i]);
  const double rss = (y - pred).squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();
  f.r2 = tss > 0.0 ? 1.0 - rss / tss : (rss == 0.0 ? 1.0 : 0.0);
  const double dof = static_cast<double>(n - m);
  f.adj_r2 = 1.0 - (1.0 - f.r2) * static_cast<double>(n - 1) / dof;
  const double sigma2 = rss / dof;
  boost::math::students_t dist(dof);
  f.stderr_.resize(m);
  f.p_value.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double var = sigma2 * d[i] * d[i] * Cinv(i, i);
    f.stderr_[i] = std::sqrt(std::max(var, 0.0));
    if (f.stderr_[i] == 0.0) {
      f.p_value[i] = f.coef[i] == 0.0 ? 1.0 : 0.0;
    } else {
      const double t = std::abs(f.coef[i] / f.stderr_[i]);
      f.p_value[i] = std::isfinite(t) ? 2.0 * boost::math::cdf(boost::math::complement(dist, t)) : 0.0;
    }
  }
  return f;
}

std::vector<std::string> names_of(const std::vector<Term>& terms, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& t : terms) out.push_back(term_name(t, names));
  return out;
}

}  // namespace

LinearFit fit_linear(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const std::vector<Term>& terms,
                     const std::vector<std::string>& names) {
  if (Z.rows() != y.size()) fail(ErrorKind::Structural, "linear model: feature and target rows differ");
  const auto ne = normal_equations(design_matrix(Z, terms), y);
  std::vector<int> all(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) all[i] = static_cast<int>(i);
  return solve(ne, y, all, names_of(terms, names));
}

std::unique_ptr<LinearRegressor> LinearRegressor::fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                                      std::vector<Term> terms, const std::vector<std::string>& names) {
  auto f = fit_linear(Z, y, terms, names);
  auto r = std::make_unique<LinearRegressor>(terms, f.coef, names_of(terms, names));
  r->p_values_ = f.p_value;
  r->initial_adj_r2_ = f.adj_r2;
  return r;
}

std::unique_ptr<LinearRegressor> LinearRegressor::stepwise(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                                           std::vector<Term> terms,
                                                           const std::vector<std::string>& names, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Parameter, "stepwise: alpha must be in (0, 1)");
  if (Z.rows() != y.size()) fail(ErrorKind::Structural, "linear model: feature and target rows differ");
  const auto tn = names_of(terms, names);
  const auto ne = normal_equations(design_matrix(Z, terms), y);
  std::vector<int> active(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) active[i] = static_cast<int>(i);
  auto fit = solve(ne, y, active, tn);
  const double adj0 = fit.adj_r2;
  std::vector<EliminationStep> history;
  for (;;) {
    int worst = -1;
    double pmax = alpha;
    for (std::size_t i = 0; i < active.size(); ++i) {
      if (terms[active[i]].empty()) continue;
      if (fit.p_value[static_cast<Eigen::Index>(i)] > pmax) {
        pmax = fit.p_value[static_cast<Eigen::Index>(i)];
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) break;
    const std::string removed = tn[active[worst]];
    active.erase(active.begin() + worst);
    if (active.empty()) break;
    fit = solve(ne, y, active, tn);
    history.push_back({removed, pmax, fit.adj_r2});
  }
  std::vector<Term> kept;
  std::vector<std::string> kept_names;
  for (int a : active) {
    kept.push_back(terms[a]);
    kept_names.push_back(tn[a]);
  }
  auto r = std::make_unique<LinearRegressor>(kept, fit.coef, kept_names);
  r->p_values_ = fit.p_value;
  r->history_ = std::move(history);
  r->initial_adj_r2_ = adj0;
  return r;
}

Eigen::VectorXd LinearRegressor::predict(const Eigen::MatrixXd& Z) const {
  return design_matrix(Z, terms_) * coef_;
}

std::optional<int> LinearRegressor::linear_terms() const {
  int k = 0;
  for (const auto& t : terms_) k += !t.empty();
  return k;
}

json LinearRegressor::to_json() const {
  json terms = json::array();
  for (std::size_t i = 0; i < terms_.size(); ++i)
    terms.push_back({{"features", terms_[i]},
                     {"name", names_[i]},
                     {"coef", coef_[static_cast<Eigen::Index>(i)]},
                     {"p_value", p_values_.size() == coef_.size() ? json(p_values_[static_cast<Eigen::Index>(i)])
                                                                  : json(nullptr)}});
  json hist = json::array();
  for (const auto& h : history_)
    hist.push_back({{"removed", h.removed}, {"p_value", h.p_value}, {"adj_r2_after", h.adj_r2_after}});
  return {{"terms", terms}, {"elimination", hist}, {"initial_adj_r2", initial_adj_r2_}};
}

std::unique_ptr<LinearRegressor> LinearRegressor::from_json(const json& j) {
  if (!j.contains("terms") || !j["terms"].is_array()) fail(ErrorKind::Configuration, "linear model: missing terms");
  std::vector<Term> terms;
  std::vector<std::string> names;
  std::vector<double> coef, pv;
  for (const auto& t : j["terms"]) {
    terms.push_back(require_field<Term>(t, "features", "linear term"));
    names.push_back(require_field<std::string>(t, "name", "linear term"));
    coef.push_back(require_field<double>(t, "coef", "linear term"));
    pv.push_back(t.contains("p_value") && t["p_value"].is_number() ? t["p_value"].get<double>() : 1.0);
  }
  auto r = std::make_unique<LinearRegressor>(terms, Eigen::Map<Eigen::VectorXd>(coef.data(), coef.size()), names);
  r->p_values_ = Eigen::Map<Eigen::VectorXd>(pv.data(), pv.size());
  r->initial_adj_r2_ = j.value("initial_adj_r2", 0.0);
  if (j.contains("elimination"))
    for (const auto& h : j["elimination"])
      r->history_.push_back({h.at("removed").get<std::string>(), h.at("p_value").get<double>(),
                             h.at("adj_r2_after").get<double>()});
  return r;
}

}  // namespace n2olab::soft
