#pragma once

#include <vector>

#include "softsensor/model.hpp"

namespace n2olab::soft {

// Product of standardised feature columns; empty = intercept.
using Term = std::vector<int>;

std::vector<Term> first_order_terms(int p);
// Intercept, linear, squares and pairwise interactions.
std::vector<Term> second_order_terms(int p);
std::string term_name(const Term& t, const std::vector<std::string>& names);
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& Z, const std::vector<Term>& terms);

struct LinearFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd stderr_;
  Eigen::VectorXd p_value;  // two-sided t-test, df = n - terms
  double r2 = 0.0;
  double adj_r2 = 0.0;
};

// Least squares on the given terms. Error(Data) on a rank-deficient design,
// naming the offending terms.
LinearFit fit_linear(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const std::vector<Term>& terms,
                     const std::vector<std::string>& names);

struct EliminationStep {
  std::string removed;
  double p_value;
  double adj_r2_after;
};

class LinearRegressor final : public Regressor {
 public:
  LinearRegressor(std::vector<Term> terms, Eigen::VectorXd coef, std::vector<std::string> term_names)
      : terms_(std::move(terms)), coef_(std::move(coef)), names_(std::move(term_names)) {}

  // Full model on `terms`.
  static std::unique_ptr<LinearRegressor> fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                              std::vector<Term> terms, const std::vector<std::string>& names);
  // Backward elimination of the highest p-value above alpha until every
  // remaining term is significant. The intercept is never removed.
  static std::unique_ptr<LinearRegressor> stepwise(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                                   std::vector<Term> terms, const std::vector<std::string>& names,
                                                   double alpha);

  Eigen::VectorXd predict(const Eigen::MatrixXd& Z) const override;
  std::optional<int> linear_terms() const override;
  json to_json() const override;
  static std::unique_ptr<LinearRegressor> from_json(const json& j);

  const std::vector<Term>& terms() const { return terms_; }
  const Eigen::VectorXd& coefficients() const { return coef_; }
  const std::vector<std::string>& term_names() const { return names_; }
  const std::vector<EliminationStep>& history() const { return history_; }
  double initial_adj_r2() const { return initial_adj_r2_; }
  bool intercept_only() const { return terms_.size() == 1 && terms_[0].empty(); }

 private:
  std::vector<Term> terms_;
  Eigen::VectorXd coef_;
  std::vector<std::string> names_;
  Eigen::VectorXd p_values_;
  std::vector<EliminationStep> history_;
  double initial_adj_r2_ = 0.0;
};

}  // namespace n2olab::soft
