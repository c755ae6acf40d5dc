#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scenarios/dataset.hpp"
#include "softsensor/model.hpp"

namespace n2olab::soft {

enum class FoldMode { Contiguous, Shuffled };
std::string_view to_string(FoldMode m);
FoldMode parse_fold_mode(std::string_view s);

// Validation index sets, each sorted; together a partition of 0..n-1.
// Contiguous blocks by default. Error(Data) when n < k.
std::vector<std::vector<int>> kfold_split(std::size_t n, int k, FoldMode mode = FoldMode::Contiguous,
                                          std::uint64_t seed = 1);
std::vector<int> complement(const std::vector<int>& fold, std::size_t n);

double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& pred);
double mse(const Eigen::VectorXd& y, const Eigen::VectorXd& pred);
double mae(const Eigen::VectorXd& y, const Eigen::VectorXd& pred);
// 1 - (1 - r2)(n - 1)/(n - k - 1) for k fitted terms.
double adjusted_r2(double r2, std::size_t n, int k);

struct FoldScores {
  std::size_t n_train = 0, n_val = 0;
  double train_r2 = 0, train_mse = 0, train_mae = 0;
  double val_r2 = 0, val_mse = 0, val_mae = 0;
  std::optional<double> train_adj_r2, val_adj_r2;
};

struct EvaluationReport {
  std::string dataset;
  ModelSpec spec;
  FoldMode mode = FoldMode::Contiguous;
  std::uint64_t fold_seed = 1;
  std::vector<FoldScores> folds;
  double mean_train_r2 = 0, mean_val_r2 = 0;
  double mean_train_mse = 0, mean_val_mse = 0;
  double mean_train_mae = 0, mean_val_mae = 0;
  std::optional<double> mean_train_adj_r2, mean_val_adj_r2;
  // Held-out residuals in time order.
  std::optional<double> residual_lag1;
  double residual_slope = 0.0;  // target units per day
  std::vector<std::string> dropped_features;

  json to_json() const;
};

struct CvOptions {
  int k = 5;
  FoldMode mode = FoldMode::Contiguous;
  std::uint64_t fold_seed = 1;
  unsigned jobs = 1;
};

struct CvResult {
  EvaluationReport report;
  std::vector<TrainedModel> models;  // one per fold
  std::vector<std::vector<int>> folds;
  std::vector<std::string> features;
};

CvResult cross_validate(const ModelSpec& spec, const scenarios::TabularDataset& d, const CvOptions& opt = {});

struct ImportanceOptions {
  int repeats = 20;
  std::uint64_t seed = 1;
  std::size_t max_rows = 1000;  // held-out rows scored, spread evenly
  unsigned jobs = 1;
};

struct ImportanceReport {
  std::vector<std::string> features;
  std::vector<double> importance;  // mean R2 drop
  std::vector<double> stdev;       // over repeats (and folds)
  std::vector<int> rank;           // 1 = most important
  std::vector<double> normalized_rank;  // 1 for the top feature, 0 for the last
  std::vector<std::string> sorted_features;
  std::vector<double> cumulative;  // of floored importances along sorted_features
  int n90 = 0;                     // features needed for 90% of the total
  int repeats = 0;
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  double baseline_r2 = 0.0;

  json to_json() const;
  std::string to_csv() const;
};

// Importance of each feature on the given evaluation rows. Error(Parameter)
// when repeats < 2.
ImportanceReport permutation_importance(const TrainedModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const ImportanceOptions& opt = {});
// Averaged over folds, each fold model scored on its own held-out rows.
ImportanceReport permutation_importance(const CvResult& cv, const scenarios::TabularDataset& d,
                                        const ImportanceOptions& opt = {});

// Fills rank, normalised rank and the cumulative curve from `importance`.
void finalize_ranking(ImportanceReport& r);

// Spearman rank correlation with average ranks for ties.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

struct TransferReport {
  std::string source, target;
  double in_scenario_r2 = 0.0;  // mean validation R2 on the source
  double target_r2 = 0.0;       // mean over folds on the matching blocks of the target
  std::vector<double> fold_r2;
  double drop = 0.0;      // in_scenario_r2 - target_r2
  double drop_pct = 0.0;  // relative to in_scenario_r2

  json to_json() const;
};

// Applies every fold model of the source to the same time block of the
// target dataset. Error(Schema) listing missing and extra columns when the
// feature sets differ.
TransferReport transfer_evaluate(const CvResult& source, const scenarios::TabularDataset& target);

// Reorders target columns to `features`; Error(Schema) with a column diff.
Eigen::MatrixXd align_features(const scenarios::TabularDataset& d, const std::vector<std::string>& features);

}  // namespace n2olab::soft
