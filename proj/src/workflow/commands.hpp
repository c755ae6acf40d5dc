#pragma once

#include <string>
#include <vector>

#include "softsensor/evaluate.hpp"
#include "softsensor/model.hpp"
#include "workflow/workspace.hpp"

namespace n2olab::workflow {

// Sidecar document written next to every command's outputs.
class RunManifest {
 public:
  RunManifest(std::string command, const Workspace& ws);

  void add_output(const std::string& path);  // hashed now
  void set(const std::string& key, json value) { extra_[key] = std::move(value); }
  // Writes <dir>/manifest.json and returns the document.
  json write(const std::string& dir);

  const std::vector<std::pair<std::string, std::string>>& outputs() const { return outputs_; }

 private:
  std::string command_;
  json inputs_;
  json extra_ = json::object();
  std::vector<std::pair<std::string, std::string>> outputs_;  // path, sha256
  double t0_;
};

// Every command returns its manifest document.
json list_simulations(const Workspace& ws);

json cmd_simulate(Workspace& ws, const std::string& simulation, const std::string& out_dir);

json cmd_generate_all(Workspace& ws, const std::string& out_dir);

// Table-2 style metrics of one simulation, or per-column metrics of an
// external dataset CSV when `dataset_csv` is given.
json cmd_metrics(Workspace& ws, const std::string& simulation, const std::string& out_dir,
                 const std::string& dataset_csv = "");

struct BenchmarkOptions {
  std::vector<std::string> scenarios;     // empty: all registered
  std::vector<std::string> dataset_csvs;  // external datasets, benchmarked as-is
  std::vector<soft::Family> families{soft::Family::RandomForest, soft::Family::GradientBoostedTrees,
                                     soft::Family::KNN, soft::Family::SecondOrderInteractions};
  soft::CvOptions cv;
  bool importance = true;
  int repeats = 20;
  std::size_t importance_rows = 1000;
  bool transfer = true;
  std::string transfer_source = "Baseline";
  bool save_models = false;
};

json cmd_benchmark(Workspace& ws, const BenchmarkOptions& opt, const std::string& out_dir);

struct TransferOptions {
  std::string source = "Baseline";
  std::vector<std::string> targets;  // empty: every scenario sharing the source's feature set and sampling
  std::vector<soft::Family> families{soft::Family::RandomForest, soft::Family::GradientBoostedTrees,
                                     soft::Family::KNN, soft::Family::SecondOrderInteractions};
  soft::CvOptions cv;
};

json cmd_transfer(Workspace& ws, const TransferOptions& opt, const std::string& out_dir);

// One row per (K, tank) of the NO-loop quantities.
struct NoLoopRow {
  double k = 0.0;
  std::string tank;
  std::optional<double> amo_pct_of_hao, haostar_pct_of_hao, nor_pct_of_nir;
  double nn = 0.0, nd = 0.0, hd = 0.0;  // % of gross N2O production in the tank
  double s_no = 0.0;                    // mean liquid NO, gN/m3
  double ef_pct = 0.0;                  // plant
  double no_to_n2o = 0.0;               // plant
};

std::vector<NoLoopRow> noloop_rows(Workspace& ws, const std::vector<double>& k_values);
json cmd_noloop_sweep(Workspace& ws, const std::vector<double>& k_values, const std::string& out_dir);

// Helpers shared with the acceptance runner.
std::vector<soft::TransferReport> transfer_matrix(Workspace& ws, const std::string& source,
                                                  const std::vector<std::string>& targets, soft::Family family,
                                                  const soft::CvOptions& cv, const std::uint64_t seed,
                                                  soft::EvaluationReport* source_report = nullptr);
std::vector<std::string> default_transfer_targets(const Workspace& ws, const std::string& source);

}  // namespace n2olab::workflow
