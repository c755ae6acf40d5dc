#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "n2olab/n2olab.h"

using json = nlohmann::json;

namespace {

// Exit codes per failure class.
int exit_code(n2o_status s) {
  switch (s) {
    case N2O_OK: return 0;
    case N2O_ERR_INVALID_ARGUMENT: return 2;
    case N2O_ERR_CONFIG: return 3;
    case N2O_ERR_SOLVER: return 4;
    case N2O_ERR_SCHEMA: return 5;
    case N2O_ERR_IO: return 6;
    case N2O_ERR_DATA: return 7;
    case N2O_ERR_PARAMETER: return 8;
    case N2O_ERR_STRUCTURAL: return 9;
    case N2O_ERR_INTERNAL: return 10;
  }
  return 10;
}

void log_to_stderr(const char* msg, void*) { std::fprintf(stderr, "[n2olab] %s\n", msg); }

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int report_failure(n2o_status s) {
  std::fprintf(stderr, "error [%s]: %s\n", n2o_status_name(s), n2o_last_error());
  return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plant-wide N2O simulation, scenario datasets and soft-sensor benchmark"};
  app.set_version_flag("--version", std::string(n2o_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string data_dir, cache_dir, config_path, registry_path;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  bool no_cache = false, quiet = false;
  app.add_option("--data", data_dir, "Data directory (plant config, parameters, registry)");
  app.add_option("--cache", cache_dir, "Simulation cache directory");
  app.add_option("--config", config_path, "Plant config document");
  app.add_option("--registry", registry_path, "Scenario registry document");
  app.add_option("--seed", seed, "Influent seed; disturbance seeds derive from it")->capture_default_str();
  app.add_option("--jobs", jobs, "Parallel workers (0 = all cores)")->capture_default_str();
  app.add_flag("--no-cache", no_cache, "Neither read nor write the simulation cache");
  app.add_flag("-q,--quiet", quiet, "No progress messages");

  std::string out, scenario = "baseline";
  auto* sim = app.add_subcommand("simulate", "Run one of the registered simulations");
  bool list = false;
  sim->add_option("--scenario", scenario, "Simulation id or key")->capture_default_str();
  sim->add_option("--out", out, "Output directory");
  sim->add_flag("--list", list, "List the registered simulations");

  auto* gen = app.add_subcommand("generate-all", "Write every registered scenario dataset");
  gen->add_option("--out", out, "Output directory");

  std::string dataset_csv;
  auto* met = app.add_subcommand("metrics", "Emission and dynamics metrics of a simulation or dataset");
  met->add_option("--scenario", scenario, "Simulation id or key")->capture_default_str();
  met->add_option("--dataset", dataset_csv, "External dataset CSV instead of a simulation");
  met->add_option("--out", out, "Output directory");

  std::vector<std::string> scenarios, datasets, targets;
  std::string families, fold_mode = "contiguous";
  int repeats = 20, folds = 5;
  std::size_t importance_rows = 1000;
  bool no_importance = false, no_transfer = false, save_models = false;
  auto* bench = app.add_subcommand("benchmark", "Cross-validated model benchmark with importance and transfer");
  bench->add_option("--scenario", scenarios, "Scenario id or key (repeatable; default all)");
  bench->add_option("--dataset", datasets, "External dataset CSV (repeatable)");
  bench->add_option("--families", families, "Comma-separated model families (default rf,gbt,knn,poly2)");
  bench->add_option("--repeats", repeats, "Permutation repeats")->capture_default_str();
  bench->add_option("--importance-rows", importance_rows, "Held-out rows scored for importance")
      ->capture_default_str();
  bench->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
  bench->add_option("--fold-mode", fold_mode, "contiguous or shuffled")->capture_default_str();
  bench->add_flag("--no-importance", no_importance, "Skip permutation importance");
  bench->add_flag("--no-transfer", no_transfer, "Skip the transfer matrix");
  bench->add_flag("--save-models", save_models, "Store fold model artifacts");
  bench->add_option("--out", out, "Output directory");

  std::string k_values = "0.05,0.01,0.005,0.001";
  auto* sweep = app.add_subcommand("noloop-sweep", "Baseline runs over K_OHO_NO with NO-loop diagnostics");
  sweep->add_option("--k", k_values, "Comma-separated K_OHO_NO values, gN/m3")->capture_default_str();
  sweep->add_option("--out", out, "Output directory");

  std::string source = "Baseline";
  auto* tr = app.add_subcommand("transfer", "Apply models trained on one scenario to others");
  tr->add_option("--scenario", source, "Source scenario")->capture_default_str();
  tr->add_option("--target", targets, "Target scenario (repeatable; default all compatible)");
  tr->add_option("--families", families, "Comma-separated model families (default rf,gbt,knn,poly2)");
  tr->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
  tr->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  json opts{{"seed", seed}, {"jobs", jobs}, {"use_cache", !no_cache}};
  if (!data_dir.empty()) opts["data_dir"] = data_dir;
  if (!cache_dir.empty()) opts["cache_dir"] = cache_dir;
  if (!config_path.empty()) opts["config"] = config_path;
  if (!registry_path.empty()) opts["registry"] = registry_path;

  n2o_workspace* ws = nullptr;
  if (auto s = n2o_workspace_open(opts.dump().c_str(), &ws); s != N2O_OK) return report_failure(s);
  if (!quiet) n2o_workspace_set_logger(ws, log_to_stderr, nullptr);

  std::string command;
  json args = json::object();
  const auto default_out = [&](const std::string& d) { return out.empty() ? d : out; };
  if (sim->parsed()) {
    if (list) {
      command = "list";
    } else {
      command = "simulate";
      args = {{"simulation", scenario}, {"out", default_out("n2olab-out/simulate/" + scenario)}};
    }
  } else if (gen->parsed()) {
    command = "generate-all";
    args = {{"out", default_out("n2olab-out/datasets")}};
  } else if (met->parsed()) {
    command = "metrics";
    args = {{"simulation", scenario}, {"out", default_out("n2olab-out/metrics/" + scenario)}};
    if (!dataset_csv.empty()) args["dataset"] = dataset_csv;
  } else if (bench->parsed()) {
    command = "benchmark";
    args = {{"out", default_out("n2olab-out/benchmark")},
            {"scenarios", scenarios},
            {"datasets", datasets},
            {"repeats", repeats},
            {"importance_rows", importance_rows},
            {"folds", folds},
            {"fold_mode", fold_mode},
            {"importance", !no_importance},
            {"transfer", !no_transfer},
            {"save_models", save_models}};
    if (!families.empty()) args["families"] = split_csv(families);
  } else if (sweep->parsed()) {
    command = "noloop-sweep";
    json k = json::array();
    try {
      for (const auto& v : split_csv(k_values)) k.push_back(std::stod(v));
    } catch (const std::exception&) {
      std::fprintf(stderr, "error [invalid-argument]: --k expects comma-separated numbers\n");
      n2o_workspace_close(ws);
      return 2;
    }
    args = {{"out", default_out("n2olab-out/noloop-sweep")}, {"k", k}};
  } else if (tr->parsed()) {
    command = "transfer";
    args = {{"out", default_out("n2olab-out/transfer")}, {"source", source}, {"targets", targets}, {"folds", folds}};
    if (!families.empty()) args["families"] = split_csv(families);
  }

  char* result = nullptr;
  const auto s = n2o_run(ws, command.c_str(), args.dump().c_str(), &result);
  if (s != N2O_OK) {
    const int rc = report_failure(s);
    n2o_workspace_close(ws);
    return rc;
  }
  const json r = json::parse(result);
  n2o_free_string(result);
  n2o_workspace_close(ws);

  if (command == "list") {
    for (const auto& e : r) std::printf("%d\t%s\t%s\n", e["id"].get<int>(), e["key"].get<std::string>().c_str(),
                                        e["description"].get<std::string>().c_str());
    return 0;
  }
  for (const auto& o : r["outputs"]) std::printf("%s  %s\n", o["sha256"].get<std::string>().c_str(),
                                                 o["path"].get<std::string>().c_str());
  std::printf("manifest: %s/manifest.json\n", args["out"].get<std::string>().c_str());
  if (r.contains("failures") && !r["failures"].empty()) {
    std::fprintf(stderr, "%zu failure(s) recorded in the manifest\n", r["failures"].size());
    return exit_code(N2O_ERR_DATA);
  }
  return 0;
}
