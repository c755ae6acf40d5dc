#include "workflow/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "biokinetics/pathways.hpp"
#include "biokinetics/stoichiometry.hpp"
#include "common/hash.hpp"
#include "metrics/emissions.hpp"
#include "metrics/statistics.hpp"
#include "plant/trajectory.hpp"

namespace n2olab::workflow {

namespace fs = std::filesystem;
using plant::format_double;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::string two_digits(int v) {
  char b[16];
  std::snprintf(b, sizeof b, "%02d", v);
  return b;
}

std::string dataset_file_stem(const scenarios::ScenarioSpec& s) { return two_digits(s.id) + "_" + s.key; }

}  // namespace

RunManifest::RunManifest(std::string command, const Workspace& ws) : command_(std::move(command)), t0_(now_seconds()) {
  const auto& o = ws.options();
  inputs_ = {{"config_path", o.config_path},
             {"config_hash", ws.base_config().hash()},
             {"registry_path", o.registry_path},
             {"seed", o.seed},
             {"influent_seed", ws.base_config().influent.seed},
             {"jobs", o.jobs}};
}

void RunManifest::add_output(const std::string& path) { outputs_.emplace_back(path, sha256_file(path)); }

json RunManifest::write(const std::string& dir) {
  json outs = json::array();
  for (const auto& [p, h] : outputs_) {
    std::error_code ec;
    auto rel = fs::relative(p, dir, ec);
    outs.push_back({{"path", ec ? p : rel.generic_string()}, {"sha256", h}, {"bytes", fs::file_size(p)}});
  }
  json m{{"command", command_},
         {"tool_version", kToolVersion},
         {"inputs", inputs_},
         {"wall_seconds", now_seconds() - t0_},
         {"outputs", outs}};
  for (auto& [k, v] : extra_.items()) m[k] = v;
  prepare_dir(dir);
  write_text_file((fs::path(dir) / "manifest.json").string(), m.dump(2) + "\n");
  return m;
}

json list_simulations(const Workspace& ws) {
  json out = json::array();
  for (const auto& s : ws.registry().simulations()) {
    json j{{"id", s.id}, {"key", s.key}, {"description", s.description}};
    if (s.composite()) j["composite_of"] = s.composite_of;
    out.push_back(j);
  }
  return out;
}

json cmd_simulate(Workspace& ws, const std::string& simulation, const std::string& out_dir) {
  RunManifest man("simulate", ws);
  const auto& spec = ws.registry().simulation(simulation);
  const auto dir = prepare_dir(out_dir);
  const auto& run = ws.run(spec.id);
  const auto& tr = *run.trajectory;

  const auto csv = (dir / "trajectory.csv").string();
  tr.write_csv(csv);
  man.add_output(csv);
  if (!spec.composite()) {
    const auto cfg = (dir / "config.json").string();
    write_text_file(cfg, ws.simulation_config(spec.id).config.to_json().dump(2) + "\n");
    man.add_output(cfg);
  }
  const auto meta = (dir / "trajectory_meta.json").string();
  write_text_file(meta, tr.meta.dump(2) + "\n");
  man.add_output(meta);

  man.set("simulation", {{"id", spec.id}, {"key", spec.key}});
  man.set("config_hash", run.config_hash);
  man.set("disturbance", run.disturbance);
  man.set("from_cache", run.from_cache);
  man.set("summary", {{"rows", tr.rows()},
                      {"channels", tr.channels.size()},
                      {"ef_pct", metrics::emission_factor(tr)},
                      {"balance", tr.meta.value("balance", json::object())},
                      {"solver_dynamic", tr.meta.value("solver_dynamic", json::object())},
                      {"steady_converged", tr.meta.value("steady_converged", false)},
                      {"warnings", tr.meta.value("warnings", json::array())}});
  return man.write(out_dir);
}

json cmd_generate_all(Workspace& ws, const std::string& out_dir) {
  RunManifest man("generate-all", ws);
  const auto dir = prepare_dir(out_dir);
  const auto& specs = ws.registry().scenarios();
  const int before = ws.simulations_run();
  ws.ensure(ws.registry().required_runs(specs));

  std::string index = "id,key,simulation,features,target,interval_minutes,rows,n_features,file\n";
  json failures = json::array();
  for (const auto& s : specs) {
    try {
      const auto d = ws.dataset(s);
      const auto stem = dataset_file_stem(s);
      const auto csv = (dir / (stem + ".csv")).string();
      d.write_csv(csv);
      json side = d.meta;
      json runs = json::array();
      for (int id : s.simulations) {
        const auto& r = ws.run(id);
        runs.push_back({{"simulation", id}, {"config_hash", r.config_hash}, {"disturbance", r.disturbance}});
      }
      side["runs"] = runs;
      side["seed"] = ws.options().seed;
      const auto sidecar = (dir / (stem + ".json")).string();
      write_text_file(sidecar, side.dump(2) + "\n");
      man.add_output(csv);
      man.add_output(sidecar);
      index += std::to_string(s.id) + "," + s.key + "," + s.simulation_label + "," +
               std::string(scenarios::to_string(s.features)) + "," + d.target_name + "," +
               std::to_string(s.interval_minutes) + "," + std::to_string(d.rows()) + "," +
               std::to_string(d.features()) + "," + stem + ".csv\n";
      ws.log("dataset " + stem + ": " + std::to_string(d.rows()) + " x " + std::to_string(d.features()));
    } catch (const Error& e) {
      failures.push_back({{"scenario", s.key}, {"kind", to_string(e.kind())}, {"message", e.what()}});
      ws.log("scenario " + s.key + " failed: " + e.what());
    }
  }
  const auto idx = (dir / "index.csv").string();
  write_text_file(idx, index);
  man.add_output(idx);
  man.set("datasets", specs.size() - failures.size());
  man.set("simulations_run", ws.simulations_run() - before);
  man.set("failures", failures);
  auto m = man.write(out_dir);
  if (!failures.empty())
    fail(ErrorKind::Data, std::to_string(failures.size()) + " scenario(s) failed, first: " +
                              failures[0]["scenario"].get<std::string>() + ": " +
                              failures[0]["message"].get<std::string>());
  return m;
}

namespace {

json dataset_metrics(const scenarios::TabularDataset& d, const std::string& path) {
  d.validate();
  const double duration = d.rows() > 1 ? d.time.back() - d.time.front() : 0.0;
  std::string csv = "column,n,mean,stdev,cv_pct,skewness,sad,ssd,sadn,ssdn,acf_lag1,corr_to_target\n";
  std::vector<double> y(d.y.data(), d.y.data() + d.y.size());
  json cols = json::array();
  for (std::size_t j = 0; j <= d.features(); ++j) {
    std::vector<double> x;
    std::string name;
    if (j < d.features()) {
      x.assign(d.X.col(static_cast<Eigen::Index>(j)).data(), d.X.col(static_cast<Eigen::Index>(j)).data() + d.rows());
      name = d.feature_names[j];
    } else {
      x = y;
      name = d.target_name;
    }
    const auto s = metrics::summarize(x, 1.0, duration > 0 ? duration : 1.0, {1});
    const auto r = metrics::pearson(x, y);
    csv += name + "," + std::to_string(s.n) + "," + format_double(s.mean) + "," + format_double(s.stdev) + "," +
           opt_str(s.cv) + "," + opt_str(s.skewness) + "," + format_double(s.sad) + "," + format_double(s.ssd) + "," +
           format_double(s.sadn) + "," + format_double(s.ssdn) + "," + opt_str(s.autocorrelation[0].second) + "," +
           opt_str(r) + "\n";
    auto sj = s.to_json();
    sj["column"] = name;
    cols.push_back(sj);
  }
  write_text_file(path, csv);
  return cols;
}

}  // namespace

json cmd_metrics(Workspace& ws, const std::string& simulation, const std::string& out_dir,
                 const std::string& dataset_csv) {
  RunManifest man("metrics", ws);
  const auto dir = prepare_dir(out_dir);
  if (!dataset_csv.empty()) {
    const auto d = scenarios::TabularDataset::read_csv(dataset_csv);
    const auto out = (dir / "dataset_metrics.csv").string();
    dataset_metrics(d, out);
    man.add_output(out);
    man.set("dataset", {{"path", dataset_csv}, {"rows", d.rows()}, {"features", d.features()},
                        {"sha256", sha256_file(dataset_csv)}});
    return man.write(out_dir);
  }
  const auto& spec = ws.registry().simulation(simulation);
  const auto& run = ws.run(spec.id);
  const auto& tr = *run.trajectory;
  const auto em = metrics::emission_report(tr);
  const auto table = metrics::dynamics_table(tr, {1, 4, 96});

  const auto ej = (dir / "emissions.json").string();
  write_text_file(ej, em.to_json().dump(2) + "\n");
  const auto dc = (dir / "dynamics.csv").string();
  write_text_file(dc, table.to_csv());
  const auto dt = (dir / "dynamics.txt").string();
  write_text_file(dt, table.to_text());
  const auto dj = (dir / "dynamics.json").string();
  write_text_file(dj, table.to_json().dump(2) + "\n");
  const auto bj = (dir / "balance.json").string();
  write_text_file(bj, plant::to_json(plant::nitrogen_balance(tr)).dump(2) + "\n");
  for (const auto& p : {ej, dc, dt, dj, bj}) man.add_output(p);
  man.set("simulation", {{"id", spec.id}, {"key", spec.key}});
  man.set("config_hash", run.config_hash);
  man.set("summary", {{"ef_pct", em.ef_pct}, {"total_kg_per_d", em.total_kg_per_d}, {"no_to_n2o", em.no_to_n2o}});
  return man.write(out_dir);
}

std::vector<std::string> default_transfer_targets(const Workspace& ws, const std::string& source) {
  const auto& src = ws.registry().scenario(source);
  std::vector<std::string> out;
  for (const auto& s : ws.registry().scenarios())
    if (s.id != src.id && s.features == src.features && s.target == src.target &&
        s.interval_minutes == src.interval_minutes && s.simulations != src.simulations)
      out.push_back(s.key);
  return out;
}

std::vector<soft::TransferReport> transfer_matrix(Workspace& ws, const std::string& source,
                                                  const std::vector<std::string>& targets, soft::Family family,
                                                  const soft::CvOptions& cv, std::uint64_t seed,
                                                  soft::EvaluationReport* source_report) {
  const auto d = ws.dataset(ws.registry().scenario(source));
  soft::ModelSpec spec;
  spec.family = family;
  spec.seed = seed;
  const auto res = soft::cross_validate(spec, d, cv);
  if (source_report) *source_report = res.report;
  std::vector<soft::TransferReport> out;
  for (const auto& t : targets) out.push_back(soft::transfer_evaluate(res, ws.dataset(ws.registry().scenario(t))));
  return out;
}

namespace {

const char* kTransferHeader = "family,source,target,in_scenario_r2,target_r2,drop,drop_pct\n";

std::string transfer_row(soft::Family f, const soft::TransferReport& r) {
  return std::string(soft::to_string(f)) + "," + r.source + "," + r.target + "," + format_double(r.in_scenario_r2) +
         "," + format_double(r.target_r2) + "," + format_double(r.drop) + "," + format_double(r.drop_pct) + "\n";
}

}  // namespace

json cmd_transfer(Workspace& ws, const TransferOptions& opt, const std::string& out_dir) {
  RunManifest man("transfer", ws);
  const auto dir = prepare_dir(out_dir);
  const auto targets = opt.targets.empty() ? default_transfer_targets(ws, opt.source) : opt.targets;
  std::string csv = kTransferHeader;
  json rows = json::array();
  for (auto f : opt.families) {
    for (const auto& r : transfer_matrix(ws, opt.source, targets, f, opt.cv, ws.options().seed)) {
      csv += transfer_row(f, r);
      auto j = r.to_json();
      j["family"] = std::string(soft::to_string(f));
      rows.push_back(j);
      ws.log(std::string(soft::to_string(f)) + " " + r.source + " -> " + r.target + ": drop " +
             format_double(std::round(r.drop_pct * 10) / 10) + "%");
    }
  }
  const auto p = (dir / "transfer.csv").string();
  write_text_file(p, csv);
  man.add_output(p);
  const auto pj = (dir / "transfer.json").string();
  write_text_file(pj, rows.dump(2) + "\n");
  man.add_output(pj);
  man.set("source", opt.source);
  man.set("targets", targets);
  return man.write(out_dir);
}

json cmd_benchmark(Workspace& ws, const BenchmarkOptions& opt, const std::string& out_dir) {
  RunManifest man("benchmark", ws);
  const auto dir = prepare_dir(out_dir);
  if (opt.importance) prepare_dir((dir / "importance").string());
  if (opt.save_models) prepare_dir((dir / "models").string());

  struct Item {
    std::string label;
    const scenarios::ScenarioSpec* spec = nullptr;
    std::string csv;
  };
  std::vector<Item> items;
  if (opt.scenarios.empty() && opt.dataset_csvs.empty()) {
    for (const auto& s : ws.registry().scenarios()) items.push_back({s.key, &s, ""});
  } else {
    for (const auto& k : opt.scenarios) {
      const auto& s = ws.registry().scenario(k);
      items.push_back({s.key, &s, ""});
    }
  }
  for (const auto& p : opt.dataset_csvs) items.push_back({fs::path(p).stem().string(), nullptr, p});
  {
    std::vector<scenarios::ScenarioSpec> needed;
    for (const auto& it : items)
      if (it.spec) needed.push_back(*it.spec);
    if (!needed.empty()) ws.ensure(ws.registry().required_runs(needed));
  }

  std::string eval_csv =
      "dataset,family,rows,features,train_r2,val_r2,train_adj_r2,val_adj_r2,train_mse,val_mse,train_mae,val_mae,"
      "residual_lag1,n90\n";
  std::string transfer_csv = kTransferHeader;
  json evaluations = json::array(), failures = json::array(), transfers = json::array();
  // family -> dataset -> feature -> normalised rank
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> panels;
  std::map<std::string, std::vector<std::string>> panel_features;
  std::vector<double> all_val;

  std::vector<std::string> targets;
  if (opt.transfer && ws.registry().scenarios().size() > 0) {
    bool has_source = false;
    for (const auto& it : items) has_source |= it.spec && it.spec->key == opt.transfer_source;
    if (has_source) targets = default_transfer_targets(ws, opt.transfer_source);
  }
  std::map<std::string, scenarios::TabularDataset> target_data;

  for (const auto& it : items) {
    scenarios::TabularDataset d;
    try {
      d = it.spec ? ws.dataset(*it.spec) : scenarios::TabularDataset::read_csv(it.csv);
      d.validate();
    } catch (const Error& e) {
      failures.push_back({{"dataset", it.label}, {"kind", to_string(e.kind())}, {"message", e.what()}});
      ws.log("dataset " + it.label + " skipped: " + e.what());
      continue;
    }
    const bool is_source = !targets.empty() && it.spec && it.spec->key == opt.transfer_source;
    if (is_source)
      for (const auto& t : targets) target_data.emplace(t, ws.dataset(ws.registry().scenario(t)));

    for (auto fam : opt.families) {
      const std::string fname(soft::to_string(fam));
      try {
        soft::ModelSpec spec;
        spec.family = fam;
        spec.seed = ws.options().seed;
        auto cvo = opt.cv;
        cvo.jobs = ws.options().jobs;
        const auto cv = soft::cross_validate(spec, d, cvo);
        const auto& r = cv.report;
        all_val.push_back(r.mean_val_r2);
        int n90 = 0;
        if (opt.importance) {
          const auto imp = soft::permutation_importance(
              cv, d, {opt.repeats, ws.options().seed, opt.importance_rows, ws.options().jobs});
          n90 = imp.n90;
          const auto p = (dir / "importance" / (it.label + "__" + fname + ".csv")).string();
          write_text_file(p, imp.to_csv());
          man.add_output(p);
          auto& feats = panel_features[fname];
          for (std::size_t j = 0; j < imp.features.size(); ++j) {
            panels[fname][it.label][imp.features[j]] = imp.normalized_rank[j];
            if (std::find(feats.begin(), feats.end(), imp.features[j]) == feats.end())
              feats.push_back(imp.features[j]);
          }
        }
        eval_csv += it.label + "," + fname + "," + std::to_string(d.rows()) + "," + std::to_string(d.features()) +
                    "," + format_double(r.mean_train_r2) + "," + format_double(r.mean_val_r2) + "," +
                    opt_str(r.mean_train_adj_r2) + "," + opt_str(r.mean_val_adj_r2) + "," +
                    format_double(r.mean_train_mse) + "," + format_double(r.mean_val_mse) + "," +
                    format_double(r.mean_train_mae) + "," + format_double(r.mean_val_mae) + "," +
                    opt_str(r.residual_lag1) + "," + (opt.importance ? std::to_string(n90) : "") + "\n";
        auto rj = r.to_json();
        rj["dataset"] = it.label;
        evaluations.push_back(rj);
        ws.log(it.label + " " + fname + ": train R2 " + format_double(std::round(r.mean_train_r2 * 1e4) / 1e4) +
               ", validation R2 " + format_double(std::round(r.mean_val_r2 * 1e4) / 1e4));
        if (opt.save_models) {
          json models = json::array();
          for (const auto& m : cv.models) models.push_back(m.to_json());
          const auto p = (dir / "models" / (it.label + "__" + fname + ".json")).string();
          write_text_file(p, json{{"folds", cv.folds}, {"models", models}}.dump());
          man.add_output(p);
        }
        if (is_source)
          for (const auto& t : targets) {
            const auto tr = soft::transfer_evaluate(cv, target_data.at(t));
            transfer_csv += transfer_row(fam, tr);
            auto tj = tr.to_json();
            tj["family"] = fname;
            transfers.push_back(tj);
          }
      } catch (const Error& e) {
        failures.push_back(
            {{"dataset", it.label}, {"family", fname}, {"kind", to_string(e.kind())}, {"message", e.what()}});
        ws.log(it.label + " " + fname + " failed: " + e.what());
      }
    }
    if (is_source) target_data.clear();
  }

  const auto ep = (dir / "evaluation.csv").string();
  write_text_file(ep, eval_csv);
  man.add_output(ep);
  const auto ejp = (dir / "evaluation.json").string();
  write_text_file(ejp, evaluations.dump(2) + "\n");
  man.add_output(ejp);
  if (!transfers.empty()) {
    const auto tp = (dir / "transfer.csv").string();
    write_text_file(tp, transfer_csv);
    man.add_output(tp);
  }
  for (const auto& [fam, by_ds] : panels) {
    std::string csv = "feature";
    std::vector<std::string> labels;
    for (const auto& it : items)
      if (by_ds.count(it.label)) {
        labels.push_back(it.label);
        csv += "," + it.label;
      }
    csv += "\n";
    for (const auto& f : panel_features[fam]) {
      csv += f;
      for (const auto& l : labels) {
        const auto& m = by_ds.at(l);
        const auto hit = m.find(f);
        csv += "," + (hit == m.end() ? std::string() : format_double(hit->second));
      }
      csv += "\n";
    }
    const auto p = (dir / ("ranking_" + fam + ".csv")).string();
    write_text_file(p, csv);
    man.add_output(p);
  }

  json summary{{"runs", all_val.size()}};
  if (!all_val.empty()) {
    summary["mean_val_r2"] = metrics::mean(all_val);
    if (all_val.size() > 1) summary["sd_val_r2"] = metrics::stdev(all_val);
  }
  man.set("summary", summary);
  man.set("failures", failures);
  return man.write(out_dir);
}

std::vector<NoLoopRow> noloop_rows(Workspace& ws, const std::vector<double>& k_values) {
  std::vector<plant::PlantConfig> configs;
  for (double k : k_values) {
    if (!(k > 0.0)) fail(ErrorKind::Parameter, "noloop-sweep: K values must be > 0");
    auto c = ws.base_config();
    c.params.set("K_OHO_NO", k);
    char b[64];
    std::snprintf(b, sizeof b, "baseline_K_OHO_NO_%g", k);
    c.name = k == ws.base_config().params.get("K_OHO_NO") ? ws.base_config().name : b;
    configs.push_back(c);
  }
  ws.ensure_configs(configs);
  std::vector<NoLoopRow> rows;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const auto tr = ws.trajectory(c);
    std::vector<std::string> tanks;
    for (const auto& t : c.tanks) tanks.push_back(t.name);
    const auto stoich = bio::StoichiometryMatrix::build(bio::KineticConstants::from(c.params));
    const auto diag = bio::no_loop_diagnostics(plant::mean_process_rates(*tr, tanks), stoich);
    const auto em = metrics::emission_report(*tr);
    for (const auto& d : diag) {
      NoLoopRow r;
      r.k = k_values[i];
      r.tank = d.tank;
      r.amo_pct_of_hao = d.amo_pct_of_hao;
      r.haostar_pct_of_hao = d.haostar_pct_of_hao;
      r.nor_pct_of_nir = d.nor_pct_of_nir;
      r.nn = d.shares.nn;
      r.nd = d.shares.nd;
      r.hd = d.shares.hd;
      r.s_no = metrics::mean(tr->series(d.tank + ".S_NO"));
      r.ef_pct = em.ef_pct;
      r.no_to_n2o = em.no_to_n2o;
      rows.push_back(r);
    }
  }
  return rows;
}

json cmd_noloop_sweep(Workspace& ws, const std::vector<double>& k_values, const std::string& out_dir) {
  RunManifest man("noloop-sweep", ws);
  const auto dir = prepare_dir(out_dir);
  if (k_values.empty()) fail(ErrorKind::Parameter, "noloop-sweep: no K values");
  const auto rows = noloop_rows(ws, k_values);
  std::string csv =
      "K_OHO_NO,tank,AMO_pct_of_HAO,HAOstar_pct_of_HAO,NOR_pct_of_NIR,NN_pct,ND_pct,HD_pct,S_NO_mean,EF_pct,"
      "NO_to_N2O\n";
  json j = json::array();
  for (const auto& r : rows) {
    csv += format_double(r.k) + "," + r.tank + "," + opt_str(r.amo_pct_of_hao) + "," + opt_str(r.haostar_pct_of_hao) +
           "," + opt_str(r.nor_pct_of_nir) + "," + format_double(r.nn) + "," + format_double(r.nd) + "," +
           format_double(r.hd) + "," + format_double(r.s_no) + "," + format_double(r.ef_pct) + "," +
           format_double(r.no_to_n2o) + "\n";
    auto o = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j.push_back({{"K_OHO_NO", r.k},
                 {"tank", r.tank},
                 {"amo_pct_of_hao", o(r.amo_pct_of_hao)},
                 {"haostar_pct_of_hao", o(r.haostar_pct_of_hao)},
                 {"nor_pct_of_nir", o(r.nor_pct_of_nir)},
                 {"pathways_pct", {{"NN", r.nn}, {"ND", r.nd}, {"HD", r.hd}}},
                 {"S_NO_mean", r.s_no},
                 {"ef_pct", r.ef_pct},
                 {"no_to_n2o", r.no_to_n2o}});
  }
  const auto p = (dir / "noloop_sweep.csv").string();
  write_text_file(p, csv);
  man.add_output(p);
  const auto pj = (dir / "noloop_sweep.json").string();
  write_text_file(pj, j.dump(2) + "\n");
  man.add_output(pj);
  man.set("k_values", k_values);
  return man.write(out_dir);
}

}  // namespace n2olab::workflow
