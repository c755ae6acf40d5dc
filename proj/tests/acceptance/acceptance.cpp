// End-to-end acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--cache DIR] [--work DIR] [--jobs N] [--only 1,5,9] [--quiet]
//
// Simulations are cached under --cache (keyed by config hash), so a warm
// cache makes re-runs much faster. Exit status is 0 only when every selected
// criterion passes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biokinetics/kinetics.hpp"
#include "biokinetics/stoichiometry.hpp"
#include "common/hash.hpp"
#include "metrics/emissions.hpp"
#include "metrics/statistics.hpp"
#include "plant/simulate.hpp"
#include "softsensor/evaluate.hpp"
#include "workflow/commands.hpp"

using namespace n2olab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

struct Context {
  std::string cache;
  std::string work;
  unsigned jobs = 1;
  bool quiet = false;
  std::unique_ptr<workflow::Workspace> ws;

  workflow::WorkspaceOptions options(std::uint64_t seed = 1, unsigned j = 1, bool use_cache = true) const {
    workflow::WorkspaceOptions o;
    o.cache_dir = cache;
    o.seed = seed;
    o.jobs = j;
    o.use_cache = use_cache;
    if (!quiet) o.log = [](const std::string& m) { std::fprintf(stderr, "  [run] %s\n", m.c_str()); };
    return o;
  }
};

// 1. Conservation --------------------------------------------------------

Outcome conservation(Context& c) {
  auto& ws = *c.ws;
  double worst_row = 0.0;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_rate = 0.0;
  for (int sim : {1, 8}) {
    const auto cfg = ws.simulation_config(sim).config;
    const auto k = bio::KineticConstants::from(cfg.params);
    const auto st = bio::StoichiometryMatrix::build(k);
    for (std::size_t p = 0; p < bio::kNumProcesses; ++p)
      worst_row = std::max({worst_row, std::abs(st.nitrogen_residual(p)), std::abs(st.cod_residual(p))});
    // Net N and COD production of the whole rate vector at random states.
    for (int t = 0; t < 200; ++t) {
      bio::ComponentState s{};
      for (std::size_t i = 0; i < bio::kNumComponents; ++i) s[i] = 50.0 * u(rng) * u(rng);
      s[bio::S_O2] = 3.0 * u(rng);
      const auto r = bio::process_rates(s, k, cfg.variant);
      const auto d = bio::derivative(r, st);
      double n = 0.0, cod = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        n += st.n_weight[i] * d[i];
        cod += st.cod_weight[i] * d[i];
        scale = std::max(scale, std::abs(d[i]));
      }
      if (scale > 0) worst_rate = std::max({worst_rate, std::abs(n) / scale, std::abs(cod) / scale});
    }
  }
  ws.ensure({1, 2, 3, 4, 5, 6, 7, 8});
  double worst_closure = 0.0;
  std::string per;
  for (int sim = 1; sim <= 8; ++sim) {
    const auto b = plant::nitrogen_balance(*ws.run(sim).trajectory);
    worst_closure = std::max(worst_closure, std::abs(b.closure_relative));
    per += " " + std::to_string(sim) + ":" + fmt("%.2e", b.closure_relative);
  }
  const bool ok = worst_row < 1e-9 && worst_rate < 1e-9 && worst_closure < 0.005;
  return {ok, "max row residual " + fmt("%.1e", worst_row) + ", max net rate residual " + fmt("%.1e", worst_rate) +
                  " (limit 1e-9); yearly N closure max " + fmt("%.3f", 100 * worst_closure) + "% (limit 0.5%);" + per};
}

// 2. Solver convergence --------------------------------------------------

Outcome convergence(Context& c) {
  auto& ws = *c.ws;
  const double ef = metrics::emission_factor(*ws.run(1).trajectory);
  auto tight = ws.simulation_config(1).config;
  tight.name = "baseline_tight";
  tight.solver.rtol /= 10.0;
  tight.solver.atol_scale /= 10.0;
  const double ef_tight = metrics::emission_factor(*ws.trajectory(tight));
  const double rel = std::abs(ef_tight - ef) / ef;
  return {rel < 0.005, "EF " + fmt("%.5f", ef) + "% vs " + fmt("%.5f", ef_tight) + "% at 10x tighter tolerances, change " +
                           fmt("%.4f", 100 * rel) + "% (limit 0.5%)"};
}

// 3. Baseline emission structure -----------------------------------------

Outcome emission_structure(Context& c) {
  const auto& tr = *c.ws->run(1).trajectory;
  const auto em = metrics::emission_report(tr);
  const double a1 = em.at("rA1").mean_kg_per_d, a2 = em.at("rA2").mean_kg_per_d, a3 = em.at("rA3").mean_kg_per_d;
  const auto table = metrics::dynamics_table(tr);
  std::map<std::string, double> corr;
  for (const auto& col : table.columns)
    if (col.corr_to_site) corr[col.label] = *col.corr_to_site;
  const bool ef_ok = em.ef_pct >= 0.3 && em.ef_pct <= 3.0;
  const bool order_ok = a1 > a2 && a2 > a3;
  const bool corr_ok = corr.count("rA2") && corr["rA2"] > corr["rA1"] && corr["rA2"] > corr["rA3"];
  bool nd_ok = true;
  std::string nd;
  for (const auto& p : em.pathways) {
    if (p.location == "aerated") continue;
    nd_ok = nd_ok && p.nd > p.nn && p.nd > p.hd;
    nd += " " + p.location + " " + fmt("%.0f", p.nd) + "%";
  }
  const double tot = a1 + a2 + a3;
  return {ef_ok && order_ok && corr_ok && nd_ok,
          "EF " + fmt("%.3f", em.ef_pct) + "% (band 0.3-3.0); shares rA1/rA2/rA3 " + fmt("%.0f", 100 * a1 / tot) + "/" +
              fmt("%.0f", 100 * a2 / tot) + "/" + fmt("%.0f", 100 * a3 / tot) + "%; corr to site rA1/rA2/rA3 " +
              fmt("%.2f", corr["rA1"]) + "/" + fmt("%.2f", corr["rA2"]) + "/" + fmt("%.2f", corr["rA3"]) +
              "; ND share" + nd};
}

// 4. NO-loop sweep --------------------------------------------------------

Outcome noloop(Context& c) {
  const auto rows = workflow::noloop_rows(*c.ws, {0.05, 0.001});
  const workflow::NoLoopRow *hi = nullptr, *lo = nullptr;
  for (const auto& r : rows)
    if (r.tank == "rA1") (r.k == 0.05 ? hi : lo) = &r;
  if (!hi || !lo || !hi->nor_pct_of_nir || !lo->nor_pct_of_nir || !hi->haostar_pct_of_hao || !lo->haostar_pct_of_hao)
    return {false, "rA1 diagnostics unavailable"};
  const double nor0 = *hi->nor_pct_of_nir, nor1 = *lo->nor_pct_of_nir;
  const double h0 = *hi->haostar_pct_of_hao, h1 = *lo->haostar_pct_of_hao;
  const double aut0 = hi->nn + hi->nd, aut1 = lo->nn + lo->nd;
  const bool ok = nor0 < 10 && nor1 > 95 && h0 > 100 && std::abs(h1 - 100) <= 0.5 && lo->hd - hi->hd >= 25 &&
                  aut0 - aut1 >= 25;
  return {ok, "rA1, K 0.05 -> 0.001: NOR/NIR " + fmt("%.1f", nor0) + " -> " + fmt("%.1f", nor1) +
                  "% (<10, >95); HAO*/HAO " + fmt("%.2f", h0) + " -> " + fmt("%.2f", h1) +
                  "% (>100, 100+-0.5); HD " + fmt("%.0f", hi->hd) + " -> " + fmt("%.0f", lo->hd) + "%; autotrophic " +
                  fmt("%.0f", aut0) + " -> " + fmt("%.0f", aut1) + "% (shifts >= 25 points)"};
}

// 5 and 7 share the Baseline cross-validation of each family.

const std::vector<soft::Family> kFamilies{soft::Family::RandomForest, soft::Family::GradientBoostedTrees,
                                          soft::Family::KNN};

struct FamilyRun {
  soft::EvaluationReport report;
  std::vector<soft::TransferReport> transfers;
};

std::map<soft::Family, FamilyRun>& baseline_runs(Context& c) {
  static std::map<soft::Family, FamilyRun> runs;
  if (!runs.empty()) return runs;
  auto& ws = *c.ws;
  const auto targets = workflow::default_transfer_targets(ws, "Baseline");
  soft::CvOptions cv;
  cv.jobs = c.jobs;
  for (auto f : kFamilies) {
    FamilyRun r;
    r.transfers = workflow::transfer_matrix(ws, "Baseline", targets, f, cv, 1, &r.report);
    runs[f] = std::move(r);
  }
  return runs;
}

Outcome ml_accuracy(Context& c) {
  bool ok = true;
  std::string d;
  for (const auto& [f, r] : baseline_runs(c)) {
    bool guard = true;
    for (const auto& fs_ : r.report.folds) guard = guard && fs_.train_r2 >= fs_.val_r2;
    ok = ok && r.report.mean_val_r2 >= 0.90 && guard;
    d += std::string(soft::to_string(f)) + " val " + fmt("%.3f", r.report.mean_val_r2) + " train " +
         fmt("%.3f", r.report.mean_train_r2) + (guard ? "" : " (train < val in a fold)") + "; ";
  }
  return {ok, d + "limit val >= 0.90, train >= val per fold"};
}

// 6. Importance properties ------------------------------------------------

soft::ImportanceReport importance_of(soft::Family f, const scenarios::TabularDataset& d, unsigned jobs) {
  soft::ModelSpec s;
  s.family = f;
  soft::CvOptions cv;
  cv.jobs = jobs;
  return soft::permutation_importance(soft::cross_validate(s, d, cv), d, {20, 1, 1000, jobs});
}

Outcome importance(Context& c) {
  auto& ws = *c.ws;
  const auto base = ws.dataset(ws.registry().scenario("Baseline"));
  const auto base3h = ws.dataset(ws.registry().scenario("Baseline_3h"));
  bool ok = true;
  std::string d;

  // appended N(0,1) column
  auto noisy = base3h;
  noisy.X.conservativeResize(Eigen::NoChange, noisy.X.cols() + 1);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < noisy.X.rows(); ++i) noisy.X(i, noisy.X.cols() - 1) = g(rng);
  noisy.feature_names.push_back("noise@none[-]");
  for (auto f : kFamilies) {
    const auto imp = importance_of(f, noisy, c.jobs);
    const double v = imp.importance.back();
    ok = ok && std::abs(v) < 0.01;
    d += std::string(soft::to_string(f)) + " noise " + fmt("%.4f", v) + "; ";
  }

  // Target replaced by a copy of one feature. The other Baseline columns are
  // shuffled independently so the copied column is the only informative one;
  // the unshuffled (correlated) matrix is reported alongside.
  auto copied = base3h;
  const int j = copied.feature_index("NH4@rA1[gN/m3]");
  if (j < 0) return {false, "NH4@rA1 not in the Baseline feature set"};
  copied.y = copied.X.col(j);
  copied.target_name = "copy_of_NH4@rA1[gN/m3]";
  auto isolated = copied;
  for (Eigen::Index col = 0; col < isolated.X.cols(); ++col) {
    if (col == j) continue;
    Eigen::VectorXd v = isolated.X.col(col);
    std::shuffle(v.data(), v.data() + v.size(), rng);
    isolated.X.col(col) = v;
  }
  const auto share = [&](const soft::ImportanceReport& imp) {
    return imp.sorted_features.front() == copied.feature_names[j] ? imp.cumulative.front() : 0.0;
  };
  for (auto f : kFamilies) {
    const double s_iso = share(importance_of(f, isolated, c.jobs));
    const double s_cor = share(importance_of(f, copied, c.jobs));
    ok = ok && s_iso >= 0.95;
    d += std::string(soft::to_string(f)) + " copy share " + fmt("%.3f", s_iso) + " (correlated matrix " +
         fmt("%.3f", s_cor) + "); ";
  }

  // ranking stability between sampling intervals
  for (auto f : {soft::Family::RandomForest, soft::Family::KNN}) {
    const auto a = importance_of(f, base, c.jobs);
    const auto b = importance_of(f, base3h, c.jobs);
    const auto rho = soft::spearman(a.importance, b.importance);
    ok = ok && rho && *rho >= 0.9;
    d += std::string(soft::to_string(f)) + " spearman 15min/3h " + fmt("%.3f", rho.value_or(NAN)) + "; ";
  }
  return {ok, d + "limits |noise| < 0.01, copy share >= 0.95, spearman >= 0.9"};
}

// 7. Transfer ordering ----------------------------------------------------

Outcome transfer(Context& c) {
  std::map<std::string, double> drop;
  std::map<std::string, int> n;
  for (const auto& [f, r] : baseline_runs(c))
    for (const auto& t : r.transfers) {
      drop[t.target] += t.drop_pct;
      ++n[t.target];
    }
  for (auto& [k, v] : drop) v /= n[k];
  const auto get = [&](const char* k) { return drop.count(k) ? drop[k] : NAN; };
  std::string worst;
  double worst_v = -HUGE_VAL;
  for (const auto& [k, v] : drop)
    if (v > worst_v) {
      worst_v = v;
      worst = k;
    }
  const double small = std::max({get("MassTransferEq"), get("MicrobioNonN2O"), get("MicrobioN2O"), get("Influent")});
  const bool ok = worst == "BiologicalStructure" && get("AerobicVolume") > small && get("BiasedN2O") > small;
  std::string d = "mean drop % over rf/gbt/knn:";
  for (const auto& [k, v] : drop) d += " " + k + " " + fmt("%.1f", v);
  return {ok, d + "; need BiologicalStructure largest and AerobicVolume, BiasedN2O above MassTransferEq, Microbio*, "
                  "Influent (largest now " + worst + ")"};
}

// 8. Metrics oracle -------------------------------------------------------

Outcome metrics_oracle(Context&) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(3, 400);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    const double scale = std::pow(10.0, g(rng));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = scale * ln(rng);
      y[i] = 0.5 * x[i] + scale * g(rng);
    }
    long double sad = 0, ssd = 0, mx = 0, my = 0;
    for (int i = 0; i + 1 < n; ++i) sad += std::fabs(static_cast<long double>(x[i + 1]) - x[i]);
    for (int i = 0; i + 2 < n; ++i) {
      const long double d2 = static_cast<long double>(x[i + 2]) - 2.0L * x[i + 1] + x[i];
      ssd += d2 * d2;
    }
    for (int i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= n;
    my /= n;
    long double sxx = 0, syy = 0, sxy = 0, s3 = 0;
    for (int i = 0; i < n; ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
      sxy += (x[i] - mx) * (y[i] - my);
      s3 += (x[i] - mx) * (x[i] - mx) * (x[i] - mx);
    }
    const long double r = sxy / std::sqrt(sxx * syy);
    const long double skew = (s3 / n) / std::pow(sxx / n, 1.5L);
    const auto rel = [](double a, long double b) {
      return static_cast<double>(std::fabs(a - b) / std::max(1.0L, std::fabs(b)));
    };
    worst = std::max(worst, rel(metrics::sad(x), sad) / std::max(1.0, scale));
    worst = std::max(worst, rel(metrics::ssd(x), ssd) / std::max(1.0, scale * scale));
    worst = std::max(worst, rel(*metrics::pearson(x, y), r));
    worst = std::max(worst, rel(*metrics::skewness(x), skew));
    for (std::size_t lag : {1u, 2u}) {
      if (lag >= static_cast<std::size_t>(n)) continue;
      long double a = 0;
      for (std::size_t i = lag; i < static_cast<std::size_t>(n); ++i) a += (x[i] - mx) * (x[i - lag] - mx);
      worst = std::max(worst, rel(*metrics::autocorr(x, lag), a / sxx));
    }
  }
  // SAD = 0 iff constant, SSD = 0 iff affine
  bool iff = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 50;
    const double a = std::round(100 * g(rng)), b = std::round(10 * g(rng));
    std::vector<double> cst(n, a), aff(n);
    for (int i = 0; i < n; ++i) aff[i] = a + b * i;
    iff = iff && metrics::sad(cst) == 0.0 && metrics::ssd(aff) == 0.0;
    auto bent = aff;
    bent[1 + trial % (n - 2)] += 1e-3;
    iff = iff && metrics::ssd(bent) > 0.0 && metrics::sad(bent) > 0.0;
    if (b != 0.0) iff = iff && metrics::sad(aff) > 0.0;
  }
  return {worst <= 1e-10 && iff,
          "max deviation from long-double oracle " + fmt("%.2e", worst) + " (limit 1e-10); zero iff constant/affine " +
              (iff ? "holds" : "violated")};
}

// 9. Reproducibility ------------------------------------------------------

std::vector<std::pair<std::string, std::string>> hashes(const json& manifest) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& o : manifest.at("outputs")) out.emplace_back(o.at("path"), o.at("sha256"));
  return out;
}

Outcome reproducibility(Context& c) {
  const auto root = fs::path(c.work) / "repro";
  fs::remove_all(root);
  struct Check {
    std::string name;
    std::function<json(workflow::Workspace&, const std::string&)> run;
    std::uint64_t seed = 1;
    bool second_uncached = false;
  };
  std::vector<Check> checks{
      {"simulate", [](auto& ws, const auto& o) { return workflow::cmd_simulate(ws, "baseline", o); }, 7, true},
      {"generate-all", [](auto& ws, const auto& o) { return workflow::cmd_generate_all(ws, o); }},
      {"metrics", [](auto& ws, const auto& o) { return workflow::cmd_metrics(ws, "baseline", o); }},
      {"benchmark",
       [](auto& ws, const auto& o) {
         workflow::BenchmarkOptions b;
         b.scenarios = {"Baseline_3h"};
         b.families = {soft::Family::RandomForest, soft::Family::GradientBoostedTrees, soft::Family::KNN,
                       soft::Family::SecondOrderInteractions};
         return workflow::cmd_benchmark(ws, b, o);
       }},
      {"noloop-sweep", [](auto& ws, const auto& o) { return workflow::cmd_noloop_sweep(ws, {0.05, 0.001}, o); }},
      {"transfer",
       [](auto& ws, const auto& o) {
         workflow::TransferOptions t;
         t.families = {soft::Family::GradientBoostedTrees};
         t.targets = {"AerobicVolume"};
         t.cv.jobs = ws.options().jobs;
         return workflow::cmd_transfer(ws, t, o);
       }},
  };
  bool ok = true;
  std::string d;
  for (const auto& ch : checks) {
    workflow::Workspace a(c.options(ch.seed, 1, true));
    workflow::Workspace b(c.options(ch.seed, 3, !ch.second_uncached));
    const auto ha = hashes(ch.run(a, (root / (ch.name + "_a")).string()));
    const auto hb = hashes(ch.run(b, (root / (ch.name + "_b")).string()));
    const bool same = !ha.empty() && ha == hb;
    ok = ok && same;
    d += ch.name + " " + (same ? "identical" : "DIFFERENT") + " (" + std::to_string(ha.size()) + " files); ";
  }
  return {ok, d + "jobs 1 vs 3" + ", simulate re-run without cache"};
}

// 10. Scenario completeness -----------------------------------------------

Outcome completeness(Context& c) {
  const auto out = fs::path(c.work) / "datasets";
  fs::remove_all(out);
  workflow::Workspace ws(c.options());
  workflow::cmd_generate_all(ws, out.string());
  std::multiset<std::size_t> counts;
  std::size_t files = 0, missing = 0, mismatched = 0;
  for (const auto& s : ws.registry().scenarios()) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "%02d_", s.id);
    const auto path = out / (std::string(stem) + s.key + ".csv");
    if (!fs::exists(path)) continue;
    ++files;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.find(",,") != std::string::npos || line.back() == ',' || line.find("nan") != std::string::npos ||
          line.find("inf") != std::string::npos)
        ++missing;
    }
    const auto d = scenarios::TabularDataset::read_csv(path.string());
    d.validate();
    counts.insert(d.features());
    if (d.features() != ws.registry().catalog().features(s.features).size()) ++mismatched;
  }
  std::size_t csvs = 0;
  for (const auto& e : fs::directory_iterator(out))
    if (e.path().extension() == ".csv" && e.path().filename() != "index.csv") ++csvs;
  const std::multiset<std::size_t> want{12, 12, 12, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 14, 21};
  const bool ok = files == 16 && csvs == 16 && counts == want && missing == 0 && mismatched == 0;
  return {ok, std::to_string(csvs) + " dataset CSVs; feature counts 12 x" + std::to_string(counts.count(12)) +
                  ", 14 x" + std::to_string(counts.count(14)) + ", 21 x" + std::to_string(counts.count(21)) +
                  "; rows with missing values " + std::to_string(missing)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Context c;
  c.cache = "n2olab-cache";
  std::string only;
  app.add_option("--cache", c.cache, "Simulation cache directory");
  app.add_option("--work", c.work, "Scratch directory (default: <cache>/../acceptance-work)");
  app.add_option("--jobs", c.jobs, "Parallel workers");
  app.add_option("--only", only, "Comma-separated criteria to run");
  app.add_flag("--quiet", c.quiet, "No progress messages");
  CLI11_PARSE(app, argc, argv);
  if (c.work.empty()) c.work = (fs::absolute(c.cache).parent_path() / "acceptance-work").string();
  fs::create_directories(c.work);

  std::set<int> selected;
  {
    std::stringstream ss(only);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) selected.insert(std::stoi(tok));
  }

  const std::vector<std::pair<const char*, Outcome (*)(Context&)>> criteria{
      {"conservation", conservation},
      {"solver convergence", convergence},
      {"baseline emission structure", emission_structure},
      {"NO-loop affinity sweep", noloop},
      {"soft-sensor accuracy", ml_accuracy},
      {"importance properties", importance},
      {"transfer ordering", transfer},
      {"metrics oracle", metrics_oracle},
      {"reproducibility", reproducibility},
      {"scenario completeness", completeness},
  };

  c.ws = std::make_unique<workflow::Workspace>(c.options(1, c.jobs));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(c);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %-28s %s  %s\n", id, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}
