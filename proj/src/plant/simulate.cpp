#include "plant/simulate.hpp"

#include <chrono>
#include <cmath>

#include "common/error.hpp"

namespace n2olab::plant {

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) fail(ErrorKind::Structural, "trapezoid: length mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

BalanceSummary nitrogen_balance(const Trajectory& traj) {
  BalanceSummary b;
  if (traj.rows() < 2) fail(ErrorKind::Data, "nitrogen_balance: need at least two samples");
  const auto& t = traj.time;
  b.n_in = trapezoid(t, traj.series("balance.N_in")) / 1000.0;
  b.n_effluent = trapezoid(t, traj.series("balance.N_effluent")) / 1000.0;
  b.n_primary_sludge = trapezoid(t, traj.series("balance.N_primary_sludge")) / 1000.0;
  b.n_wastage = trapezoid(t, traj.series("balance.N_wastage")) / 1000.0;
  b.n_gas = trapezoid(t, traj.series("balance.N_gas")) / 1000.0;
  const auto& inv = traj.series("balance.N_inventory");
  b.delta_inventory = (inv.back() - inv.front()) / 1000.0;
  const double out = b.n_effluent + b.n_primary_sludge + b.n_wastage + b.n_gas;
  b.closure_relative = b.n_in > 0.0 ? (b.n_in - out - b.delta_inventory) / b.n_in : 0.0;
  return b;
}

std::vector<bio::TankAverages> mean_process_rates(const Trajectory& traj, const std::vector<std::string>& tanks) {
  std::vector<bio::TankAverages> out;
  for (const auto& tank : tanks) {
    bio::TankAverages a;
    a.tank = tank;
    for (std::size_t p = 0; p < bio::kNumProcesses; ++p) {
      const auto& s = traj.series(tank + ".rate." + std::string(bio::kProcessNames[p]));
      double sum = 0.0;
      for (double v : s) sum += v;
      a.mean_rates[p] = s.empty() ? 0.0 : sum / static_cast<double>(s.size());
    }
    out.push_back(a);
  }
  return out;
}

json to_json(const SolverStats& s) {
  return json{{"steps", s.steps},
              {"rejected_error", s.rejected_error},
              {"rejected_negative", s.rejected_negative},
              {"rhs_evaluations", s.rhs_evaluations},
              {"jacobians", s.jacobians},
              {"min_step", s.min_h}};
}

json to_json(const BalanceSummary& b) {
  return json{{"n_in_kg", b.n_in},
              {"n_effluent_kg", b.n_effluent},
              {"n_primary_sludge_kg", b.n_primary_sludge},
              {"n_wastage_kg", b.n_wastage},
              {"n_gas_kg", b.n_gas},
              {"delta_inventory_kg", b.delta_inventory},
              {"closure_relative", b.closure_relative}};
}

SimulationResult simulate(const PlantConfig& config, const ProgressFn& progress) {
  const auto wall0 = std::chrono::steady_clock::now();
  PlantModel model(config);
  const auto& P = config.protocol;
  SimulationResult res;

  SolverOptions opt;
  opt.rtol = config.solver.rtol;
  opt.atol = model.absolute_tolerances();
  opt.nonnegative = model.nonnegative_mask();
  opt.negative_tolerance = config.solver.negative_tolerance;
  opt.rows_of_column = model.jacobian_sparsity();
  auto rhs = [&model](double t, const Vec& y, Vec& dy) { model.rhs(t, y, dy); };

  Vec y = model.initial_state();

  // Steady phase: constant flow-weighted mean influent.
  if (P.steady_days > 0.0) {
    InfluentGenerator gen([&] {
      auto m = config.influent;
      m.horizon = P.dynamic_days;
      return m;
    }());
    model.set_constant_influent(gen.flow_weighted_mean());
    opt.h_max = config.solver.h_max_steady;
    RosenbrockSolver solver(rhs, opt);
    std::vector<double> marks;
    for (int d = 1; d <= static_cast<int>(P.steady_days); d += 10) marks.push_back(-P.steady_days + d);
    solver.integrate(-P.steady_days, 0.0, y, marks, [&](double t, const Vec&) {
      if (progress) progress("steady", t);
    });
    res.steady_stats = solver.stats();
    Vec dy;
    model.rhs(0.0, y, dy);
    res.steady_drift = dy.norm() / std::max(y.norm(), 1e-30);
    res.steady_converged = res.steady_drift <= 1e-6;
    if (!res.steady_converged) {
      res.warnings.push_back("steady state not converged after " + format_double(P.steady_days) +
                             " d: relative drift " + format_double(res.steady_drift) + " 1/d");
    }
    model.set_constant_influent(std::nullopt);
  }

  // Dynamic phase, recording the final window.
  const double t_rec0 = P.dynamic_days - P.record_days;
  const long n_rows = std::lround(P.record_days * P.samples_per_day);
  std::vector<double> out_times(n_rows);
  for (long k = 0; k < n_rows; ++k) out_times[k] = t_rec0 + static_cast<double>(k) / P.samples_per_day;

  Trajectory& tr = res.trajectory;
  tr.channels = model.channels();
  const std::size_t m = tr.channels.size();
  tr.columns.assign(m, std::vector<double>());
  for (auto& c : tr.columns) c.reserve(n_rows);
  tr.time.reserve(n_rows);
  std::vector<double> row(m);

  opt.h_max = config.solver.h_max;
  RosenbrockSolver solver(rhs, opt);
  long next_report = 0;
  solver.integrate(0.0, P.dynamic_days, y, out_times, [&](double t, const Vec& ys) {
    model.signals(t, ys, row.data());
    tr.time.push_back(static_cast<double>(tr.time.size()) / P.samples_per_day);
    for (std::size_t c = 0; c < m; ++c) tr.columns[c].push_back(row[c]);
    if (progress && static_cast<long>(tr.time.size()) >= next_report) {
      progress("record", t);
      next_report += 10 * P.samples_per_day;
    }
  });
  res.dynamic_stats = solver.stats();
  if (static_cast<long>(tr.rows()) != n_rows)
    fail(ErrorKind::Solver, "simulation recorded " + std::to_string(tr.rows()) + " of " + std::to_string(n_rows) +
                                " samples");

  res.srt = model.sludge_retention_time(y);
  res.balance = nitrogen_balance(tr);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  json tanks = json::array();
  for (const auto& t : config.tanks) tanks.push_back({{"name", t.name}, {"volume", t.volume}, {"aerated", t.aerated}});
  tr.meta = json{{"config_name", config.name},
                 {"config_hash", config.hash()},
                 {"influent_seed", config.influent.seed},
                 {"variant", std::string(bio::to_string(config.variant))},
                 {"gas_mode", std::string(to_string(config.gas_mode))},
                 {"tanks", tanks},
                 {"aerobic_volume", config.aerobic_volume()},
                 {"record_start_day", t_rec0},
                 {"samples_per_day", P.samples_per_day},
                 {"steady_converged", res.steady_converged},
                 {"steady_drift", res.steady_drift},
                 {"srt_days", res.srt},
                 {"solver_steady", to_json(res.steady_stats)},
                 {"solver_dynamic", to_json(res.dynamic_stats)},
                 {"balance", to_json(res.balance)},
                 {"warnings", res.warnings}};
  return res;
}

SimulationResult simulate(PlantConfig config, const InfluentModel& influent, const ProtocolSpec& protocol,
                          const ProgressFn& progress) {
  config.influent = influent;
  config.protocol = protocol;
  return simulate(config, progress);
}

}  // namespace n2olab::plant
