#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace n2olab::plant {

using Vec = Eigen::VectorXd;

struct SolverOptions {
  double rtol = 1e-5;
  Vec atol;                   // per component; empty -> 1e-8 everywhere
  double h_init = 1e-4;       // d
  double h_max = 0.05;        // d
  double h_min = 1e-12;       // d
  long max_steps = 50'000'000;
  double negative_tolerance = 1e-9;   // reject steps with y_i < -tol for masked components
  std::vector<bool> nonnegative;      // mask; empty -> no check
  // rows_of_column[j]: rows of f that may depend on y_j (empty -> dense).
  std::vector<std::vector<int>> rows_of_column;
};

struct SolverStats {
  long steps = 0;
  long rejected_error = 0;
  long rejected_negative = 0;
  long rhs_evaluations = 0;
  long jacobians = 0;
  double h_last = 0.0;
  double min_h = 0.0;
};

// Linearly implicit (Rosenbrock) 4th order stepper with embedded 3rd order
// error estimate and continuous output; coefficients of Shampine's/Hairer's
// RODAS-type scheme as used by odeint's rosenbrock4.
class RosenbrockSolver {
 public:
  using Rhs = std::function<void(double t, const Vec& y, Vec& dydt)>;
  using Observer = std::function<void(double t, const Vec& y)>;

  RosenbrockSolver(Rhs rhs, SolverOptions options);

  // Integrates y from t0 to t1. `observer` is called at every time in
  // `output_times` that lies in (t0, t1] (and at t0 if listed), in order,
  // with the interpolated state. Throws Error(Solver) on failure.
  void integrate(double t0, double t1, Vec& y, const std::vector<double>& output_times, const Observer& observer);

  const SolverStats& stats() const { return stats_; }
  double suggested_step() const { return h_; }

 private:
  void jacobian(double t, const Vec& y, const Vec& f0);
  double error_norm(const Vec& err, const Vec& y0, const Vec& y1) const;
  void build_groups(int n);

  Rhs rhs_;
  SolverOptions opt_;
  SolverStats stats_;
  double h_ = 0.0;

  Eigen::MatrixXd J_;
  Vec dfdt_;
  std::vector<std::vector<int>> groups_;
  // work vectors
  Vec f0_, fn_, xtmp_, g1_, g2_, g3_, g4_, g5_, err_, ynew_, cont3_, cont4_, ftmp_, ypert_;
};

}  // namespace n2olab::plant
