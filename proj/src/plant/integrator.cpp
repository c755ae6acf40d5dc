#include "plant/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "common/error.hpp"

namespace n2olab::plant {

namespace {

// Kaps-Rentrop / Shampine coefficients (order 4, embedded order 3).
constexpr double gamma_ = 0.25;
constexpr double d1 = 0.25, d2 = -0.1043, d3 = 0.1035, d4 = -0.3620000000000023e-01;
constexpr double c2 = 0.386, c3 = 0.21, c4 = 0.63;
constexpr double c21 = -0.5668800000000000e+01, a21 = 0.1544000000000000e+01;
constexpr double c31 = -0.2430093356833875e+01, c32 = -0.2063599157091915e+00;
constexpr double a31 = 0.9466785280815826e+00, a32 = 0.2557011698983284e+00;
constexpr double c41 = -0.1073529058151375e+00, c42 = -0.9594562251023355e+01, c43 = -0.2047028614809616e+02;
constexpr double a41 = 0.3314825187068521e+01, a42 = 0.2896124015972201e+01, a43 = 0.9986419139977817e+00;
constexpr double c51 = 0.7496443313967647e+01, c52 = -0.1024680431464352e+02, c53 = -0.3399990352819905e+02,
                 c54 = 0.1170890893206160e+02;
constexpr double a51 = 0.1221224509226641e+01, a52 = 0.6019134481288629e+01, a53 = 0.1253708332932087e+02,
                 a54 = -0.6878860361058950e+00;
constexpr double c61 = 0.8083246795921522e+01, c62 = -0.7981132988064893e+01, c63 = -0.3152159432874371e+02,
                 c64 = 0.1631930543123136e+02, c65 = -0.6058818238834054e+01;
constexpr double e21 = 0.1012623508344586e+02, e22 = -0.7487995877610167e+01, e23 = -0.3480091861555747e+02,
                 e24 = -0.7992771707568823e+01, e25 = 0.1025137723295662e+01;
constexpr double e31 = -0.6762803392801253e+00, e32 = 0.6087714651680015e+01, e33 = 0.1643084320892478e+02,
                 e34 = 0.2476722511418386e+02, e35 = -0.6594389125716872e+01;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 6.0;

}  // namespace

RosenbrockSolver::RosenbrockSolver(Rhs rhs, SolverOptions options) : rhs_(std::move(rhs)), opt_(std::move(options)) {
  if (!(opt_.rtol > 0.0)) fail(ErrorKind::Parameter, "solver: rtol must be > 0");
  h_ = opt_.h_init;
}

void RosenbrockSolver::build_groups(int n) {
  groups_.clear();
  if (static_cast<int>(opt_.rows_of_column.size()) != n) {
    for (int j = 0; j < n; ++j) groups_.push_back({j});
    return;
  }
  // Greedy colouring: columns sharing no row can be perturbed together.
  std::vector<std::vector<char>> used;
  for (int j = 0; j < n; ++j) {
    const auto& rows = opt_.rows_of_column[j];
    bool placed = false;
    for (std::size_t g = 0; g < groups_.size() && !placed; ++g) {
      bool clash = false;
      for (int r : rows)
        if (used[g][r]) {
          clash = true;
          break;
        }
      if (!clash) {
        groups_[g].push_back(j);
        for (int r : rows) used[g][r] = 1;
        placed = true;
      }
    }
    if (!placed) {
      groups_.push_back({j});
      used.emplace_back(n, 0);
      for (int r : rows) used.back()[r] = 1;
    }
  }
}

void RosenbrockSolver::jacobian(double t, const Vec& y, const Vec& f0) {
  const int n = static_cast<int>(y.size());
  const double sq = std::sqrt(std::numeric_limits<double>::epsilon());
  J_.setZero(n, n);
  ypert_ = y;
  const bool sparse = static_cast<int>(opt_.rows_of_column.size()) == n;
  std::vector<double> delta(n);
  for (const auto& group : groups_) {
    for (int j : group) {
      const double floor = opt_.atol.size() == n ? opt_.atol[j] / opt_.rtol : 1e-6;
      double d = sq * std::max(std::abs(y[j]), floor);
      // Exact representable increment.
      volatile double tmp = y[j] + d;
      d = tmp - y[j];
      delta[j] = d;
      ypert_[j] = y[j] + d;
    }
    rhs_(t, ypert_, ftmp_);
    ++stats_.rhs_evaluations;
    for (int j : group) {
      if (sparse) {
        for (int r : opt_.rows_of_column[j]) J_(r, j) = (ftmp_[r] - f0[r]) / delta[j];
      } else {
        J_.col(j) = (ftmp_ - f0) / delta[j];
      }
      ypert_[j] = y[j];
    }
  }
  // Time derivative for the non-autonomous terms.
  const double dt = sq * std::max(std::abs(t), 1.0);
  rhs_(t + dt, y, ftmp_);
  ++stats_.rhs_evaluations;
  dfdt_ = (ftmp_ - f0) / dt;
  ++stats_.jacobians;
}

double RosenbrockSolver::error_norm(const Vec& err, const Vec& y0, const Vec& y1) const {
  const int n = static_cast<int>(err.size());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = opt_.atol.size() == n ? opt_.atol[i] : 1e-8;
    const double sc = a + opt_.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double e = err[i] / sc;
    s += e * e;
  }
  return std::sqrt(s / n);
}

void RosenbrockSolver::integrate(double t0, double t1, Vec& y, const std::vector<double>& output_times,
                                 const Observer& observer) {
  const int n = static_cast<int>(y.size());
  if (opt_.atol.size() != 0 && opt_.atol.size() != n) fail(ErrorKind::Structural, "solver: atol size mismatch");
  if (!opt_.nonnegative.empty() && static_cast<int>(opt_.nonnegative.size()) != n)
    fail(ErrorKind::Structural, "solver: nonnegative mask size mismatch");
  if (groups_.empty() || static_cast<int>(opt_.rows_of_column.size()) != n) build_groups(n);
  for (auto* v : {&f0_, &fn_, &xtmp_, &g1_, &g2_, &g3_, &g4_, &g5_, &err_, &ynew_, &cont3_, &cont4_, &ftmp_})
    v->resize(n);

  auto out_it = std::lower_bound(output_times.begin(), output_times.end(), t0);
  if (out_it != output_times.end() && *out_it == t0) {
    if (observer) observer(t0, y);
    ++out_it;
  }

  double t = t0;
  h_ = std::clamp(h_, opt_.h_min, opt_.h_max);
  bool last_rejected = false;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd W(n, n);

  while (t < t1) {
    if (stats_.steps + stats_.rejected_error + stats_.rejected_negative > opt_.max_steps)
      fail(ErrorKind::Solver, "solver: step budget exhausted at t = " + std::to_string(t));
    double h = std::min(h_, t1 - t);

    rhs_(t, y, f0_);
    ++stats_.rhs_evaluations;
    if (!f0_.allFinite()) fail(ErrorKind::Solver, "solver: non-finite derivative at t = " + std::to_string(t));
    jacobian(t, y, f0_);

    for (;;) {
      const bool final_step = (t + h >= t1);
      W = -J_;
      W.diagonal().array() += 1.0 / (gamma_ * h);
      lu.compute(W);

      g1_ = lu.solve(f0_ + h * d1 * dfdt_);
      xtmp_ = y + a21 * g1_;
      rhs_(t + c2 * h, xtmp_, fn_);
      g2_ = lu.solve(fn_ + h * d2 * dfdt_ + c21 * g1_ / h);
      xtmp_ = y + a31 * g1_ + a32 * g2_;
      rhs_(t + c3 * h, xtmp_, fn_);
      g3_ = lu.solve(fn_ + h * d3 * dfdt_ + (c31 * g1_ + c32 * g2_) / h);
      xtmp_ = y + a41 * g1_ + a42 * g2_ + a43 * g3_;
      rhs_(t + c4 * h, xtmp_, fn_);
      g4_ = lu.solve(fn_ + h * d4 * dfdt_ + (c41 * g1_ + c42 * g2_ + c43 * g3_) / h);
      xtmp_ = y + a51 * g1_ + a52 * g2_ + a53 * g3_ + a54 * g4_;
      rhs_(t + h, xtmp_, fn_);
      g5_ = lu.solve(fn_ + (c51 * g1_ + c52 * g2_ + c53 * g3_ + c54 * g4_) / h);
      xtmp_ += g5_;
      rhs_(t + h, xtmp_, fn_);
      err_ = lu.solve(fn_ + (c61 * g1_ + c62 * g2_ + c63 * g3_ + c64 * g4_ + c65 * g5_) / h);
      ynew_ = xtmp_ + err_;
      stats_.rhs_evaluations += 5;

      double e = ynew_.allFinite() ? error_norm(err_, y, ynew_) : std::numeric_limits<double>::infinity();
      bool negative = false;
      if (e <= 1.0 && !opt_.nonnegative.empty()) {
        for (int i = 0; i < n; ++i)
          if (opt_.nonnegative[i] && ynew_[i] < -opt_.negative_tolerance) {
            negative = true;
            break;
          }
      }

      if (e <= 1.0 && !negative) {
        cont3_ = e21 * g1_ + e22 * g2_ + e23 * g3_ + e24 * g4_ + e25 * g5_;
        cont4_ = e31 * g1_ + e32 * g2_ + e33 * g3_ + e34 * g4_ + e35 * g5_;
        const double t_new = final_step ? t1 : t + h;
        while (out_it != output_times.end() && *out_it <= t_new) {
          if (*out_it > t) {
            const double s = (*out_it - t) / h;
            const double s1 = 1.0 - s;
            xtmp_ = y * s1 + s * (ynew_ + s1 * (cont3_ + s * cont4_));
            if (observer) observer(*out_it, xtmp_);
          }
          ++out_it;
        }
        y = ynew_;
        t = t_new;
        ++stats_.steps;
        stats_.h_last = h;
        stats_.min_h = stats_.steps == 1 ? h : std::min(stats_.min_h, h);
        double fac = std::clamp(std::pow(std::max(e, 1e-12), 0.25) / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
        if (last_rejected) fac = std::max(fac, 1.0);
        // A truncated final step says nothing about the natural step size.
        if (!final_step) h_ = std::min(h / fac, opt_.h_max);
        last_rejected = false;
        break;
      }

      if (negative) {
        ++stats_.rejected_negative;
        h *= 0.5;
      } else {
        ++stats_.rejected_error;
        const double fac = std::isfinite(e) ? std::clamp(std::pow(e, 0.25) / kSafety, 1.0, 1.0 / kFacMin) : 10.0;
        h /= fac;
      }
      last_rejected = true;
      if (h < opt_.h_min) {
        std::ostringstream os;
        os << "solver: step size underflow at t = " << t << " (h = " << h << ", "
           << (negative ? "negative state" : "error test") << ")";
        fail(ErrorKind::Solver, os.str());
      }
      if (stats_.rejected_error + stats_.rejected_negative > opt_.max_steps)
        fail(ErrorKind::Solver, "solver: rejection budget exhausted at t = " + std::to_string(t));
    }
  }
}

}  // namespace n2olab::plant
