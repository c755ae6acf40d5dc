#include <cmath>
#include <random>

#include "common/error.hpp"
#include "doctest.h"
#include "metrics/emissions.hpp"
#include "metrics/statistics.hpp"

using namespace n2olab;
using namespace n2olab::metrics;

namespace {

// Oracles in long double with textbook (uncentred) formulas.
long double o_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = x.size(), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += (long double)x[i] * x[i];
    syy += (long double)y[i] * y[i];
    sxy += (long double)x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

long double o_skew(const std::vector<double>& x) {
  long double n = x.size(), m = 0;
  for (double v : x) m += v;
  m /= n;
  long double m2 = 0, m3 = 0;
  for (double v : x) {
    m2 += std::pow((long double)v - m, 2) / n;
    m3 += std::pow((long double)v - m, 3) / n;
  }
  return m3 / std::pow(m2, 1.5L);
}

long double o_acf(const std::vector<double>& x, std::size_t lag) {
  long double m = 0;
  for (double v : x) m += v;
  m /= x.size();
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    den += ((long double)x[i] - m) * ((long double)x[i] - m);
    if (i + lag < x.size()) num += ((long double)x[i] - m) * ((long double)x[i + lag] - m);
  }
  return num / den;
}

std::vector<double> random_series(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(3, 400);
  std::lognormal_distribution<double> v(0.0, 1.0);
  std::vector<double> x(len(rng));
  for (auto& e : x) e = v(rng);
  return x;
}

}  // namespace

TEST_CASE("SAD and SSD definitions") {
  const std::vector<double> x{1, 3, 2};
  CHECK(sad(x) == 3.0);
  CHECK(ssd(x) == 9.0);
  const std::vector<double> c(10, 4.2);
  CHECK(sad(c) == 0.0);
  CHECK(ssd(c) == 0.0);
  std::vector<double> a(20);
  for (int i = 0; i < 20; ++i) a[i] = 3.0 - 0.5 * i;
  CHECK(ssd(a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sad(a) == doctest::Approx(0.5 * 19));
  CHECK_THROWS_AS(sad(std::vector<double>{1}), Error);
  CHECK_THROWS_AS(ssd(std::vector<double>{1, 2}), Error);
}

TEST_CASE("normalisation is linear in volume and duration") {
  const auto a = normalize_dynamics(100, 50, 10, 2);
  CHECK(a.sadn == 5.0);
  CHECK(a.ssdn == 2.5);
  CHECK(normalize_dynamics(100, 50, 20, 2).sadn == 2.5);
  CHECK(normalize_dynamics(0, 0, 20, 2).sadn == 0.0);
  CHECK_THROWS_AS(normalize_dynamics(1, 1, 0, 1), Error);
}

TEST_CASE("statistics agree with brute-force oracles on random series") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_series(rng);
    auto y = x;
    std::normal_distribution<double> e(0.0, 0.7);
    for (auto& v : y) v = 0.3 * v + e(rng);
    CHECK(std::abs(*pearson(x, y) - (double)o_pearson(x, y)) < 1e-10);
    CHECK(std::abs(*skewness(x) - (double)o_skew(x)) < 1e-10);
    for (std::size_t lag : {std::size_t{1}, std::size_t{2}, x.size() / 2})
      CHECK(std::abs(*autocorr(x, lag) - (double)o_acf(x, lag)) < 1e-10);
    long double s1 = 0, s2 = 0;
    for (std::size_t i = 1; i < x.size(); ++i) s1 += std::fabs((long double)x[i] - x[i - 1]);
    for (std::size_t i = 2; i < x.size(); ++i) s2 += std::pow((long double)x[i] - 2.0L * x[i - 1] + x[i - 2], 2);
    CHECK(std::abs(sad(x) - (double)s1) < 1e-10 * (1 + (double)s1));
    CHECK(std::abs(ssd(x) - (double)s2) < 1e-10 * (1 + (double)s2));
    CHECK(sad(x) > 0.0);
  }
}

TEST_CASE("pearson, autocorrelation and skewness special cases") {
  const std::vector<double> x{1, 4, 2, 8, 5, 7};
  std::vector<double> neg(x.size()), aff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    neg[i] = -x[i];
    aff[i] = 3.0 * x[i] + 11.0;
  }
  CHECK(*pearson(x, x) == doctest::Approx(1.0));
  CHECK(*pearson(x, neg) == doctest::Approx(-1.0));
  CHECK(*pearson(x, aff) == doctest::Approx(1.0));
  CHECK(*autocorr(x, 0) == 1.0);
  CHECK(*skewness(std::vector<double>{-2, -1, 0, 1, 2}) == doctest::Approx(0.0));
  CHECK(*skewness(std::vector<double>{0, 0, 0, 0, 10}) > 1.0);
  const std::vector<double> c(5, 1.0);
  CHECK_FALSE(pearson(std::vector<double>(6, 1.0), x).has_value());
  CHECK_FALSE(skewness(c).has_value());
  CHECK_FALSE(autocorr(c, 1).has_value());
  CHECK_THROWS_AS(pearson(x, c), Error);
}

TEST_CASE("summaries and the dynamics table") {
  std::vector<double> a(100), b(100);
  for (int i = 0; i < 100; ++i) {
    a[i] = 1000.0 + 300.0 * std::sin(i * 0.3);
    b[i] = a[i];
  }
  const auto s = summarize(a, 3000, 2.0, {1, 5});
  CHECK(s.cv.has_value());
  CHECK(*s.cv == doctest::Approx(100.0 * stdev(a) / mean(a)));
  CHECK(s.sadn == doctest::Approx(sad(a) / 6000.0));
  CHECK(s.autocorrelation.size() == 2);

  const auto t = dynamics_table({{"TOT", a, 6000}, {"x", b, 3000}, {"y", b, 3000}}, 2.0);
  for (const auto& c : t.columns) CHECK(*c.corr_to_site == doctest::Approx(1.0));
  CHECK(t.columns[1].mean_per_volume == doctest::Approx(2.0 * t.columns[0].mean_per_volume));
  const auto csv = t.to_csv();
  CHECK(csv.rfind("metric,unit,TOT,x,y\n", 0) == 0);
  CHECK(csv.find("Correlation to site-scale,-,1.000,1.000,1.000") != std::string::npos);
  CHECK_THROWS_AS(dynamics_table({{"TOT", a, 1}, {"x", std::vector<double>(5, 1.0), 1}}, 1.0), Error);
}

namespace {

plant::Trajectory constant_plant(std::size_t rows, double dt, double emit_g_per_d, double load_g_per_d) {
  plant::Trajectory t;
  for (std::size_t i = 0; i < rows; ++i) t.time.push_back(i * dt);
  auto col = [&](const std::string& n, double v) { t.add_column(n, "-", std::vector<double>(rows, v)); };
  col("influent.Q", load_g_per_d / 50.0);
  col("influent.TKN", 50.0);
  col("Gas.TOT", emit_g_per_d);
  col("Gas.NO_TOT", 0.1 * emit_g_per_d);
  col("settler.N2O", 0.0);
  json tanks = json::array();
  for (const char* n : {"rA1", "rA2"}) {
    col(std::string(n) + ".gas_N2O", emit_g_per_d / 2.0);
    col(std::string(n) + ".path.NN", 1.0);
    col(std::string(n) + ".path.ND", 2.0);
    col(std::string(n) + ".path.HD", 1.0);
    tanks.push_back({{"name", n}, {"volume", 1000.0}, {"aerated", true}});
  }
  t.meta["tanks"] = tanks;
  return t;
}

}  // namespace

TEST_CASE("emission factor on constant synthetic plants") {
  const auto t = constant_plant(97, 1.0 / 96.0, 1000.0, 100000.0);
  CHECK(emission_factor(t) == doctest::Approx(1.0));
  CHECK(emission_factor(constant_plant(10, 0.1, 0.0, 100000.0)) == 0.0);
  CHECK_THROWS_AS(emission_factor(constant_plant(10, 0.1, 1.0, 0.0)), Error);

  const auto r = emission_report(t);
  double sum = 0.0;
  for (const auto& l : r.locations) sum += l.share_pct;
  CHECK(sum == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(r.at("rA1").share_pct == doctest::Approx(50.0));
  CHECK(r.no_to_n2o == doctest::Approx(0.1));
  for (const auto& p : r.pathways) {
    CHECK(p.nn + p.nd + p.hd == doctest::Approx(100.0));
    CHECK(p.nd == doctest::Approx(50.0));
  }
}

TEST_CASE("emission factor is stable under grid refinement") {
  auto make = [](std::size_t per_day) {
    plant::Trajectory t;
    const std::size_t n = 30 * per_day + 1;
    std::vector<double> q(n), tkn(n, 40.0), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = double(i) / per_day;
      t.time.push_back(d);
      q[i] = 20000.0 * (1.0 + 0.3 * std::sin(2 * M_PI * d));
      g[i] = 8000.0 * (1.0 + 0.5 * std::sin(2 * M_PI * d + 1.0));
    }
    t.add_column("influent.Q", "-", q);
    t.add_column("influent.TKN", "-", tkn);
    t.add_column("Gas.TOT", "-", g);
    return t;
  };
  const double coarse = emission_factor(make(48)), fine = emission_factor(make(96));
  CHECK(std::abs(coarse - fine) / fine < 1e-3);
}
