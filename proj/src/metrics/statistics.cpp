#include "metrics/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace n2olab::metrics {

namespace {

void need(Series x, std::size_t n, const char* what) {
  if (x.size() < n)
    fail(ErrorKind::Data, std::string(what) + ": need at least " + std::to_string(n) + " samples, got " +
                              std::to_string(x.size()));
}

// Centred sums in one place so every statistic shares the same rounding.
struct Moments {
  double mean = 0.0, m2 = 0.0, m3 = 0.0;
};

Moments moments(Series x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) {
    const double d = v - m.mean;
    m.m2 += d * d;
    m.m3 += d * d * d;
  }
  return m;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

double sad(Series x) {
  need(x, 2, "sad");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += std::abs(x[i] - x[i - 1]);
  return s;
}

double ssd(Series x) {
  need(x, 3, "ssd");
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double d2 = x[i + 1] - 2.0 * x[i] + x[i - 1];
    s += d2 * d2;
  }
  return s;
}

NormalizedDynamics normalize_dynamics(double sad, double ssd, double volume, double duration) {
  if (!(volume > 0.0) || !(duration > 0.0))
    fail(ErrorKind::Parameter, "normalize_dynamics: volume and duration must be positive");
  return {sad / (volume * duration), ssd / (volume * duration)};
}

double mean(Series x) {
  need(x, 1, "mean");
  return moments(x).mean;
}

double stdev(Series x) {
  need(x, 2, "stdev");
  return std::sqrt(moments(x).m2 / static_cast<double>(x.size() - 1));
}

std::optional<double> pearson(Series x, Series y) {
  if (x.size() != y.size()) fail(ErrorKind::Structural, "pearson: series lengths differ");
  need(x, 3, "pearson");
  const double mx = moments(x).mean, my = moments(y).mean;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> autocorr(Series x, std::size_t lag) {
  need(x, 3, "autocorr");
  if (lag >= x.size()) fail(ErrorKind::Data, "autocorr: lag must be shorter than the series");
  const auto m = moments(x);
  if (m.m2 == 0.0) return std::nullopt;
  if (lag == 0) return 1.0;
  double s = 0.0;
  for (std::size_t i = lag; i < x.size(); ++i) s += (x[i] - m.mean) * (x[i - lag] - m.mean);
  return s / m.m2;
}

std::optional<double> skewness(Series x) {
  need(x, 3, "skewness");
  const auto m = moments(x);
  if (m.m2 == 0.0) return std::nullopt;
  const double n = static_cast<double>(x.size());
  return (m.m3 / n) / std::pow(m.m2 / n, 1.5);
}

SignalSummary summarize(Series x, double volume, double duration, const std::vector<std::size_t>& lags) {
  need(x, 3, "summarize");
  SignalSummary s;
  s.n = x.size();
  const auto m = moments(x);
  s.mean = m.mean;
  s.stdev = std::sqrt(m.m2 / static_cast<double>(x.size() - 1));
  if (s.mean > 0.0) s.cv = 100.0 * s.stdev / s.mean;
  s.skewness = skewness(x);
  s.sad = sad(x);
  s.ssd = ssd(x);
  const auto nd = normalize_dynamics(s.sad, s.ssd, volume, duration);
  s.sadn = nd.sadn;
  s.ssdn = nd.ssdn;
  for (auto lag : lags) s.autocorrelation.emplace_back(lag, autocorr(x, lag));
  s.volume = volume;
  s.duration = duration;
  return s;
}

json SignalSummary::to_json() const {
  json ac = json::array();
  for (const auto& [lag, r] : autocorrelation) ac.push_back({{"lag", lag}, {"r", opt(r)}});
  return {{"n", n},           {"mean", mean},         {"stdev", stdev},   {"cv_pct", opt(cv)},
          {"skewness", opt(skewness)}, {"sad", sad},  {"ssd", ssd},       {"sadn", sadn},
          {"ssdn", ssdn},     {"autocorrelation", ac}, {"volume_m3", volume}, {"duration_d", duration}};
}

}  // namespace n2olab::metrics
