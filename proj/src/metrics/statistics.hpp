#pragma once

#include <optional>
#include <span>
#include <vector>

#include "common/json_util.hpp"

namespace n2olab::metrics {

using Series = std::span<const double>;

// Sum of absolute first differences; Error(Data) when n < 2.
double sad(Series x);
// Sum of squared second differences; Error(Data) when n < 3.
double ssd(Series x);

struct NormalizedDynamics {
  double sadn = 0.0;
  double ssdn = 0.0;
};
// Both divided by volume * duration; Error(Parameter) unless both are > 0.
NormalizedDynamics normalize_dynamics(double sad, double ssd, double volume, double duration);

double mean(Series x);
// Sample standard deviation (n - 1).
double stdev(Series x);

// Undefined (nullopt) when either series has zero variance. Error(Data) when
// n < 3, Error(Structural) on a length mismatch.
std::optional<double> pearson(Series x, Series y);
// Standard sample autocorrelation: lagged products over the full-series mean
// and variance. autocorr(x, 0) = 1.
std::optional<double> autocorr(Series x, std::size_t lag);
// Standardised third moment with population moments.
std::optional<double> skewness(Series x);

struct SignalSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double stdev = 0.0;
  std::optional<double> cv;  // %, only for mean > 0
  std::optional<double> skewness;
  double sad = 0.0;
  double ssd = 0.0;
  double sadn = 0.0;
  double ssdn = 0.0;
  std::vector<std::pair<std::size_t, std::optional<double>>> autocorrelation;  // (lag, r)
  double volume = 0.0;    // m3
  double duration = 0.0;  // d

  json to_json() const;
};

SignalSummary summarize(Series x, double volume, double duration, const std::vector<std::size_t>& lags = {});

}  // namespace n2olab::metrics
