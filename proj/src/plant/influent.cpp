#include "plant/influent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "common/error.hpp"

namespace n2olab::plant {

using namespace bio;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Portable uniform draw in [0,1) from the raw 64-bit engine output.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double weekly(double t) {
  // Day 0 is a Monday; a smooth dip centred on Saturday-Sunday.
  const double d = std::fmod(t, 7.0);
  return std::cos(kTwoPi * (d - 6.0) / 7.0);
}

bool is_nitrogen_pattern(std::size_t c) { return c == S_NH4 || c == S_NO2 || c == S_NO3; }

}  // namespace

InfluentModel InfluentModel::bsm2_like() {
  InfluentModel m;
  auto& c = m.concentration;
  c.fill(0.0);
  c[S_NH4] = 28.0;
  c[S_S] = 100.0;
  c[S_I] = 27.0;
  c[X_S] = 400.0;
  c[X_I] = 100.0;
  c[X_OHO] = 25.0;
  auto& n = m.n_content;
  n.fill(0.0);
  for (auto i : {S_NH4, S_NH2OH, S_NO2, S_NO3, S_NO, S_N2O, S_N2}) n[i] = 1.0;
  n[S_S] = 0.01;
  n[S_I] = 0.01;
  n[X_S] = 0.04;
  n[X_I] = 0.03;
  n[X_AOB] = n[X_NOB] = n[X_OHO] = 0.07;
  return m;
}

InfluentGenerator::InfluentGenerator(const InfluentModel& model) : m_(model) {
  if (!(m_.flow > 0.0)) fail(ErrorKind::Configuration, "influent: flow must be > 0");
  if (!(m_.infiltration_fraction >= 0.0 && m_.infiltration_fraction < 1.0))
    fail(ErrorKind::Configuration, "influent: infiltration_fraction must lie in [0, 1)");
  for (double a : {m_.flow_diurnal[0] + m_.flow_diurnal[1] + m_.weekly_amplitude +
                       m_.lowfreq_amplitude * std::sqrt(std::max(0, m_.lowfreq_terms)),
                   m_.load_diurnal[0] + m_.load_diurnal[1] + m_.weekly_amplitude +
                       m_.lowfreq_amplitude * std::sqrt(std::max(0, m_.lowfreq_terms))})
    if (a >= 0.95) fail(ErrorKind::Configuration, "influent: harmonic amplitudes could make flow or load negative");
  for (double v : m_.concentration)
    if (v < 0.0) fail(ErrorKind::Configuration, "influent: concentrations must be >= 0");

  std::mt19937_64 rng(m_.seed);
  auto make_lf = [&](std::vector<Harmonic>& out) {
    out.clear();
    for (int i = 0; i < m_.lowfreq_terms; ++i) {
      const double period = 3.0 * std::pow(20.0, uniform01(rng));  // 3..60 d, log-uniform
      const double phase = uniform01(rng) * period;
      // Scaled so the summed variance equals that of a single harmonic of lowfreq_amplitude.
      out.push_back({m_.lowfreq_amplitude / std::sqrt(static_cast<double>(m_.lowfreq_terms)) * std::sqrt(2.0) *
                         (0.5 + uniform01(rng)) / std::sqrt(1.0 + 1.0 / 12.0),
                     period, phase});
    }
  };
  make_lf(lf_flow_);
  make_lf(lf_load_n_);
  make_lf(lf_load_cod_);

  const double rate = m_.rain_events_per_year * m_.rain_frequency_factor / 365.0;
  rain_.clear();
  if (rate > 0.0) {
    double t = 0.0;
    for (;;) {
      t += -std::log(1.0 - uniform01(rng)) / rate;
      if (t >= m_.horizon) break;
      const double dur = m_.rain_duration_min + (m_.rain_duration_max - m_.rain_duration_min) * uniform01(rng);
      const double peak = m_.rain_peak_min + (m_.rain_peak_max - m_.rain_peak_min) * uniform01(rng);
      rain_.push_back({t, dur, peak});
    }
  }

  // Raised N load: extra ammonium carrying (factor - 1) of the base TKN.
  double base_tkn = 0.0;
  for (std::size_t i = 0; i < kNumComponents; ++i)
    if (i != S_NO2 && i != S_NO3 && i != S_NO && i != S_N2O && i != S_N2)
      base_tkn += m_.n_content[i] * m_.concentration[i];
  tkn_added_nh4_ = (m_.n_load_factor - 1.0) * base_tkn;
}

double InfluentGenerator::lowfreq(const std::vector<Harmonic>& h, double t) const {
  double s = 0.0;
  for (const auto& x : h) s += x.amplitude * std::sin(kTwoPi * (t - x.phase) / x.period);
  return s;
}

double InfluentGenerator::rain_flow(double t) const {
  double q = 0.0;
  // Events are sorted by start; the longest possible event bounds the search.
  auto it = std::lower_bound(rain_.begin(), rain_.end(), t - m_.rain_duration_max,
                             [](const RainEvent& e, double v) { return e.start < v; });
  for (; it != rain_.end() && it->start <= t; ++it) {
    const double s = (t - it->start) / it->duration;
    if (s >= 0.0 && s <= 1.0) {
      const double w = std::sin(std::numbers::pi * s);
      q += it->peak * m_.flow * w * w;
    }
  }
  return q;
}

InfluentSample InfluentGenerator::at(double t) const {
  const double day = t - std::floor(t);
  auto diurnal = [&](const double* a, const double* ph) {
    return a[0] * std::cos(kTwoPi * (day - ph[0])) + a[1] * std::cos(2.0 * kTwoPi * (day - ph[1]));
  };
  const double wk = -m_.weekly_amplitude * weekly(t);

  const double q_sewage_mean = m_.flow * (1.0 - m_.infiltration_fraction);
  const double q_sewage =
      q_sewage_mean * (1.0 + diurnal(m_.flow_diurnal, m_.flow_diurnal_phase) + wk + lowfreq(lf_flow_, t));
  const double q_inf = m_.flow * m_.infiltration_fraction;
  const double q_total = q_sewage + q_inf + rain_flow(t);

  const double load_shape_base = 1.0 + diurnal(m_.load_diurnal, m_.load_diurnal_phase) + wk;
  const double f_n = load_shape_base + lowfreq(lf_load_n_, t);
  const double f_cod = load_shape_base + lowfreq(lf_load_cod_, t);

  InfluentSample s;
  s.stream.Q = q_total;
  for (std::size_t i = 0; i < kNumComponents; ++i) {
    double base = m_.concentration[i];
    if (i == S_NH4) base += tkn_added_nh4_;
    const double f = is_nitrogen_pattern(i) ? f_n : f_cod;
    // Loads are defined against the mean dry-weather flow.
    s.stream.c[i] = base * m_.flow * f / q_total;
  }
  s.temperature = m_.temperature_mean + m_.temperature_offset +
                  m_.temperature_amplitude * std::cos(kTwoPi * (t - m_.temperature_peak_day) / 365.0) +
                  m_.temperature_diurnal * std::cos(kTwoPi * (day - 0.65));
  return s;
}

InfluentSample InfluentGenerator::flow_weighted_mean() const {
  const int n = static_cast<int>(std::lround(m_.horizon * 96.0));
  InfluentSample mean;
  double qsum = 0.0, tsum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto s = at(k / 96.0);
    qsum += s.stream.Q;
    tsum += s.temperature;
    for (std::size_t i = 0; i < kNumComponents; ++i) mean.stream.c[i] += s.stream.Q * s.stream.c[i];
  }
  for (auto& v : mean.stream.c) v /= qsum;
  mean.stream.Q = qsum / n;
  mean.temperature = tsum / n;
  return mean;
}

InfluentSample influent_at(double t, const InfluentModel& model) {
  if (t < 0.0) fail(ErrorKind::Parameter, "influent_at: t must be >= 0");
  return InfluentGenerator(model).at(t);
}

double tkn(const Concentrations& c, double i_NSS, double i_NSI, double i_NXS, double i_NXI, double i_NBM) {
  return c[S_NH4] + c[S_NH2OH] + i_NSS * c[S_S] + i_NSI * c[S_I] + i_NXS * c[X_S] + i_NXI * c[X_I] +
         i_NBM * (c[X_AOB] + c[X_NOB] + c[X_OHO]);
}

double total_cod(const Concentrations& c) {
  return c[S_S] + c[S_I] + c[X_S] + c[X_I] + c[X_AOB] + c[X_NOB] + c[X_OHO];
}

}  // namespace n2olab::plant
