#pragma once

#include <cstdint>
#include <vector>

#include "plant/settler.hpp"

namespace n2olab::plant {

// Parameters of the statistical dynamic-influent surrogate. Concentrations
// refer to dry-weather flow; rain and infiltration dilute without adding load.
struct InfluentModel {
  double flow = 20648.0;               // m3/d, mean dry-weather flow incl. infiltration
  double infiltration_fraction = 0.1;  // share of `flow` that is clean infiltration water
  bio::Concentrations concentration{};
  bio::Concentrations n_content{};  // gN per unit of each component, for TKN

  // Diurnal harmonics (relative amplitude of the 24 h and 12 h terms; phase in d).
  double flow_diurnal[2] = {0.22, 0.07};
  double flow_diurnal_phase[2] = {0.58, 0.35};
  double load_diurnal[2] = {0.30, 0.08};
  double load_diurnal_phase[2] = {0.62, 0.40};
  double weekly_amplitude = 0.07;  // load and flow drop at weekends
  double lowfreq_amplitude = 0.05;
  int lowfreq_terms = 6;

  double temperature_mean = 15.0;
  double temperature_amplitude = 5.0;
  double temperature_peak_day = 210.0;
  double temperature_diurnal = 0.4;

  double rain_events_per_year = 25.0;
  double rain_duration_min = 0.3, rain_duration_max = 1.5;  // d
  double rain_peak_min = 0.4, rain_peak_max = 2.0;          // extra flow / flow

  // Disturbance knobs.
  double n_load_factor = 1.0;  // multiplies the TKN load (added as NH4)
  double temperature_offset = 0.0;
  double rain_frequency_factor = 1.0;

  std::uint64_t seed = 1;
  double horizon = 609.0;  // d, length of the generated series

  static InfluentModel bsm2_like();
};

struct InfluentSample {
  Stream stream;
  double temperature = 15.0;
};

struct RainEvent {
  double start, duration, peak;
};

// Realization of an InfluentModel: random draws are taken once at
// construction, evaluation is then a pure function of t.
class InfluentGenerator {
 public:
  explicit InfluentGenerator(const InfluentModel& model);

  InfluentSample at(double t) const;
  double rain_flow(double t) const;
  const std::vector<RainEvent>& rain_events() const { return rain_; }
  const InfluentModel& model() const { return m_; }

  // Flow-weighted mean over [0, horizon] on a 15-min grid.
  InfluentSample flow_weighted_mean() const;

 private:
  struct Harmonic {
    double amplitude, period, phase;
  };
  double lowfreq(const std::vector<Harmonic>& h, double t) const;

  InfluentModel m_;
  std::vector<RainEvent> rain_;
  std::vector<Harmonic> lf_flow_, lf_load_n_, lf_load_cod_;
  double tkn_added_nh4_ = 0.0;
};

InfluentSample influent_at(double t, const InfluentModel& model);

// Total Kjeldahl N of a raw stream (gN/m3) given organic N contents.
double tkn(const bio::Concentrations& c, double i_NSS, double i_NSI, double i_NXS, double i_NXI, double i_NBM);
double total_cod(const bio::Concentrations& c);

}  // namespace n2olab::plant
