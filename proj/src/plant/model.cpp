#include "plant/model.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace n2olab::plant {

using namespace bio;

PlantModel::PlantModel(const PlantConfig& config)
    : config_(config),
      k_(KineticConstants::from(config.params)),
      stoich_(StoichiometryMatrix::build(k_)),
      gen_([&] {
        auto m = config.influent;
        m.horizon = config.protocol.dynamic_days;
        return m;
      }()) {
  config_.validate();
  q_mean_ = gen_.flow_weighted_mean().stream.Q;
  for (std::size_t j = 0; j < config_.tanks.size(); ++j)
    if (config_.tanks[j].aerated && first_aerated_ < 0) first_aerated_ = static_cast<int>(j);
  build_channels();
}

InfluentSample PlantModel::influent(double t) const {
  if (constant_) return *constant_;
  return gen_.at(std::max(t, 0.0));
}

PlantModel::Flows PlantModel::flows(double Q_in) const {
  Flows f;
  f.Q_in = Q_in;
  f.Q_ps = config_.primary.sludge_flow_fraction * Q_in;
  f.Q_p = Q_in - f.Q_ps;
  f.Q_a = config_.flows.internal_recycle_factor * q_mean_;
  f.Q_r = config_.flows.return_sludge_factor * q_mean_;
  f.Q_w = config_.flows.wastage;
  f.Q_t = f.Q_p + f.Q_a + f.Q_r;
  f.Q_f = f.Q_p + f.Q_r;
  f.Q_u = f.Q_r + f.Q_w;
  f.Q_e = f.Q_f - f.Q_u;
  if (!(f.Q_e > 0.0)) fail(ErrorKind::Solver, "plant: clarified flow below wastage flow");
  return f;
}

double PlantModel::kla_unsat(int tank, const Vec& y) const {
  const auto& t = config_.tanks[tank];
  const auto& a = config_.aeration;
  const double e = t.do_setpoint - y[index(tank, S_O2)];
  return a.kla_initial + a.K * e + y[index(tank, kPI)];
}

double PlantModel::kla_o2(int tank, const Vec& y) const {
  const auto& t = config_.tanks[tank];
  if (!t.aerated) return config_.aeration.kla_anoxic;
  if (t.kla_fixed) return *t.kla_fixed;
  return std::clamp(kla_unsat(tank, y), 0.0, config_.aeration.kla_max);
}

double PlantModel::n_content(const Concentrations& c) const {
  double s = 0.0;
  for (std::size_t i = 0; i < kNumComponents; ++i) s += stoich_.n_weight[i] * c[i];
  return s;
}

void PlantModel::rhs(double t, const Vec& y, Vec& dy) const {
  const int n = static_cast<int>(config_.tanks.size());
  dy.setZero(size());
  const InfluentSample inf = influent(t);
  const Flows F = flows(inf.stream.Q);
  const double removal = config_.primary.particulate_removal;
  const double capture = config_.secondary.capture;
  const auto& aer = config_.aeration;
  const auto& hs = config_.headspace;
  const bool dynamic_gas = config_.gas_mode == GasTransferMode::DynamicHeadspace;
  const double o2_sat = aer.o2_saturation_factor * o2_saturation(inf.temperature);
  const double sq_n2o = std::sqrt(aer.diffusivity_N2O), sq_no = std::sqrt(aer.diffusivity_NO),
               sq_n2 = std::sqrt(aer.diffusivity_N2);

  const int last = n - 1;
  ComponentState st;
  st.temperature = inf.temperature;

  for (int j = 0; j < n; ++j) {
    const auto& tank = config_.tanks[j];
    const double V = tank.volume;
    const int b = index(j, 0);
    for (std::size_t i = 0; i < kNumComponents; ++i) st.c[i] = y[b + i];

    for (std::size_t i = 0; i < kNumComponents; ++i) {
      double in;
      if (j == 0) {
        const double c_last = y[index(last, i)];
        const double c_p = is_particulate(i) ? (1.0 - removal) * F.Q_in * inf.stream.c[i] / F.Q_p : inf.stream.c[i];
        const double c_u = is_particulate(i) ? capture * F.Q_f * c_last / F.Q_u : c_last;
        in = F.Q_p * c_p + F.Q_a * c_last + F.Q_r * c_u;
      } else {
        in = F.Q_t * y[index(j - 1, i)];
      }
      dy[b + i] = (in - F.Q_t * st.c[i]) / V;
    }

    const auto r = process_rates(st, k_, config_.variant);
    const auto bio_d = derivative(r, stoich_);
    for (std::size_t i = 0; i < kNumComponents; ++i) dy[b + i] += bio_d[i];

    const double kla = kla_o2(j, y);
    dy[b + S_O2] += kla * (o2_sat - st.c[S_O2]);

    const double q_gas = hs.gas_flow_ratio * kla * V;
    const double v_gas = hs.volume_fraction * V;
    auto exchange = [&](int comp, int gas, double kla_s, double henry) {
      const double c_g = y[b + gas];
      const double flux = kla_s * (st.c[comp] - (dynamic_gas ? c_g / henry : 0.0));
      dy[b + comp] -= flux;
      if (dynamic_gas) dy[b + gas] = (flux * V - q_gas * c_g) / v_gas;
    };
    exchange(S_N2O, kGasN2O, kla * sq_n2o, hs.henry_N2O);
    exchange(S_NO, kGasNO, kla * sq_no, hs.henry_NO);
    exchange(S_N2, kGasN2, kla * sq_n2, hs.henry_N2);

    if (tank.aerated && !tank.kla_fixed) {
      const double u = kla_unsat(j, y);
      const double us = std::clamp(u, 0.0, aer.kla_max);
      const double e = tank.do_setpoint - st.c[S_O2];
      dy[b + kPI] = aer.K / aer.Ti * e + (us - u) / aer.Tt;
    }
  }
}

Vec PlantModel::initial_state() const {
  const int n = static_cast<int>(config_.tanks.size());
  Vec y = Vec::Zero(size());
  for (int j = 0; j < n; ++j) {
    const bool aer = config_.tanks[j].aerated;
    auto set = [&](int c, double v) { y[index(j, c)] = v; };
    set(S_O2, aer ? config_.tanks[j].do_setpoint : 0.05);
    set(S_NH4, aer ? 3.0 : 8.0);
    set(S_NH2OH, 0.005);
    set(S_NO2, 0.3);
    set(S_NO3, aer ? 8.0 : 3.0);
    set(S_NO, 1e-4);
    set(S_N2O, 0.01);
    set(S_N2, 10.0);
    set(S_S, 2.0);
    set(S_I, 30.0);
    set(X_S, 60.0);
    set(X_I, 1500.0);
    set(X_AOB, 100.0);
    set(X_NOB, 40.0);
    set(X_OHO, 1600.0);
  }
  return y;
}

Vec PlantModel::absolute_tolerances() const {
  static constexpr double comp[kNumComponents] = {1e-4, 1e-4, 1e-6, 1e-5, 1e-4, 1e-7, 1e-6, 1e-4,
                                                  1e-4, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3};
  Vec a(size());
  for (int j = 0; j < static_cast<int>(config_.tanks.size()); ++j) {
    for (std::size_t i = 0; i < kNumComponents; ++i) a[index(j, i)] = comp[i];
    a[index(j, kGasN2O)] = 1e-6;
    a[index(j, kGasNO)] = 1e-6;
    a[index(j, kGasN2)] = 1e-4;
    a[index(j, kPI)] = 1e-2;
  }
  return a * config_.solver.atol_scale;
}

std::vector<bool> PlantModel::nonnegative_mask() const {
  std::vector<bool> m(size(), true);
  for (int j = 0; j < static_cast<int>(config_.tanks.size()); ++j) m[index(j, kPI)] = false;
  return m;
}

std::vector<std::vector<int>> PlantModel::jacobian_sparsity() const {
  const int n = static_cast<int>(config_.tanks.size());
  std::vector<std::vector<int>> rows(size());
  for (int j = 0; j < n; ++j) {
    std::vector<int> r;
    auto add_tank = [&](int k) {
      for (int l = 0; l < kLocal; ++l) r.push_back(index(k, l));
    };
    add_tank(j);
    if (j + 1 < n) add_tank(j + 1);
    if (j == n - 1 && n > 1) add_tank(0);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    for (int l = 0; l < kLocal; ++l) rows[index(j, l)] = r;
  }
  return rows;
}

void PlantModel::build_channels() {
  channels_.clear();
  for (const auto& t : config_.tanks) {
    for (std::size_t i = 0; i < kNumComponents; ++i)
      channels_.push_back({t.name + "." + std::string(kComponentNames[i]), std::string(kComponentUnits[i])});
    channels_.push_back({t.name + ".TSS", "gTSS/m3"});
    channels_.push_back({t.name + ".kLa", "1/d"});
    channels_.push_back({t.name + ".gas_N2O", "gN/d"});
    channels_.push_back({t.name + ".gas_NO", "gN/d"});
    channels_.push_back({t.name + ".gas_N2", "gN/d"});
    for (std::size_t p = 0; p < kNumProcesses; ++p)
      channels_.push_back({t.name + ".rate." + std::string(kProcessNames[p]), "g/m3/d"});
    channels_.push_back({t.name + ".path.NN", "gN/m3/d"});
    channels_.push_back({t.name + ".path.ND", "gN/m3/d"});
    channels_.push_back({t.name + ".path.HD", "gN/m3/d"});
    channels_.push_back({t.name + ".path.NOS", "gN/m3/d"});
  }
  for (auto [n, u] : std::initializer_list<std::pair<const char*, const char*>>{
           {"influent.Q", "m3/d"},
           {"influent.T", "degC"},
           {"influent.TKN", "gN/m3"},
           {"influent.COD", "gCOD/m3"},
           {"influent.S_NH4", "gN/m3"},
           {"influent.TSS", "gTSS/m3"},
           {"effluent.Q", "m3/d"},
           {"effluent.S_NH4", "gN/m3"},
           {"effluent.S_NO2", "gN/m3"},
           {"effluent.S_NO3", "gN/m3"},
           {"effluent.TN", "gN/m3"},
           {"effluent.COD", "gCOD/m3"},
           {"effluent.TSS", "gTSS/m3"},
           {"settler.N2O", "gN/d"},
           {"Gas.TOT", "gN/d"},
           {"Gas.NO_TOT", "gN/d"},
           {"balance.N_in", "gN/d"},
           {"balance.N_effluent", "gN/d"},
           {"balance.N_primary_sludge", "gN/d"},
           {"balance.N_wastage", "gN/d"},
           {"balance.N_gas", "gN/d"},
           {"balance.N_inventory", "gN"}})
    channels_.push_back({n, u});
}

int PlantModel::channel(const std::string& name) const {
  for (std::size_t i = 0; i < channels_.size(); ++i)
    if (channels_[i].name == name) return static_cast<int>(i);
  return -1;
}

double PlantModel::nitrogen_inventory(const Vec& y) const {
  double s = 0.0;
  const bool dynamic_gas = config_.gas_mode == GasTransferMode::DynamicHeadspace;
  for (int j = 0; j < static_cast<int>(config_.tanks.size()); ++j) {
    const double V = config_.tanks[j].volume;
    for (std::size_t i = 0; i < kNumComponents; ++i) s += V * stoich_.n_weight[i] * y[index(j, i)];
    if (dynamic_gas) {
      const double vg = config_.headspace.volume_fraction * V;
      s += vg * (y[index(j, kGasN2O)] + y[index(j, kGasNO)] + y[index(j, kGasN2)]);
    }
  }
  return s;
}

double PlantModel::sludge_retention_time(const Vec& y) const {
  const int n = static_cast<int>(config_.tanks.size());
  const Flows F = flows(q_mean_);
  double mass = 0.0;
  for (int j = 0; j < n; ++j)
    for (std::size_t i = X_S; i < kNumComponents; ++i) mass += config_.tanks[j].volume * y[index(j, i)];
  double xf = 0.0;
  for (std::size_t i = X_S; i < kNumComponents; ++i) xf += y[index(n - 1, i)];
  const double out = xf * F.Q_f;  // all of it leaves via wastage or effluent, except the return share
  const double lost = out * (config_.secondary.capture * F.Q_w / F.Q_u + (1.0 - config_.secondary.capture));
  return lost > 0.0 ? mass / lost : INFINITY;
}

void PlantModel::signals(double t, const Vec& y, double* out) const {
  const int n = static_cast<int>(config_.tanks.size());
  const InfluentSample inf = influent(t);
  const Flows F = flows(inf.stream.Q);
  const bool dynamic_gas = config_.gas_mode == GasTransferMode::DynamicHeadspace;
  const auto& aer = config_.aeration;
  const auto& hs = config_.headspace;
  const double sq_n2o = std::sqrt(aer.diffusivity_N2O), sq_no = std::sqrt(aer.diffusivity_NO),
               sq_n2 = std::sqrt(aer.diffusivity_N2);
  ComponentState st;
  st.temperature = inf.temperature;
  double* o = out;
  double gas_n2o_total = 0.0, gas_no_total = 0.0, gas_n_total = 0.0;

  for (int j = 0; j < n; ++j) {
    const double V = config_.tanks[j].volume;
    for (std::size_t i = 0; i < kNumComponents; ++i) st.c[i] = y[index(j, i)];
    for (std::size_t i = 0; i < kNumComponents; ++i) *o++ = st.c[i];
    *o++ = st.tss(k_.i_TSS);
    const double kla = kla_o2(j, y);
    *o++ = kla;
    const double q_gas = hs.gas_flow_ratio * kla * V;
    auto emission = [&](int comp, int gas, double kla_s) {
      if (dynamic_gas) return q_gas * y[index(j, gas)];
      return kla_s * st.c[comp] * V;
    };
    const double e_n2o = emission(S_N2O, kGasN2O, kla * sq_n2o);
    const double e_no = emission(S_NO, kGasNO, kla * sq_no);
    const double e_n2 = emission(S_N2, kGasN2, kla * sq_n2);
    *o++ = e_n2o;
    *o++ = e_no;
    *o++ = e_n2;
    gas_n2o_total += e_n2o;
    gas_no_total += e_no;
    gas_n_total += e_n2o + e_no + e_n2;
    const auto r = process_rates(st, k_, config_.variant);
    for (std::size_t p = 0; p < kNumProcesses; ++p) *o++ = r[p];
    const auto a = pathway_attribution(r, stoich_);
    *o++ = a.nn;
    *o++ = a.nd;
    *o++ = a.hd_production;
    *o++ = a.hd_consumption;
  }

  // Clarifiers
  const int last = n - 1;
  Concentrations c_last{}, c_u{}, c_e{}, c_ps{};
  const double capture = config_.secondary.capture;
  for (std::size_t i = 0; i < kNumComponents; ++i) {
    c_last[i] = y[index(last, i)];
    if (is_particulate(i)) {
      c_u[i] = capture * F.Q_f * c_last[i] / F.Q_u;
      c_e[i] = (1.0 - capture) * F.Q_f * c_last[i] / F.Q_e;
      c_ps[i] = F.Q_ps > 0.0 ? config_.primary.particulate_removal * F.Q_in * inf.stream.c[i] / F.Q_ps : 0.0;
    } else {
      c_u[i] = c_e[i] = c_last[i];
      c_ps[i] = inf.stream.c[i];
    }
  }
  const double settler_n2o = F.Q_e * c_e[S_N2O];
  auto tss = [&](const Concentrations& c) {
    return k_.i_TSS * (c[X_S] + c[X_I] + c[X_AOB] + c[X_NOB] + c[X_OHO]);
  };

  *o++ = inf.stream.Q;
  *o++ = inf.temperature;
  *o++ = tkn(inf.stream.c, k_.i_NSS, k_.i_NSI, k_.i_NXS, k_.i_NXI, k_.i_NBM);
  *o++ = total_cod(inf.stream.c);
  *o++ = inf.stream.c[S_NH4];
  *o++ = tss(inf.stream.c);
  *o++ = F.Q_e;
  *o++ = c_e[S_NH4];
  *o++ = c_e[S_NO2];
  *o++ = c_e[S_NO3];
  *o++ = n_content(c_e);
  *o++ = total_cod(c_e);
  *o++ = tss(c_e);
  *o++ = settler_n2o;
  *o++ = gas_n2o_total + settler_n2o;
  *o++ = gas_no_total;
  *o++ = F.Q_in * n_content(inf.stream.c);
  *o++ = F.Q_e * (n_content(c_e) - c_e[S_N2O]);
  *o++ = F.Q_ps * n_content(c_ps);
  *o++ = F.Q_w * n_content(c_u);
  *o++ = gas_n_total + settler_n2o;
  *o++ = nitrogen_inventory(y);
}

}  // namespace n2olab::plant
