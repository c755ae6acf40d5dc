#include "biokinetics/kinetics.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace n2olab::bio {

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::BaselineTwoPathway: return "BaselineTwoPathway";
    case ModelVariant::AlternativeAOB: return "AlternativeAOB";
  }
  return "BaselineTwoPathway";
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "BaselineTwoPathway") return ModelVariant::BaselineTwoPathway;
  if (name == "AlternativeAOB") return ModelVariant::AlternativeAOB;
  fail(ErrorKind::Configuration, "unknown model variant '" + std::string(name) + "'");
}

double monod(double S, double K) {
  if (!std::isfinite(K) || K <= 0.0) fail(ErrorKind::Parameter, "monod: affinity constant must be finite and > 0");
  return S / (K + S);
}

double haldane(double S, double K_S, double K_I) {
  if (!std::isfinite(K_S) || K_S <= 0.0 || !(K_I > 0.0))
    fail(ErrorKind::Parameter, "haldane: K_S and K_I must be > 0");
  if (std::isinf(K_I)) return S / (K_S + S);
  return S / (K_S + S + S * S / K_I);
}

ProcessRateSet process_rates(const ComponentState& state, const KineticConstants& k, ModelVariant variant) {
  const auto& c = state.c;
  const double T = state.temperature;
  const double fT_aob = arrhenius(k.theta_AOB, T);
  const double fT_nob = arrhenius(k.theta_NOB, T);
  const double fT_oho = arrhenius(k.theta_OHO, T);
  const double fT_dec = arrhenius(k.theta_decay, T);
  const double fT_hyd = arrhenius(k.theta_hyd, T);

  const double O2 = c[S_O2];
  const double xaob = c[X_AOB];
  const double xnob = c[X_NOB];
  const double xoho = c[X_OHO];

  ProcessRateSet r;

  // AOB: AMO, HAO and HAO* are strictly aerobic.
  const double o2_hao = monod(O2, k.K_AOB_O2_HAO);
  r[AOB_AMO] = k.q_AOB_AMO * fT_aob * monod(O2, k.K_AOB_O2_AMO) * monod(c[S_NH4], k.K_AOB_NH4) * xaob;
  r[AOB_HAO] = k.mu_AOB_HAO * fT_aob * o2_hao * monod(c[S_NH2OH], k.K_AOB_NH2OH) * xaob;
  r[AOB_HAOstar] = k.q_AOB_HAOstar * fT_aob * o2_hao * monod(c[S_NO], k.K_AOB_HAO_NO) * xaob;
  r[AOB_NN] = k.q_AOB_NN * fT_aob * monod(c[S_NH2OH], k.K_AOB_NH2OH) * monod(c[S_NO], k.K_AOB_NO_NN) * xaob;

  double o2_nd = 0.0;
  switch (variant) {
    case ModelVariant::BaselineTwoPathway: o2_nd = haldane(O2, k.K_AOB_O2_ND, k.K_AOB_I_O2); break;
    case ModelVariant::AlternativeAOB: o2_nd = inhibition(O2, k.K_AOB_I_O2); break;
  }
  r[AOB_ND] = k.q_AOB_ND * fT_aob * monod(c[S_NH2OH], k.K_AOB_NH2OH_ND) * monod(c[S_NO2], k.K_AOB_NO2_ND) * o2_nd *
              xaob;

  r[NOB_GROWTH] = k.mu_NOB * fT_nob * monod(O2, k.K_NOB_O2) * monod(c[S_NO2], k.K_NOB_NO2) *
                  monod(c[S_NH4], k.K_NOB_NH4) * xnob;

  // OHO
  const double nh4_oho = monod(c[S_NH4], k.K_OHO_NH4);
  r[OHO_AEROBIC] = k.mu_OHO * fT_oho * monod(c[S_S], k.K_OHO_S) * monod(O2, k.K_OHO_O2) * nh4_oho * xoho;
  const double anoxic =
      k.mu_OHO * fT_oho * monod(c[S_S], k.K_OHO_S_anox) * inhibition(O2, k.K_OHO_I_O2) * nh4_oho * xoho;
  const double NO = c[S_NO];
  r[OHO_NAR] = anoxic * k.eta_NAR * monod(c[S_NO3], k.K_OHO_NO3);
  r[OHO_NIR] = anoxic * k.eta_NIR * monod(c[S_NO2], k.K_OHO_NO2) * inhibition(NO, k.K_OHO_I_NO_NIR);
  r[OHO_NOR] = anoxic * k.eta_NOR * monod(NO, k.K_OHO_NO) * inhibition(NO, k.K_OHO_I_NO_NOR);
  r[OHO_NOS] = anoxic * k.eta_NOS * monod(c[S_N2O], k.K_OHO_N2O) * inhibition(NO, k.K_OHO_I_NO_NOS);

  // Decay: aerobic rate, reduced by eta under anoxic conditions.
  const double o2_dec = monod(O2, k.K_OHO_O2);
  const double dec = fT_dec * (o2_dec + k.eta_decay_anox * (1.0 - o2_dec));
  r[AOB_DECAY] = k.b_AOB * dec * xaob;
  r[NOB_DECAY] = k.b_NOB * dec * xnob;
  r[OHO_DECAY] = k.b_OHO * dec * xoho;

  // Hydrolysis, surface limited: k_h (X_S/X_OHO)/(K_X + X_S/X_OHO) X_OHO.
  const double denom = k.K_X * xoho + c[X_S];
  const double surface = denom > 0.0 ? c[X_S] * xoho / denom : 0.0;
  r[HYDROLYSIS] = k.k_h * fT_hyd * surface * (o2_dec + k.eta_h * (1.0 - o2_dec));
  return r;
}

}  // namespace n2olab::bio
