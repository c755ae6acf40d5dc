#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace n2olab::bio {

// Which perturbation family a parameter belongs to.
//   N2O     - constants of the NO/N2O producing and consuming steps
//   NonN2O  - the remaining rate, affinity and inhibition constants
//   Fixed   - yields, composition and temperature coefficients (never perturbed)
enum class ParamTag { N2O, NonN2O, Fixed };

std::string_view to_string(ParamTag tag);

struct ParameterEntry {
  double value = 0.0;
  ParamTag tag = ParamTag::Fixed;
  std::string unit;
  std::string note;
};

// Named parameter store backing the biokinetic model. Lookup is by name;
// the kinetic model caches a resolved view (see KineticConstants).
class KineticParameterSet {
 public:
  KineticParameterSet() = default;

  // Built-in defaults (identical to data/params/default.params).
  static KineticParameterSet defaults();

  // Parse the line-oriented parameter document:
  //   name = value [tag]   # unit  free text
  static KineticParameterSet parse(std::string_view text, std::string_view source = "<string>");
  static KineticParameterSet load(const std::string& path);
  std::string serialize() const;

  double get(const std::string& name) const;
  void set(const std::string& name, double value);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const ParameterEntry& entry(const std::string& name) const;

  // Insert or replace an entry (used when building defaults).
  void define(const std::string& name, double value, ParamTag tag, std::string unit, std::string note);

  std::vector<std::string> names() const;
  std::vector<std::string> names_with_tag(ParamTag tag) const;
  std::size_t size() const { return entries_.size(); }

  // Throws Error(Parameter) when a rate/affinity/yield is not strictly positive
  // or a required parameter is missing.
  void validate() const;

  bool operator==(const KineticParameterSet& other) const;

 private:
  std::map<std::string, ParameterEntry> entries_;
  std::vector<std::string> order_;  // file order, preserved for diffable output
};

// Flat, resolved view of the parameter set used in the hot path.
struct KineticConstants {
  // AOB: AMO, HAO (growth), HAO* (NO oxidation), NN, ND
  double q_AOB_AMO, mu_AOB_HAO, q_AOB_HAOstar, q_AOB_NN, q_AOB_ND;
  double K_AOB_NH4, K_AOB_O2_AMO, K_AOB_NH2OH, K_AOB_O2_HAO, K_AOB_HAO_NO;
  double K_AOB_NO_NN, K_AOB_O2_ND, K_AOB_I_O2, K_AOB_NO2_ND, K_AOB_NH2OH_ND;
  double b_AOB;
  // NOB
  double mu_NOB, K_NOB_NO2, K_NOB_O2, K_NOB_NH4, b_NOB;
  // OHO, aerobic and four-step denitrification
  double mu_OHO, K_OHO_S, K_OHO_S_anox, K_OHO_O2, K_OHO_I_O2, K_OHO_NH4;
  double eta_NAR, eta_NIR, eta_NOR, eta_NOS;
  double K_OHO_NO3, K_OHO_NO2, K_OHO_NO, K_OHO_N2O;
  double K_OHO_I_NO_NIR, K_OHO_I_NO_NOR, K_OHO_I_NO_NOS;
  double b_OHO, eta_decay_anox;
  // hydrolysis
  double k_h, K_X, eta_h;
  // stoichiometry and composition
  double Y_AOB, Y_NOB, Y_OHO, f_I;
  double i_NBM, i_NXS, i_NXI, i_NSS, i_NSI, i_TSS;
  // temperature (Arrhenius-type theta^(T-20))
  double theta_AOB, theta_NOB, theta_OHO, theta_decay, theta_hyd;

  static KineticConstants from(const KineticParameterSet& set);
};

// Names of every parameter the model reads, in canonical order.
const std::vector<std::string>& required_parameter_names();

}  // namespace n2olab::bio
