#include "biokinetics/parameters.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "common/error.hpp"

namespace n2olab::bio {

namespace {

struct DefaultRow {
  const char* name;
  double value;
  ParamTag tag;
  const char* unit;
  const char* note;
};

constexpr ParamTag kN2O = ParamTag::N2O;
constexpr ParamTag kNon = ParamTag::NonN2O;
constexpr ParamTag kFix = ParamTag::Fixed;

// Values at 20 degC. Two-pathway AOB structure with AMO/HAO/HAO* steps and
// four-step heterotrophic denitrification.
const DefaultRow kDefaults[] = {
    // --- AOB, nitrogen removal steps
    {"q_AOB_AMO", 5.2, kNon, "gN/(gCOD.d)", "maximum AMO rate (NH4 -> NH2OH)"},
    {"mu_AOB_HAO", 0.61, kNon, "1/d", "maximum AOB growth rate on the HAO step"},
    {"K_AOB_NH4", 0.7, kNon, "gN/m3", "NH4 affinity of AMO"},
    {"K_AOB_O2_AMO", 0.18, kNon, "gO2/m3", "O2 affinity of AMO"},
    {"K_AOB_NH2OH", 0.9, kNon, "gN/m3", "NH2OH affinity of HAO and NN"},
    {"K_AOB_O2_HAO", 0.98, kNon, "gO2/m3", "O2 affinity of HAO and HAO*"},
    {"b_AOB", 0.05, kNon, "1/d", "AOB decay"},
    // --- AOB, NO/N2O steps
    {"q_AOB_HAOstar", 5.2, kN2O, "gN/(gCOD.d)", "maximum NO oxidation rate (HAO*, NO -> NO2)"},
    {"q_AOB_NN", 0.0078, kN2O, "gN/(gCOD.d)", "maximum N2O production, nitrifier nitrification"},
    {"q_AOB_ND", 1.3, kN2O, "gN/(gCOD.d)", "maximum N2O production, nitrifier denitrification"},
    {"K_AOB_HAO_NO", 0.0003, kN2O, "gN/m3", "NO affinity of HAO*"},
    {"K_AOB_NO_NN", 0.008, kN2O, "gN/m3", "NO affinity of NN"},
    {"K_AOB_O2_ND", 0.5, kN2O, "gO2/m3", "O2 affinity of ND (Haldane)"},
    {"K_AOB_I_O2", 0.8, kN2O, "gO2/m3", "O2 inhibition of ND"},
    {"K_AOB_NO2_ND", 1.0, kN2O, "gN/m3", "NO2 affinity of ND"},
    {"K_AOB_NH2OH_ND", 0.9, kN2O, "gN/m3", "NH2OH affinity of ND"},
    // --- NOB
    {"mu_NOB", 0.9, kNon, "1/d", "maximum NOB growth rate"},
    {"K_NOB_NO2", 0.5, kNon, "gN/m3", "NO2 affinity of NOB"},
    {"K_NOB_O2", 0.75, kNon, "gO2/m3", "O2 affinity of NOB"},
    {"K_NOB_NH4", 0.05, kNon, "gN/m3", "NH4 as nutrient for NOB"},
    {"b_NOB", 0.05, kNon, "1/d", "NOB decay"},
    // --- OHO, aerobic growth and NO3 -> NO2
    {"mu_OHO", 6.0, kNon, "1/d", "maximum OHO growth rate"},
    {"K_OHO_S", 10.0, kNon, "gCOD/m3", "S_S affinity, aerobic"},
    {"K_OHO_S_anox", 10.0, kNon, "gCOD/m3", "S_S affinity, anoxic steps"},
    {"K_OHO_O2", 0.2, kNon, "gO2/m3", "O2 affinity of aerobic OHO growth"},
    {"K_OHO_I_O2", 0.2, kNon, "gO2/m3", "O2 inhibition of the anoxic steps"},
    {"K_OHO_NH4", 0.05, kNon, "gN/m3", "NH4 as nutrient for OHO"},
    {"eta_NAR", 0.28, kNon, "-", "anoxic reduction factor NAR"},
    {"K_OHO_NO3", 0.2, kNon, "gN/m3", "NO3 affinity of NAR"},
    {"K_OHO_NO2", 0.2, kNon, "gN/m3", "NO2 affinity of NIR"},
    {"b_OHO", 0.4, kNon, "1/d", "OHO decay"},
    {"eta_decay_anox", 0.5, kNon, "-", "anoxic reduction of decay"},
    // --- OHO, NO/N2O steps
    {"eta_NIR", 0.16, kN2O, "-", "anoxic reduction factor NIR (NO2 -> NO)"},
    {"eta_NOR", 0.46, kN2O, "-", "anoxic reduction factor NOR (NO -> N2O)"},
    {"eta_NOS", 0.35, kN2O, "-", "anoxic reduction factor NOS (N2O -> N2)"},
    {"K_OHO_NO", 0.05, kN2O, "gN/m3", "NO affinity of NOR"},
    {"K_OHO_N2O", 0.05, kN2O, "gN/m3", "N2O affinity of NOS"},
    {"K_OHO_I_NO_NIR", 0.5, kN2O, "gN/m3", "noncompetitive NO inhibition of NIR"},
    {"K_OHO_I_NO_NOR", 0.3, kN2O, "gN/m3", "noncompetitive NO inhibition of NOR"},
    {"K_OHO_I_NO_NOS", 0.075, kN2O, "gN/m3", "noncompetitive NO inhibition of NOS"},
    // --- hydrolysis
    {"k_h", 3.0, kNon, "1/d", "maximum hydrolysis rate"},
    {"K_X", 0.1, kNon, "gCOD/gCOD", "X_S/X_OHO saturation of hydrolysis"},
    {"eta_h", 0.4, kNon, "-", "anoxic reduction of hydrolysis"},
    // --- stoichiometry and composition
    {"Y_AOB", 0.18, kFix, "gCOD/gN", "AOB yield per NH2OH oxidised"},
    {"Y_NOB", 0.06, kFix, "gCOD/gN", "NOB yield per NO2 oxidised"},
    {"Y_OHO", 0.6, kFix, "gCOD/gCOD", "OHO yield (aerobic and anoxic)"},
    {"f_I", 0.08, kFix, "-", "inert fraction of decayed biomass"},
    {"i_NBM", 0.07, kFix, "gN/gCOD", "N content of biomass"},
    {"i_NXS", 0.04, kFix, "gN/gCOD", "N content of X_S"},
    {"i_NXI", 0.03, kFix, "gN/gCOD", "N content of X_I"},
    {"i_NSS", 0.01, kFix, "gN/gCOD", "N content of S_S"},
    {"i_NSI", 0.01, kFix, "gN/gCOD", "N content of S_I"},
    {"i_TSS", 0.75, kFix, "gTSS/gCOD", "TSS per particulate COD"},
    // --- temperature
    {"theta_AOB", 1.08, kFix, "-", "AOB rates"},
    {"theta_NOB", 1.06, kFix, "-", "NOB rates"},
    {"theta_OHO", 1.04, kFix, "-", "OHO growth rates"},
    {"theta_decay", 1.04, kFix, "-", "decay rates"},
    {"theta_hyd", 1.04, kFix, "-", "hydrolysis"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

ParamTag parse_tag(const std::string& t, std::string_view source, int line) {
  if (t == "n2o") return ParamTag::N2O;
  if (t == "non") return ParamTag::NonN2O;
  if (t == "fixed") return ParamTag::Fixed;
  fail(ErrorKind::Configuration,
       std::string(source) + ":" + std::to_string(line) + ": unknown tag '" + t + "'");
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  // shortest representation that round-trips
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << v;
    if (std::stod(t.str()) == v) return t.str();
  }
  return os.str();
}

}  // namespace

std::string_view to_string(ParamTag tag) {
  switch (tag) {
    case ParamTag::N2O: return "n2o";
    case ParamTag::NonN2O: return "non";
    case ParamTag::Fixed: return "fixed";
  }
  return "fixed";
}

const std::vector<std::string>& required_parameter_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& row : kDefaults) v.emplace_back(row.name);
    return v;
  }();
  return names;
}

KineticParameterSet KineticParameterSet::defaults() {
  KineticParameterSet set;
  for (const auto& row : kDefaults) set.define(row.name, row.value, row.tag, row.unit, row.note);
  return set;
}

void KineticParameterSet::define(const std::string& name, double value, ParamTag tag,
                                 std::string unit, std::string note) {
  if (!entries_.count(name)) order_.push_back(name);
  entries_[name] = ParameterEntry{value, tag, std::move(unit), std::move(note)};
}

KineticParameterSet KineticParameterSet::parse(std::string_view text, std::string_view source) {
  KineticParameterSet set;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string body = raw;
    std::string comment;
    if (auto hash = raw.find('#'); hash != std::string::npos) {
      body = raw.substr(0, hash);
      comment = trim(std::string_view(raw).substr(hash + 1));
    }
    body = trim(body);
    if (body.empty()) continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(line_no); };
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Configuration, where() + ": expected 'name = value [tag]'");
    const std::string name = trim(body.substr(0, eq));
    std::string rest = trim(body.substr(eq + 1));
    ParamTag tag = ParamTag::Fixed;
    if (auto lb = rest.find('['); lb != std::string::npos) {
      const auto rb = rest.find(']', lb);
      if (rb == std::string::npos) fail(ErrorKind::Configuration, where() + ": unterminated tag");
      tag = parse_tag(trim(rest.substr(lb + 1, rb - lb - 1)), source, line_no);
      rest = trim(rest.substr(0, lb));
    } else {
      fail(ErrorKind::Configuration, where() + ": field '" + name + "' has no [tag]");
    }
    if (name.empty()) fail(ErrorKind::Configuration, where() + ": empty parameter name");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(rest);
    } catch (const std::exception&) {
      fail(ErrorKind::Configuration, where() + ": field '" + name + "' has non-numeric value '" + rest + "'");
    }
    if (set.contains(name)) fail(ErrorKind::Configuration, where() + ": duplicate field '" + name + "'");
    // "unit  note" -> first token is the unit
    std::string unit, note;
    if (!comment.empty()) {
      const auto sp = comment.find_first_of(" \t");
      unit = comment.substr(0, sp);
      if (sp != std::string::npos) note = trim(comment.substr(sp));
    }
    set.define(name, value, tag, unit, note);
  }
  return set;
}

KineticParameterSet KineticParameterSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open parameter file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string KineticParameterSet::serialize() const {
  std::ostringstream os;
  os << "# n2olab kinetic parameter file, format 1\n"
     << "# name = value [tag]   # unit  description\n"
     << "# tags: n2o (NO/N2O steps), non (other kinetic constants), fixed (never perturbed)\n"
     << "# values refer to 20 degC; rates are corrected with theta^(T-20)\n";
  for (const auto& name : order_) {
    const auto& e = entries_.at(name);
    std::string lhs = name;
    lhs.resize(std::max<std::size_t>(lhs.size(), 16), ' ');
    std::string val = format_value(e.value);
    val.resize(std::max<std::size_t>(val.size(), 10), ' ');
    os << lhs << " = " << val << " [" << to_string(e.tag) << "]";
    if (!e.unit.empty() || !e.note.empty()) os << "  # " << e.unit << (e.note.empty() ? "" : "  " + e.note);
    os << "\n";
  }
  return os.str();
}

double KineticParameterSet::get(const std::string& name) const { return entry(name).value; }

void KineticParameterSet::set(const std::string& name, double value) {
  auto it = entries_.find(name);
  if (it == entries_.end()) fail(ErrorKind::Parameter, "unknown parameter '" + name + "'");
  it->second.value = value;
}

const ParameterEntry& KineticParameterSet::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) fail(ErrorKind::Parameter, "missing parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> KineticParameterSet::names() const { return order_; }

std::vector<std::string> KineticParameterSet::names_with_tag(ParamTag tag) const {
  std::vector<std::string> out;
  for (const auto& n : order_)
    if (entries_.at(n).tag == tag) out.push_back(n);
  return out;
}

void KineticParameterSet::validate() const {
  for (const auto& name : required_parameter_names()) {
    const auto& e = entry(name);
    if (!std::isfinite(e.value) || e.value <= 0.0)
      fail(ErrorKind::Parameter, "parameter '" + name + "' must be finite and > 0");
  }
  const double f_I = get("f_I");
  if (f_I >= 1.0) fail(ErrorKind::Parameter, "f_I must be < 1");
  for (const char* y : {"Y_OHO"})
    if (get(y) >= 1.0) fail(ErrorKind::Parameter, std::string(y) + " must be < 1");
}

bool KineticParameterSet::operator==(const KineticParameterSet& other) const {
  if (order_ != other.order_) return false;
  for (const auto& [name, e] : entries_) {
    const auto& o = other.entries_.at(name);
    if (e.value != o.value || e.tag != o.tag || e.unit != o.unit || e.note != o.note) return false;
  }
  return true;
}

KineticConstants KineticConstants::from(const KineticParameterSet& s) {
  s.validate();
  KineticConstants k{};
  auto g = [&](const char* n) { return s.get(n); };
  k.q_AOB_AMO = g("q_AOB_AMO");
  k.mu_AOB_HAO = g("mu_AOB_HAO");
  k.q_AOB_HAOstar = g("q_AOB_HAOstar");
  k.q_AOB_NN = g("q_AOB_NN");
  k.q_AOB_ND = g("q_AOB_ND");
  k.K_AOB_NH4 = g("K_AOB_NH4");
  k.K_AOB_O2_AMO = g("K_AOB_O2_AMO");
  k.K_AOB_NH2OH = g("K_AOB_NH2OH");
  k.K_AOB_O2_HAO = g("K_AOB_O2_HAO");
  k.K_AOB_HAO_NO = g("K_AOB_HAO_NO");
  k.K_AOB_NO_NN = g("K_AOB_NO_NN");
  k.K_AOB_O2_ND = g("K_AOB_O2_ND");
  k.K_AOB_I_O2 = g("K_AOB_I_O2");
  k.K_AOB_NO2_ND = g("K_AOB_NO2_ND");
  k.K_AOB_NH2OH_ND = g("K_AOB_NH2OH_ND");
  k.b_AOB = g("b_AOB");
  k.mu_NOB = g("mu_NOB");
  k.K_NOB_NO2 = g("K_NOB_NO2");
  k.K_NOB_O2 = g("K_NOB_O2");
  k.K_NOB_NH4 = g("K_NOB_NH4");
  k.b_NOB = g("b_NOB");
  k.mu_OHO = g("mu_OHO");
  k.K_OHO_S = g("K_OHO_S");
  k.K_OHO_S_anox = g("K_OHO_S_anox");
  k.K_OHO_O2 = g("K_OHO_O2");
  k.K_OHO_I_O2 = g("K_OHO_I_O2");
  k.K_OHO_NH4 = g("K_OHO_NH4");
  k.eta_NAR = g("eta_NAR");
  k.eta_NIR = g("eta_NIR");
  k.eta_NOR = g("eta_NOR");
  k.eta_NOS = g("eta_NOS");
  k.K_OHO_NO3 = g("K_OHO_NO3");
  k.K_OHO_NO2 = g("K_OHO_NO2");
  k.K_OHO_NO = g("K_OHO_NO");
  k.K_OHO_N2O = g("K_OHO_N2O");
  k.K_OHO_I_NO_NIR = g("K_OHO_I_NO_NIR");
  k.K_OHO_I_NO_NOR = g("K_OHO_I_NO_NOR");
  k.K_OHO_I_NO_NOS = g("K_OHO_I_NO_NOS");
  k.b_OHO = g("b_OHO");
  k.eta_decay_anox = g("eta_decay_anox");
  k.k_h = g("k_h");
  k.K_X = g("K_X");
  k.eta_h = g("eta_h");
  k.Y_AOB = g("Y_AOB");
  k.Y_NOB = g("Y_NOB");
  k.Y_OHO = g("Y_OHO");
  k.f_I = g("f_I");
  k.i_NBM = g("i_NBM");
  k.i_NXS = g("i_NXS");
  k.i_NXI = g("i_NXI");
  k.i_NSS = g("i_NSS");
  k.i_NSI = g("i_NSI");
  k.i_TSS = g("i_TSS");
  k.theta_AOB = g("theta_AOB");
  k.theta_NOB = g("theta_NOB");
  k.theta_OHO = g("theta_OHO");
  k.theta_decay = g("theta_decay");
  k.theta_hyd = g("theta_hyd");
  return k;
}

}  // namespace n2olab::bio
