#include "metrics/emissions.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "common/error.hpp"
#include "plant/simulate.hpp"

namespace n2olab::metrics {

using plant::Trajectory;

namespace {

struct TankInfo {
  std::string name;
  double volume;
  bool aerated;
};

std::vector<TankInfo> tanks_of(const Trajectory& traj) {
  std::vector<TankInfo> out;
  if (!traj.meta.contains("tanks"))
    fail(ErrorKind::Schema, "trajectory metadata lacks the tank list (not produced by the plant simulator?)");
  for (const auto& t : traj.meta["tanks"])
    out.push_back({t.at("name").get<std::string>(), t.at("volume").get<double>(), t.at("aerated").get<bool>()});
  return out;
}

double n_load_integral(const Trajectory& traj) {
  const auto& q = traj.series("influent.Q");
  const auto& tkn = traj.series("influent.TKN");
  std::vector<double> load(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) load[i] = q[i] * tkn[i];
  const double l = plant::trapezoid(traj.time, load);
  if (!(l > 0.0)) fail(ErrorKind::Data, "emission_factor: zero influent N-load");
  return l;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

std::string fmt(double v, const char* f = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt(const std::optional<double>& v, const char* f = "%.4g") { return v ? fmt(*v, f) : "n/a"; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

double recorded_duration(const Trajectory& traj) {
  if (traj.rows() < 2) fail(ErrorKind::Data, "trajectory: need at least two samples");
  return static_cast<double>(traj.rows()) * (traj.time[1] - traj.time[0]);
}

double emission_factor(const Trajectory& traj, const std::string& channel) {
  if (traj.rows() < 2) fail(ErrorKind::Data, "emission_factor: need at least two samples");
  return 100.0 * plant::trapezoid(traj.time, traj.series(channel)) / n_load_integral(traj);
}

double emission_factor(const Trajectory& traj) { return emission_factor(traj, "Gas.TOT"); }

const LocationEmission& EmissionReport::at(const std::string& location) const {
  for (const auto& l : locations)
    if (l.location == location) return l;
  fail(ErrorKind::Schema, "emission report has no location '" + location + "'");
}

EmissionReport emission_report(const Trajectory& traj) {
  EmissionReport r;
  const double load = n_load_integral(traj);
  const auto tanks = tanks_of(traj);
  auto add = [&](const std::string& loc, const std::string& channel) {
    const auto& s = traj.series(channel);
    LocationEmission e;
    e.location = loc;
    e.mean_kg_per_d = mean_of(s) / 1000.0;
    e.ef_pct = 100.0 * plant::trapezoid(traj.time, s) / load;
    r.locations.push_back(e);
  };
  for (const auto& t : tanks) add(t.name, t.name + ".gas_N2O");
  add("settler", "settler.N2O");
  for (const auto& l : r.locations) r.total_kg_per_d += l.mean_kg_per_d;
  for (auto& l : r.locations) l.share_pct = r.total_kg_per_d > 0.0 ? 100.0 * l.mean_kg_per_d / r.total_kg_per_d : 0.0;
  r.ef_pct = emission_factor(traj);
  const double n2o = mean_of(traj.series("Gas.TOT"));
  r.no_to_n2o = n2o > 0.0 ? mean_of(traj.series("Gas.NO_TOT")) / n2o : 0.0;

  double snn = 0.0, snd = 0.0, shd = 0.0;
  auto shares = [](const std::string& loc, double nn, double nd, double hd) {
    const double g = nn + nd + hd;
    PathwayShareRow p{loc};
    if (g > 0.0) {
      p.nn = 100.0 * nn / g;
      p.nd = 100.0 * nd / g;
      p.hd = 100.0 * hd / g;
    }
    return p;
  };
  for (const auto& t : tanks) {
    if (!t.aerated) continue;
    const double nn = mean_of(traj.series(t.name + ".path.NN"));
    const double nd = mean_of(traj.series(t.name + ".path.ND"));
    const double hd = mean_of(traj.series(t.name + ".path.HD"));
    r.pathways.push_back(shares(t.name, nn, nd, hd));
    snn += t.volume * nn;
    snd += t.volume * nd;
    shd += t.volume * hd;
  }
  r.pathways.push_back(shares("aerated", snn, snd, shd));
  return r;
}

json EmissionReport::to_json() const {
  json locs = json::array();
  for (const auto& l : locations)
    locs.push_back({{"location", l.location},
                    {"mean_kgN_per_d", l.mean_kg_per_d},
                    {"share_pct", l.share_pct},
                    {"ef_pct", l.ef_pct}});
  json paths = json::array();
  for (const auto& p : pathways) paths.push_back({{"location", p.location}, {"NN_pct", p.nn}, {"ND_pct", p.nd}, {"HD_pct", p.hd}});
  return {{"locations", locs},       {"total_kgN_per_d", total_kg_per_d}, {"ef_pct", ef_pct},
          {"no_to_n2o", no_to_n2o}, {"pathway_shares", paths}};
}

DynamicsTable dynamics_table(const std::vector<NamedSeries>& series, double duration,
                             const std::vector<std::size_t>& lags) {
  if (series.empty()) fail(ErrorKind::Structural, "dynamics_table: no series");
  const auto& site = series.front().values;
  DynamicsTable t;
  for (const auto& s : series) {
    if (s.values.size() != site.size())
      fail(ErrorKind::Structural, "dynamics_table: series '" + s.label + "' is not aligned with the site series");
    DynamicsColumn c;
    c.label = s.label;
    c.summary = summarize(s.values, s.volume, duration, lags);
    c.corr_to_site = pearson(s.values, site);
    c.mean_per_volume = c.summary.mean / s.volume;
    t.columns.push_back(std::move(c));
  }
  return t;
}

DynamicsTable dynamics_table(const Trajectory& traj, const std::vector<std::size_t>& lags) {
  std::vector<NamedSeries> s{{"TOT", traj.series("Gas.TOT"), 0.0}};
  for (const auto& t : tanks_of(traj))
    if (t.aerated) {
      s.front().volume += t.volume;
      s.push_back({t.name, traj.series(t.name + ".gas_N2O"), t.volume});
    }
  return dynamics_table(s, recorded_duration(traj), lags);
}

json DynamicsTable::to_json() const {
  json cols = json::array();
  for (const auto& c : columns)
    cols.push_back({{"label", c.label},
                    {"summary", c.summary.to_json()},
                    {"corr_to_site", opt(c.corr_to_site)},
                    {"mean_per_volume", c.mean_per_volume}});
  return {{"columns", cols}};
}

namespace {

struct Row {
  const char* name;
  const char* unit;
  std::string (*cell)(const DynamicsColumn&);
};

const Row kRows[] = {
    {"Mean", "kgN/d", [](const DynamicsColumn& c) { return fmt(c.summary.mean / 1000.0); }},
    {"Stdv", "kgN/d", [](const DynamicsColumn& c) { return fmt(c.summary.stdev / 1000.0); }},
    {"CV", "%", [](const DynamicsColumn& c) { return fmt(c.summary.cv, "%.1f"); }},
    {"SADn", "gN/(m3.d)", [](const DynamicsColumn& c) { return fmt(c.summary.sadn); }},
    {"SSDn", "gN2/(m3.d2)", [](const DynamicsColumn& c) { return fmt(c.summary.ssdn); }},
    {"Skewness", "-", [](const DynamicsColumn& c) { return fmt(c.summary.skewness, "%.3f"); }},
    {"Correlation to site-scale", "-", [](const DynamicsColumn& c) { return fmt(c.corr_to_site, "%.3f"); }},
    {"Mean_Volume", "gN/(m3.d)", [](const DynamicsColumn& c) { return fmt(c.mean_per_volume); }},
};

}  // namespace

std::string DynamicsTable::to_csv() const {
  std::string out = "metric,unit";
  for (const auto& c : columns) out += "," + c.label;
  out += "\n";
  for (const auto& r : kRows) {
    out += std::string(r.name) + "," + r.unit;
    for (const auto& c : columns) out += "," + r.cell(c);
    out += "\n";
  }
  return out;
}

std::string DynamicsTable::to_text() const {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-27s %-12s", "", "");
  out += buf;
  for (const auto& c : columns) {
    std::snprintf(buf, sizeof buf, " %10s", c.label.c_str());
    out += buf;
  }
  out += "\n";
  for (const auto& r : kRows) {
    std::snprintf(buf, sizeof buf, "%-27s %-12s", r.name, r.unit);
    out += buf;
    for (const auto& c : columns) {
      std::snprintf(buf, sizeof buf, " %10s", r.cell(c).c_str());
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace n2olab::metrics
