#include <cmath>
#include <filesystem>
#include <set>

#include "common/error.hpp"
#include "doctest.h"
#include "plant/config.hpp"
#include "scenarios/dataset.hpp"
#include "scenarios/disturbance.hpp"
#include "scenarios/features.hpp"
#include "scenarios/registry.hpp"

using namespace n2olab;
using namespace n2olab::scenarios;
using plant::Trajectory;

namespace {

// Every channel any scenario reads, with value = offset + row (+ channel index
// to keep columns distinct).
Trajectory synthetic_run(std::size_t rows, double offset) {
  Trajectory t;
  for (std::size_t i = 0; i < rows; ++i) t.time.push_back(static_cast<double>(i) / 96.0);
  std::set<std::string> names{"Gas.TOT", "rA1.gas_N2O", "rA1.S_N2O", "settler.N2O"};
  const auto cat = FeatureCatalog::defaults();
  for (const auto& f : cat.features(FeatureSetId::F21)) names.insert(f.channel);
  int k = 0;
  for (const auto& n : names) {
    std::vector<double> v(rows);
    for (std::size_t i = 0; i < rows; ++i) v[i] = offset + static_cast<double>(i) + 0.001 * k;
    t.add_column(n, "-", std::move(v));
    ++k;
  }
  t.meta["config_hash"] = "h" + std::to_string(static_cast<int>(offset));
  return t;
}

}  // namespace

TEST_CASE("feature sets have 12, 14 and 21 distinct columns") {
  const auto cat = FeatureCatalog::defaults();
  CHECK(cat.features(FeatureSetId::F12).size() == 12);
  CHECK(cat.features(FeatureSetId::F14).size() == 14);
  CHECK(cat.features(FeatureSetId::F21).size() == 21);
  std::set<std::string> tokens;
  for (const auto& f : cat.features(FeatureSetId::F21)) tokens.insert(f.token());
  CHECK(tokens.size() == 21);
  const auto f12 = cat.features(FeatureSetId::F12);
  const auto f14 = cat.features(FeatureSetId::F14);
  for (std::size_t i = 0; i < 12; ++i) CHECK(f14[i].token() == f12[i].token());
  CHECK(FeatureCatalog::from_json(cat.to_json()).to_json() == cat.to_json());
}

TEST_CASE("column tokens parse and reject malformed names") {
  const auto t = parse_token("NH4@rA1[gN/m3]");
  CHECK(t.name == "NH4");
  CHECK(t.location == "rA1");
  CHECK(t.unit == "gN/m3");
  for (const char* bad : {"NH4", "NH4@rA1", "@rA1[x]", "NH4@[x]", "NH4@rA1[x", "NH4@rA1[x]y"}) {
    try {
      parse_token(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Schema);
    }
  }
}

TEST_CASE("registry lists 16 scenarios over 8 simulations") {
  const auto r = Registry::defaults();
  REQUIRE(r.scenarios().size() == 16);
  REQUIRE(r.simulations().size() == 8);
  for (int i = 0; i < 16; ++i) CHECK(r.scenarios()[i].id == i + 1);
  CHECK(r.scenario("Baseline_3h").interval_minutes == 180);
  CHECK(r.scenario("7").interval_minutes == 60);
  CHECK(r.scenario("N2O_Liq_rA1").target == TargetKind::LiqRA1);
  CHECK(r.scenario("N2O_Gas_rA1_21feat").features == FeatureSetId::F21);
  CHECK(r.scenario("BiasedN2O").simulation_label == "7");
  CHECK(r.scenario("SixYear").simulation_label == "1:6");
  CHECK(r.simulation(7).composite());
  CHECK(r.simulation("biological_structure").disturbance.kind == DisturbanceKind::BiologicalStructure);

  const auto runs = r.required_runs(r.scenarios());
  CHECK(runs == std::vector<int>{1, 2, 3, 4, 5, 6, 8});
  CHECK(r.required_runs({r.scenario("Baseline")}) == std::vector<int>{1});

  CHECK_THROWS_AS(r.scenario("nope"), Error);
  CHECK_THROWS_AS(r.simulation(42), Error);
}

TEST_CASE("registry JSON round-trips and the shipped file matches the defaults") {
  const auto r = Registry::defaults();
  const auto back = Registry::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());
  for (std::size_t i = 0; i < r.scenarios().size(); ++i) CHECK(back.scenarios()[i] == r.scenarios()[i]);
  const auto shipped = Registry::load(std::string(N2OLAB_TEST_DATA_DIR) + "/scenarios/registry.json");
  CHECK(shipped.to_json() == r.to_json());
}

TEST_CASE("registry rejects inconsistent definitions") {
  auto j = Registry::defaults().to_json();
  auto dup = j;
  dup["scenarios"][1]["key"] = dup["scenarios"][0]["key"];
  CHECK_THROWS_AS(Registry::from_json(dup), Error);
  auto unknown = j;
  unknown["scenarios"][0]["sources"] = {99};
  CHECK_THROWS_AS(Registry::from_json(unknown), Error);
  auto interval = j;
  interval["scenarios"][0]["interval_minutes"] = 20;
  CHECK_THROWS_AS(Registry::from_json(interval), Error);
  auto feats = j;
  feats["scenarios"][0]["features"] = "F13";
  try {
    Registry::from_json(feats);
    FAIL("accepted F13");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
  }
}

TEST_CASE("disturbances leave the base configuration untouched") {
  const auto base = plant::PlantConfig::defaults();
  const auto h = base.hash();

  const auto vol = apply_disturbance(base, {DisturbanceKind::AerobicVolume}, 1);
  CHECK(base.hash() == h);
  CHECK(vol.config.hash() != h);
  for (const auto& t : vol.config.tanks)
    if (t.aerated) CHECK(t.volume == doctest::Approx(2400.0));
    else CHECK(t.volume == doctest::Approx(750.0));
  CHECK(vol.config.aerobic_volume() == doctest::Approx(0.8 * base.aerobic_volume()));

  const auto mt = apply_disturbance(base, {DisturbanceKind::MassTransferEq}, 1);
  CHECK(mt.config.gas_mode == plant::GasTransferMode::DynamicHeadspace);
  const auto alt = apply_disturbance(base, {DisturbanceKind::BiologicalStructure}, 1);
  CHECK(alt.config.variant == bio::ModelVariant::AlternativeAOB);
  const auto inf = apply_disturbance(base, {DisturbanceKind::Influent}, 1);
  CHECK(inf.config.influent.n_load_factor == doctest::Approx(1.15));
  CHECK(inf.config.influent.temperature_offset == doctest::Approx(2.0));
  CHECK(inf.config.influent.rain_frequency_factor == doctest::Approx(2.0));
  CHECK(apply_disturbance(base, {}, 1).config.hash() == h);
}

TEST_CASE("microbial perturbations are exactly +-rel on the tagged parameters only") {
  const auto base = plant::PlantConfig::defaults();
  for (auto [kind, rel, tag, count] :
       {std::tuple{DisturbanceKind::MicrobioNonN2O, 0.10, bio::ParamTag::NonN2O, 26},
        std::tuple{DisturbanceKind::MicrobioN2O, 0.20, bio::ParamTag::N2O, 17}}) {
    Disturbance d;
    d.kind = kind;
    const auto out = apply_disturbance(base, d, 7);
    const auto tagged = base.params.names_with_tag(tag);
    CHECK(static_cast<int>(tagged.size()) == count);
    std::set<std::string> in(tagged.begin(), tagged.end());
    int up = 0;
    for (const auto& name : base.params.names()) {
      const double b = base.params.get(name), v = out.config.params.get(name);
      if (!in.count(name)) {
        CHECK(v == b);
        continue;
      }
      const int sign = out.record["signs"][name].get<int>();
      CHECK(v == doctest::Approx(b * (1.0 + sign * rel)).epsilon(1e-14));
      up += sign > 0;
    }
    CHECK(up > 0);
    CHECK(up < count);
    const auto again = apply_disturbance(base, d, 7);
    CHECK(again.config.hash() == out.config.hash());
    CHECK(apply_disturbance(base, d, 8).record["signs"] != out.record["signs"]);
  }
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> s;
  for (std::uint64_t i = 0; i < 100; ++i) s.insert(derive_seed(1, i));
  CHECK(s.size() == 100);
  CHECK(derive_seed(1, 3) == derive_seed(1, 3));
  CHECK(derive_seed(1, 3) != derive_seed(2, 3));
}

TEST_CASE("extract_dataset decimates at phase 0") {
  const auto r = Registry::defaults();
  const auto run = synthetic_run(35040, 0.0);
  const std::map<int, const Trajectory*> runs{{1, &run}};
  const auto base = extract_dataset(r.scenario("Baseline"), r.catalog(), runs);
  CHECK(base.rows() == 35040);
  CHECK(base.features() == 14);
  CHECK(base.target_name == "N2O_gas@TOT[gN/d]");
  const auto h3 = extract_dataset(r.scenario("Baseline_3h"), r.catalog(), runs);
  CHECK(h3.rows() == 2920);
  CHECK(h3.time[1] == doctest::Approx(12.0 / 96.0));
  const auto h1 = extract_dataset(r.scenario("Baseline_1h"), r.catalog(), runs);
  CHECK(h1.rows() == 8760);

  // decimating the 15-min dataset gives the same rows
  const auto dec = base.decimate(12, 0);
  CHECK(dec.X == h3.X);
  CHECK(dec.y == h3.y);

  const auto liq = extract_dataset(r.scenario("N2O_Liq_rA1"), r.catalog(), runs);
  CHECK(liq.y == Eigen::Map<const Eigen::VectorXd>(run.series("rA1.S_N2O").data(), 35040));
  CHECK(liq.features() == 12);

  const std::map<int, const Trajectory*> none;
  CHECK_THROWS_AS(extract_dataset(r.scenario("Baseline"), r.catalog(), none), Error);
}

TEST_CASE("select and decimate commute") {
  const auto r = Registry::defaults();
  const auto run = synthetic_run(500, 3.0);
  const auto d = extract_dataset(r.scenario("N2O_Gas_rA1_21feat"), r.catalog(), {{1, &run}});
  const std::vector<std::string> pick{d.feature_names[5], d.feature_names[0], d.feature_names[20]};
  const auto a = d.select(pick).decimate(7, 3);
  const auto b = d.decimate(7, 3).select(pick);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(a.time == b.time);
  CHECK(a.rows() == (500 - 3 + 6) / 7);
  CHECK_THROWS_AS(d.select({"missing@x[-]"}), Error);
}

TEST_CASE("biased target averages N2O over the disturbed runs") {
  const auto r = Registry::defaults();
  std::vector<Trajectory> tr;
  for (int i = 1; i <= 6; ++i) tr.push_back(synthetic_run(96, 10.0 * i));
  std::map<int, const Trajectory*> runs;
  for (int i = 1; i <= 6; ++i) runs[i] = &tr[i - 1];
  const auto d = extract_dataset(r.scenario("BiasedN2O"), r.catalog(), runs);
  const auto& tot = tr[0].series("Gas.TOT");
  const int col = tr[0].column("Gas.TOT");
  for (std::size_t i = 0; i < d.rows(); ++i) {
    // mean of offsets 20..60 is 40
    CHECK(d.y[static_cast<Eigen::Index>(i)] == doctest::Approx(40.0 + static_cast<double>(i) + 0.001 * (col)));
    CHECK(d.X(static_cast<Eigen::Index>(i), 0) == tr[0].series("influent.Q")[i]);
  }
  CHECK(tot.size() == 96);

  const auto comp = compose_trajectory(r.simulation(7), runs);
  CHECK(comp.series("Gas.TOT")[5] == doctest::Approx(d.y[5]));
  CHECK(comp.series("rA1.S_N2O")[0] == doctest::Approx(40.0 + 0.001 * comp.column("rA1.S_N2O")));
  CHECK(comp.series("rA1.S_O2") == tr[0].series("rA1.S_O2"));
  CHECK(is_n2o_channel("rA3.gas_N2O"));
  CHECK(is_n2o_channel("settler.N2O"));
  CHECK_FALSE(is_n2o_channel("rA3.S_NO"));
}

TEST_CASE("six-year concatenation keeps every sixth sample") {
  const auto r = Registry::defaults();
  std::vector<Trajectory> tr;
  for (int i = 1; i <= 6; ++i) tr.push_back(synthetic_run(35040, 1000.0 * i));
  std::map<int, const Trajectory*> runs;
  for (int i = 1; i <= 6; ++i) runs[i] = &tr[i - 1];
  const auto d = extract_dataset(r.scenario("SixYear"), r.catalog(), runs);
  CHECK(d.rows() == 35040);
  // brute force: concatenate and keep index % 6 == 0
  std::vector<double> all;
  for (const auto& t : tr) all.insert(all.end(), t.series("Gas.TOT").begin(), t.series("Gas.TOT").end());
  for (std::size_t i = 0; i < d.rows(); i += 997) CHECK(d.y[static_cast<Eigen::Index>(i)] == all[6 * i]);
  CHECK(d.time.back() > 6 * 364.9);
}

TEST_CASE("dataset CSV round-trips and reports malformed files") {
  const auto r = Registry::defaults();
  const auto run = synthetic_run(50, 0.5);
  auto d = extract_dataset(r.scenario("N2O_Gas_rA1"), r.catalog(), {{1, &run}});
  d.y[3] = 1.0 / 3.0;
  const auto dir = std::filesystem::temp_directory_path() / "n2olab_ds_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "N2O_Gas_rA1.csv").string();
  d.write_csv(path);
  const auto back = TabularDataset::read_csv(path);
  CHECK(back.feature_names == d.feature_names);
  CHECK(back.target_name == d.target_name);
  CHECK(back.X == d.X);
  CHECK(back.y == d.y);
  CHECK(back.time == d.time);

  write_text_file((dir / "bad.csv").string(), "time@plant[d],a@b[c],y@z[w]\n0,1,2\n1,x,3\n");
  try {
    TabularDataset::read_csv((dir / "bad.csv").string());
    FAIL("accepted bad.csv");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  write_text_file((dir / "short.csv").string(), "time@plant[d],a@b[c],y@z[w]\n0,1\n");
  CHECK_THROWS_AS(TabularDataset::read_csv((dir / "short.csv").string()), Error);
  write_text_file((dir / "order.csv").string(), "time@plant[d],a@b[c],y@z[w]\n1,1,2\n0,1,2\n");
  try {
    TabularDataset::read_csv((dir / "order.csv").string());
    FAIL("accepted order.csv");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }
  std::filesystem::remove_all(dir);
}
