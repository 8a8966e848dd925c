// Copyright 2026 The skurec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "skurec/csv.h"
#include "skurec/dataset.h"
#include "skurec/pipeline.h"
#include "test_util.h"

namespace skurec {
namespace {

namespace fs = std::filesystem;

PipelineConfig SmallConfig(const fs::path& dir, std::uint64_t seed = 5) {
  PipelineConfig cfg;
  cfg.output_dir = dir;
  cfg.synthetic.customers = 10;
  cfg.synthetic.duration_hours = 2.0;
  cfg.target_encoding.forest.num_trees = 10;
  cfg.simulation_seeds = 2;
  cfg.simulation.iterations = 10;
  cfg.grid_noises = {0.0};
  cfg.grid_sigmas = {0.1};
  cfg.grid_rates = {0.4};
  cfg.grid_seeds = 1;
  cfg.SetSeed(seed);
  return cfg;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Rows of a CSV file keyed by column name.
std::vector<std::map<std::string, std::string>> Rows(const fs::path& p) {
  csv::Reader in(p);
  std::vector<std::map<std::string, std::string>> out;
  std::vector<std::string> f;
  while (in.Next(f)) {
    std::map<std::string, std::string> row;
    for (std::size_t k = 0; k < f.size(); ++k) row[in.header()[k]] = f[k];
    out.push_back(std::move(row));
  }
  return out;
}

int RunAll(const PipelineConfig& cfg, std::ostream& log) {
  for (auto* cmd : {CmdGenSynthetic, CmdRightsize, CmdLearnHierarchy, CmdTrain,
                    CmdPredict, CmdEvaluate}) {
    if (int rc = cmd(cfg, log); rc != kExitOk) return rc;
  }
  return CmdSimulate(cfg, true, log);
}

TEST_CASE("the full pipeline writes every artifact deterministically") {
  testing::TempDir a("pipe_a"), b("pipe_b");
  std::ostringstream log;
  REQUIRE(RunAll(SmallConfig(a.path()), log) == kExitOk);
  REQUIRE(RunAll(SmallConfig(b.path()), log) == kExitOk);
  for (const char* name :
       {"catalog.csv", "telemetry.csv", "profiles.csv", "capacities.csv", "manifest.json",
        "rightsized.csv", "rightsize_summary.json", "hierarchy.json", "split.csv",
        "prediction_store.csv", "te_model.json", "validation_report.json",
        "recommendations.csv", "curves.csv", "summary.csv", "sim_metrics.csv",
        "sim_grid.csv"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a / name));
    CHECK(Slurp(a / name) == Slurp(b / name));
  }

  std::map<std::string, std::map<std::string, std::string>> summary;
  for (auto& row : Rows(a / "summary.csv")) summary[row["model"]] = row;
  REQUIRE(summary.count("rightsized_uncensored"));
  CHECK(csv::ParseNumber(summary["rightsized_uncensored"]["throttling_ratio"]) == 0.0);
  CHECK(summary.count("default_baseline"));
  CHECK(summary.count("user_selection"));

  const auto recs = Rows(a / "recommendations.csv");
  CHECK(recs.size() == Rows(a / "profiles.csv").size());
  for (const auto& r : recs) {
    CHECK(r.at("model") == "hierarchical");
    CHECK(r.at("stage2_capacity") == r.at("recommended_capacity"));
    CHECK_FALSE(r.at("explanation").empty());
  }
}

TEST_CASE("personalization shifts one recommendation by one step") {
  testing::TempDir dir("pipe_personal");
  PipelineConfig cfg = SmallConfig(dir.path());
  cfg.propagation.learning_rate = 1.0;
  std::ostringstream log;
  for (auto* cmd : {CmdGenSynthetic, CmdRightsize, CmdLearnHierarchy, CmdTrain}) {
    REQUIRE(cmd(cfg, log) == kExitOk);
  }
  const ProfileTable profiles = ReadProfiles(dir / "profiles.csv");
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::find(profiles.feature_names.begin(), profiles.feature_names.end(), name) -
        profiles.feature_names.begin());
  };
  const ProfileRecord& p = profiles.profiles[0];
  const LambdaKey key{p.values[col("CloudCustomerGuid")], p.values[col("SubscriptionId")],
                      p.values[col("ResourceGroup")], p.offering.Name()};
  const std::vector<SatisfactionSignal> signals = {{key, 1.0, SignalSource::kCri}};
  WriteSignals(dir / "signals.csv", signals);
  REQUIRE(CmdUpdateProfiles(cfg, log) == kExitOk);
  CHECK(LambdaStore::Load(dir / "lambda_store.json").Lookup(key) == 1.0);
  REQUIRE(CmdPredict(cfg, log) == kExitOk);

  const SkuCatalog catalog = ReadCatalog(dir / "catalog.csv");
  std::size_t personalized = 0;
  for (const auto& r : Rows(dir / "recommendations.csv")) {
    const double stage2 = csv::ParseNumber(r.at("stage2_capacity"));
    const double rec = csv::ParseNumber(r.at("recommended_capacity"));
    if (r.at("resource_id") == profiles.resource_ids[0]) {
      const auto& set = catalog.Get(p.offering, 0);
      CHECK(csv::ParseNumber(r.at("lambda")) == 1.0);
      CHECK(rec == Discretize(2.0 * stage2, set));
      CHECK(r.at("explanation").find(";personalized") != std::string::npos);
    }
    personalized += rec != stage2;
  }
  CHECK(personalized >= 1);
}

TEST_CASE("update-profiles with no signals only bumps the version") {
  testing::TempDir dir("pipe_update");
  PipelineConfig cfg = SmallConfig(dir.path());
  std::ostringstream log;
  LambdaStore store(std::vector<std::string>{"GeneralPurpose"});
  store.Register("c", "s", "r");
  Propagate(store, {{"c", "s", "r", "GeneralPurpose"}, 1.0}, PropagationConfig{});
  store.Save(dir / "lambda_store.json");
  WriteSignals(dir / "signals.csv", std::vector<SatisfactionSignal>{});
  REQUIRE(CmdUpdateProfiles(cfg, log) == kExitOk);
  const auto after = LambdaStore::Load(dir / "lambda_store.json");
  CHECK(after.version() == store.version() + 1);
  CHECK(after.Lookup("c", "s", "r", "GeneralPurpose") ==
        store.Lookup("c", "s", "r", "GeneralPurpose"));
}

TEST_CASE("tickets become signals") {
  testing::TempDir dir("pipe_tickets");
  PipelineConfig cfg = SmallConfig(dir.path());
  {
    csv::Writer out(dir / "tickets.csv");
    out.Row({"customer", "subscription", "resource_group", "stratification", "symptoms",
             "subject", "resolution"});
    out.Row({"c", "s", "r", "GeneralPurpose", "high cpu usage", "", "scaled up"});
    out.Row({"c", "s", "r", "GeneralPurpose", "unrelated", "", "restarted"});
    out.Close();
  }
  std::ostringstream log;
  REQUIRE(CmdUpdateProfiles(cfg, log) == kExitOk);
  CHECK(LambdaStore::Load(dir / "lambda_store.json").Lookup("c", "s", "r", "GeneralPurpose") ==
        doctest::Approx(cfg.propagation.learning_rate));
}

TEST_CASE("a held store lock maps to the input exit code") {
  testing::TempDir dir("pipe_lock");
  PipelineConfig cfg = SmallConfig(dir.path());
  StoreLock held(dir / "lambda_store.json");
  std::ostringstream log;
  try {
    CmdUpdateProfiles(cfg, log);
    FAIL("expected a lock error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLocked);
    CHECK(ExitCodeFor(e) == kExitInput);
  }
}

TEST_CASE("an empty profile file writes no model") {
  testing::TempDir dir("pipe_empty");
  PipelineConfig cfg = SmallConfig(dir.path());
  std::ostringstream log;
  REQUIRE(CmdGenSynthetic(cfg, log) == kExitOk);
  REQUIRE(CmdRightsize(cfg, log) == kExitOk);
  {
    std::ofstream out(dir / "profiles.csv");
    out << "resource_id,offering";
    for (const auto& f : SyntheticFeatureNames()) out << "," << f;
    out << "\n";
  }
  CHECK_THROWS_AS(CmdTrain(cfg, log), Error);
  CHECK_FALSE(fs::exists(dir / "prediction_store.csv"));
  CHECK_FALSE(fs::exists(dir / "te_model.json"));
}

TEST_CASE("a failed validation gate writes no model") {
  testing::TempDir dir("pipe_gate");
  PipelineConfig cfg = SmallConfig(dir.path());
  cfg.validation_gate = 0.0;
  std::ostringstream log;
  REQUIRE(CmdGenSynthetic(cfg, log) == kExitOk);
  REQUIRE(CmdRightsize(cfg, log) == kExitOk);
  CHECK(CmdTrain(cfg, log) == kExitGate);
  CHECK(fs::exists(dir / "validation_report.json"));
  CHECK_FALSE(fs::exists(dir / "prediction_store.csv"));
  CHECK_FALSE(fs::exists(dir / "split.csv"));
}

TEST_CASE("malformed telemetry above one percent fails the run") {
  testing::TempDir dir("pipe_bad");
  PipelineConfig cfg = SmallConfig(dir.path());
  std::ostringstream log;
  REQUIRE(CmdGenSynthetic(cfg, log) == kExitOk);
  std::size_t rows = 0;
  {
    std::ifstream in(dir / "telemetry.csv");
    for (std::string line; std::getline(in, line);) ++rows;
  }
  {
    std::ofstream out(dir / "telemetry.csv", std::ios::app);
    for (std::size_t k = 0; k < rows / 50; ++k) out << "garbage,row\n";
  }
  CHECK(CmdRightsize(cfg, log) == kExitInput);
}

TEST_CASE("unknown offerings get the default flag") {
  testing::TempDir dir("pipe_unknown");
  PipelineConfig cfg = SmallConfig(dir.path());
  std::ostringstream log;
  for (auto* cmd : {CmdGenSynthetic, CmdRightsize, CmdLearnHierarchy, CmdTrain}) {
    REQUIRE(cmd(cfg, log) == kExitOk);
  }
  ProfileTable t = ReadProfiles(dir / "profiles.csv");
  t.resource_ids.resize(2);
  t.profiles.resize(2);
  t.profiles[1].offering = Offering::Custom("Hyperscale");
  WriteProfiles(dir / "new.csv", t.feature_names, t.resource_ids, t.profiles);
  cfg.paths["predict_input"] = dir / "new.csv";
  cfg.paths["recommendations"] = dir / "new_recs.csv";
  REQUIRE(CmdPredict(cfg, log) == kExitOk);
  const auto recs = Rows(dir / "new_recs.csv");
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].at("explanation").find("unknown_offering") != std::string::npos);
  CHECK(recs[0].at("explanation").find("unknown_offering") == std::string::npos);
}

TEST_CASE("config files parse and reject unknown choices") {
  const auto cfg = PipelineConfig::FromJson(
      {{"output_dir", "x"}, {"provisioner", "target_encoding"}, {"seed", 4}});
  CHECK(cfg.provisioner == ProvisionerKind::kTargetEncoding);
  CHECK(cfg.output_dir == fs::path("x"));
  CHECK_THROWS_AS(PipelineConfig::FromJson({{"provisioner", "oracle"}}), Error);
}

}  // namespace
}  // namespace skurec
