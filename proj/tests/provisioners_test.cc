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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "skurec/datagen.h"
#include "skurec/provisioners.h"
#include "test_util.h"

namespace skurec {
namespace {

const Offering kGp(Offering::Kind::kGeneralPurpose);
const Offering kBurst(Offering::Kind::kBurstable);
const CandidateSet kPow2(kGp, {1, 2, 4, 8, 16, 32, 64, 128});

// Schema: Vertical > Customer > Server.
HierarchyModel ThreeLevelModel() {
  HierarchyModel m;
  m.feature_names = {"Vertical", "Customer", "Server"};
  m.chain = {0, 1, 2};
  return m;
}

LabeledProfile Row(std::string vertical, std::string customer, std::string server,
                   double label, Offering offering = kGp) {
  return {{{std::move(vertical), std::move(customer), std::move(server)}, offering},
          label};
}

TEST_CASE("nearest-rank percentile") {
  const std::vector<double> s = {1, 2, 3, 4, 5};
  CHECK(NearestRankPercentile(s, 50) == 3);
  CHECK(NearestRankPercentile(s, 0) == 1);
  CHECK(NearestRankPercentile(s, 100) == 5);
  CHECK(NearestRankPercentile(std::vector<double>{7}, 50) == 7);
  CHECK_THROWS_AS(NearestRankPercentile(std::vector<double>{}, 50), Error);
  CHECK_THROWS_AS(NearestRankPercentile(s, 101), Error);
}

TEST_CASE("percentile agrees with a counting oracle") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> value(0, 20);
  std::uniform_real_distribution<double> pct(0.0, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> sample(1 + trial % 41);
    for (double& v : sample) v = value(rng);
    const double p = trial % 5 == 0 ? 50.0 : pct(rng);
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    CHECK(NearestRankPercentile(sorted, p) == oracle::Percentile(sample, p));
    if (p == 50.0 && sample.size() % 2 == 1) {
      CHECK(NearestRankPercentile(sorted, p) == sorted[sorted.size() / 2]);
    }
  }
}

TEST_CASE("buckets group labels per level") {
  const std::vector<LabeledProfile> train = {
      Row("Insurance", "c1", "s1", 4), Row("Insurance", "c1", "s2", 4),
      Row("Insurance", "c2", "s3", 8), Row("Retail", "Insurance", "s4", 2)};
  const auto index = FitHierarchical(train, ThreeLevelModel(), HierarchicalConfig{});
  const auto* bucket = index.Bucket(0, "Insurance");
  REQUIRE(bucket != nullptr);
  CHECK(*bucket == std::vector<double>{2, 2, 3});
  // The same string at another level has its own bucket.
  const auto* other = index.Bucket(1, "Insurance");
  REQUIRE(other != nullptr);
  CHECK(*other == std::vector<double>{1});
  for (const auto& level : index.levels()) {
    std::size_t total = 0;
    for (const auto& [_, b] : level.buckets) total += b.size();
    CHECK(total == train.size());
  }
}

TEST_CASE("bucket sizes sum to the training size on synthetic data") {
  SyntheticSpec spec;
  spec.customers = 10;
  spec.duration_hours = 1.0;
  const Dataset ds = GenerateSynthetic(spec);
  std::vector<LabeledProfile> train;
  std::mt19937_64 rng(1);
  for (const auto& p : ds.profiles) train.push_back({p, static_cast<double>(1 << (rng() % 5))});
  HierarchyModel model;
  model.feature_names = ds.feature_names;
  for (std::size_t m = 0; m < ds.feature_names.size(); ++m) model.chain.push_back(m);
  const auto index = FitHierarchical(train, model, HierarchicalConfig{});
  for (const auto& level : index.levels()) {
    std::size_t total = 0;
    for (const auto& [_, b] : level.buckets) total += b.size();
    CHECK(total == train.size());
  }
}

TEST_CASE("coarse bucket answers when finer ones are small") {
  std::vector<LabeledProfile> train;
  // Vertical "Insurance": 20 x 2, 15 x 4, 5 x 8. Server "s0" holds 3 rows.
  for (int i = 0; i < 40; ++i) {
    const double label = i < 20 ? 2 : i < 35 ? 4 : 8;
    train.push_back(Row("Insurance", "c" + std::to_string(i), i < 3 ? "s0" : "s" + std::to_string(i), label));
  }
  const auto index = FitHierarchical(train, ThreeLevelModel(), HierarchicalConfig{});
  const auto pred = PredictHierarchical({{"Insurance", "c0", "s0"}, kGp}, index, kPow2);
  CHECK(pred.capacity == 4);
  CHECK(pred.matched_level == "Vertical");
  CHECK(pred.support == 40);
  CHECK_FALSE(pred.default_fallback);
}

TEST_CASE("most granular qualifying bucket wins") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 10; ++i) train.push_back(Row("V", "C", "S", 32));
  for (int i = 0; i < 30; ++i) train.push_back(Row("V", "C" + std::to_string(i), "T" + std::to_string(i), 2));
  const auto index = FitHierarchical(train, ThreeLevelModel(), HierarchicalConfig{});
  const auto pred = PredictHierarchical({{"V", "C", "S"}, kGp}, index, kPow2);
  CHECK(pred.matched_level == "Server");
  CHECK(pred.capacity == 32);
}

TEST_CASE("unseen or missing values fall back to the default") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 20; ++i) train.push_back(Row("V", "C", "S", 16));
  const auto index = FitHierarchical(train, ThreeLevelModel(), HierarchicalConfig{});
  const auto unseen = PredictHierarchical({{"X", "Y", "Z"}, kGp}, index, kPow2);
  CHECK(unseen.default_fallback);
  CHECK(unseen.capacity == kPow2.min());
  // A MISSING token never matches, even if it was a training value.
  std::vector<LabeledProfile> with_missing;
  for (int i = 0; i < 20; ++i) with_missing.push_back(Row("MISSING", "MISSING", "MISSING", 16));
  const auto idx2 = FitHierarchical(with_missing, ThreeLevelModel(), HierarchicalConfig{});
  CHECK(PredictHierarchical({{"MISSING", "MISSING", "MISSING"}, kGp}, idx2, kPow2).default_fallback);
}

TEST_CASE("hierarchical prediction needs a fitted index and a valid config") {
  CHECK_THROWS_AS(PredictHierarchical({{"a", "b", "c"}, kGp}, BucketIndex{}, kPow2), Error);
  HierarchicalConfig bad;
  bad.min_bucket_size = 0;
  const std::vector<LabeledProfile> train = {Row("a", "b", "c", 2)};
  CHECK_THROWS_AS(FitHierarchical(train, ThreeLevelModel(), bad), Error);
  bad = {};
  bad.percentile = 100;
  CHECK_THROWS_AS(FitHierarchical(train, ThreeLevelModel(), bad), Error);
}

TEST_CASE("hierarchical properties on random data") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<LabeledProfile> train;
    const int rows = 20 + static_cast<int>(rng() % 200);
    for (int i = 0; i < rows; ++i) {
      const auto s = rng() % 40;
      train.push_back(Row("v" + std::to_string(s % 3), "c" + std::to_string(s % 12),
                          "s" + std::to_string(s), static_cast<double>(1 << (rng() % 7))));
    }
    const ProfileRecord x{{"v" + std::to_string(rng() % 4), "c" + std::to_string(rng() % 13),
                           "s" + std::to_string(rng() % 41)},
                          kGp};
    std::size_t previous_depth = 0;
    for (std::size_t n : {40u, 20u, 10u, 5u, 1u}) {
      HierarchicalConfig cfg;
      cfg.min_bucket_size = n;
      const auto index = FitHierarchical(train, ThreeLevelModel(), cfg);
      const auto pred = PredictHierarchical(x, index, kPow2);
      CHECK(kPow2.Contains(pred.capacity));
      // Depth of the answering level: 0 for the default, 3 for Server.
      std::size_t depth = 0;
      if (!pred.default_fallback) {
        depth = pred.matched_level == "Vertical" ? 1 : pred.matched_level == "Customer" ? 2 : 3;
      }
      CHECK(depth >= previous_depth);
      previous_depth = depth;
    }
  }
}

TEST_CASE("target encoding uses the mean log label") {
  const std::vector<LabeledProfile> train = {
      {{{"Beverage"}, kGp}, 2}, {{{"Beverage"}, kGp}, 4}, {{{"Beverage"}, kGp}, 8},
      {{{"Steel"}, kGp}, 16}};
  const auto enc = EncodeTrainingSet(train, 1, TargetEncodingConfig{});
  CHECK(enc.encoder.Encode(0, "Beverage") == doctest::Approx(2.0));
  CHECK(enc.encoder.Encode(0, "Steel") == doctest::Approx(4.0));
  CHECK(enc.encoder.global_mean() == doctest::Approx(2.5));
  CHECK(enc.encoder.Encode(0, "unseen") == doctest::Approx(2.5));
  CHECK(enc.encoder.Encode(0, "MISSING") == doctest::Approx(2.5));
  REQUIRE(enc.labels.size() == 4);
  CHECK(enc.labels[0] == doctest::Approx(1.0));

  TargetEncodingConfig pct;
  pct.aggregator = Aggregator::kPercentile;
  pct.aggregator_percentile = 100;
  CHECK(EncodeTrainingSet(train, 1, pct).encoder.Encode(0, "Beverage") == doctest::Approx(3.0));
}

TEST_CASE("identifier features encode to the global mean") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 8; ++i) {
    train.push_back({{{"g" + std::to_string(i % 2), "id" + std::to_string(i)}, kGp},
                     static_cast<double>(1 << i)});
  }
  const auto enc = EncodeTrainingSet(train, 2, TargetEncodingConfig{});
  CHECK(enc.encoder.Encode(1, "id3") == enc.encoder.global_mean());
  CHECK(enc.encoder.Encode(0, "g1") != enc.encoder.global_mean());
  TargetEncodingConfig keep;
  keep.skip_identifier_features = false;
  CHECK(EncodeTrainingSet(train, 2, keep).encoder.Encode(1, "id3") == doctest::Approx(3.0));
}

TEST_CASE("depth-zero ensemble predicts the global mean") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 30; ++i) {
    train.push_back({{{"v" + std::to_string(i % 3)}, kGp}, static_cast<double>(1 << (i % 3))});
  }
  TargetEncodingConfig cfg;
  cfg.forest.num_trees = 1;
  cfg.forest.tree.max_depth = 0;
  cfg.forest.bootstrap = false;
  const auto model = FitTargetEncoding(train, 1, cfg);
  for (const char* v : {"v0", "v1", "v2", "other"}) {
    CHECK(model.PredictTransformed({{v}, kGp}) == doctest::Approx(1.0));
  }
}

TEST_CASE("a perfectly partitioning feature is learned") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 40; ++i) {
    const bool small = i % 2 == 0;
    train.push_back({{{small ? "a" : "b", "n" + std::to_string(i % 5)}, kGp}, small ? 2.0 : 8.0});
  }
  TargetEncodingConfig cfg;
  cfg.forest.num_trees = 20;
  const auto model = FitTargetEncoding(train, 2, cfg);
  CHECK(PredictTargetEncoding({{"a", "n1"}, kGp}, model, kPow2).capacity == 2);
  CHECK(PredictTargetEncoding({{"b", "n1"}, kGp}, model, kPow2).capacity == 8);
  // Seen verbatim with a unanimous label.
  std::vector<LabeledProfile> pure(12, LabeledProfile{{{"x", "y"}, kGp}, 4.0});
  const auto pure_model = FitTargetEncoding(pure, 2, cfg);
  CHECK(PredictTargetEncoding({{"x", "y"}, kGp}, pure_model, kPow2).capacity == 4);
}

TEST_CASE("all-missing rows encode to the global mean vector") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 20; ++i) {
    train.push_back({{{"a" + std::to_string(i % 2), "b" + std::to_string(i % 4)}, kGp},
                     static_cast<double>(2 << (i % 4))});
  }
  const auto model = FitTargetEncoding(train, 2, TargetEncodingConfig{});
  const ProfileRecord missing{{"MISSING", "MISSING"}, kGp};
  const auto encoded = model.encoder().Encode(missing);
  for (double v : encoded) CHECK(v == model.encoder().global_mean());
  CHECK(model.PredictTransformed(missing) == model.forest().Predict(encoded));
}

TEST_CASE("empty schema predicts the discretized global mean") {
  const std::vector<LabeledProfile> train = {{{{}, kGp}, 2}, {{{}, kGp}, 8}};
  const auto model = FitTargetEncoding(train, 0, TargetEncodingConfig{});
  const auto pred = PredictTargetEncoding({{}, kGp}, model, kPow2);
  CHECK(pred.raw == doctest::Approx(4.0));
  CHECK(pred.capacity == 4);
}

TEST_CASE("target encoding needs a fitted model and training rows") {
  CHECK_THROWS_AS(PredictTargetEncoding({{"a"}, kGp}, TargetEncodingModel{}, kPow2), Error);
  CHECK_THROWS_AS(FitTargetEncoding({}, 1, TargetEncodingConfig{}), Error);
}

TEST_CASE("target encoding model round trips and is deterministic") {
  std::mt19937_64 rng(23);
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 60; ++i) {
    train.push_back({{{"a" + std::to_string(rng() % 3), "b" + std::to_string(rng() % 7)}, kGp},
                     static_cast<double>(1 << (rng() % 6))});
  }
  TargetEncodingConfig cfg;
  cfg.forest.num_trees = 10;
  cfg.forest.seed = 3;
  const auto a = FitTargetEncoding(train, 2, cfg);
  const auto b = FitTargetEncoding(train, 2, cfg);
  CHECK(a.ToJson() == b.ToJson());
  const auto c = TargetEncodingModel::FromJson(a.ToJson());
  for (const auto& row : train) {
    CHECK(c.PredictTransformed(row.profile) == a.PredictTransformed(row.profile));
  }
}

SkuCatalog TwoOfferingCatalog() {
  SkuCatalog catalog(std::vector<ResourceDim>{{0, "vcores"}});
  catalog.Set(kGp, 0, CandidateSet(kGp, {2, 4, 8, 16, 32}));
  catalog.Set(kBurst, 0, CandidateSet(kBurst, {1, 2, 4}));
  return catalog;
}

TEST_CASE("provisioners are stratified by offering") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 20; ++i) {
    train.push_back(Row("V", "C", "S" + std::to_string(i), 16, kGp));
    train.push_back(Row("V", "C", "B" + std::to_string(i), 1, kBurst));
  }
  const auto catalog = TwoOfferingCatalog();
  const auto hier = HierarchicalProvisioner::Fit(train, ThreeLevelModel(), catalog, 0,
                                                 HierarchicalConfig{});
  CHECK(hier.Predict({{"V", "C", "new"}, kGp}).capacity == 16);
  CHECK(hier.Predict({{"V", "C", "new"}, kBurst}).capacity == 1);
  CHECK(hier.DefaultOnlyOfferings().empty());

  // Changing Burstable labels leaves GeneralPurpose answers alone.
  auto shifted = train;
  for (auto& row : shifted) {
    if (row.profile.offering == kBurst) row.label = 4;
  }
  const auto hier2 = HierarchicalProvisioner::Fit(shifted, ThreeLevelModel(), catalog, 0,
                                                  HierarchicalConfig{});
  CHECK(hier2.ExportStore().rows().size() == hier.ExportStore().rows().size());
  CHECK(hier2.Predict({{"V", "C", "S3"}, kGp}).capacity ==
        hier.Predict({{"V", "C", "S3"}, kGp}).capacity);

  TargetEncodingConfig cfg;
  cfg.forest.num_trees = 5;
  const auto te = TargetEncodingProvisioner::Fit(train, 3, catalog, 0, cfg);
  CHECK(te.Predict({{"V", "C", "x"}, kGp}).capacity == 16);
  CHECK(te.Predict({{"V", "C", "x"}, kBurst}).capacity == 1);
  const auto te2 = TargetEncodingProvisioner::FromJson(te.ToJson());
  CHECK(te2.Predict({{"V", "C", "x"}, kGp}).capacity == 16);
}

TEST_CASE("offerings with few rows answer with the default") {
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 20; ++i) train.push_back(Row("V", "C", "S", 16, kGp));
  for (int i = 0; i < 3; ++i) train.push_back(Row("V", "C", "S", 4, kBurst));
  const auto catalog = TwoOfferingCatalog();
  const auto hier = HierarchicalProvisioner::Fit(train, ThreeLevelModel(), catalog, 0,
                                                 HierarchicalConfig{}, 10);
  CHECK(hier.DefaultOnlyOfferings() == std::vector<Offering>{kBurst});
  const auto pred = hier.Predict({{"V", "C", "S"}, kBurst});
  CHECK(pred.default_fallback);
  CHECK(pred.capacity == 1);
  CHECK_THROWS_AS(hier.Predict({{"V", "C", "S"}, Offering::Custom("Gen5")}), Error);
}

TEST_CASE("prediction store lookups fall back when keys are removed") {
  PredictionStore store({{"GeneralPurpose", "Vertical", "V", 8, 40},
                         {"GeneralPurpose", "Customer", "C", 16, 12},
                         {"GeneralPurpose", "Server", "S", 32, 10}});
  const std::vector<std::pair<std::string, std::string>> q = {
      {"Vertical", "V"}, {"Customer", "C"}, {"Server", "S"}};
  CHECK(store.Lookup("GeneralPurpose", q)->capacity == 32);
  CHECK(store.Erase("GeneralPurpose", "Server", "S"));
  CHECK(store.Lookup("GeneralPurpose", q)->capacity == 16);
  CHECK(store.Erase("GeneralPurpose", "Customer", "C"));
  CHECK(store.Lookup("GeneralPurpose", q)->level == "Vertical");
  CHECK(store.Erase("GeneralPurpose", "Vertical", "V"));
  CHECK_FALSE(store.Lookup("GeneralPurpose", q).has_value());
  CHECK_FALSE(store.Erase("GeneralPurpose", "Vertical", "V"));
  CHECK_FALSE(store.Lookup("Burstable", q).has_value());
  CHECK_THROWS_AS(PredictionStore({{"a", "b", "c", 1, 1}, {"a", "b", "c", 2, 1}}), Error);
}

TEST_CASE("exported store matches in-memory predictions") {
  std::mt19937_64 rng(24);
  std::vector<LabeledProfile> train;
  for (int i = 0; i < 400; ++i) {
    const auto s = rng() % 60;
    train.push_back(Row("v" + std::to_string(s % 4), "c" + std::to_string(s % 20),
                        "s" + std::to_string(s), static_cast<double>(2 << (rng() % 4))));
  }
  const auto catalog = TwoOfferingCatalog();
  const auto hier = HierarchicalProvisioner::Fit(train, ThreeLevelModel(), catalog, 0,
                                                 HierarchicalConfig{});
  testing::TempDir dir("store");
  hier.ExportStore().Save(dir / "store.csv");
  const auto store = PredictionStore::Load(dir / "store.csv");
  for (int i = 0; i < 100; ++i) {
    const ProfileRecord x{{"v" + std::to_string(rng() % 5), "c" + std::to_string(rng() % 25),
                           "s" + std::to_string(rng() % 70)},
                          kGp};
    const auto direct = hier.Predict(x);
    const auto found = store.Lookup("GeneralPurpose", std::vector<std::pair<std::string, std::string>>{
                                                          {"Vertical", x.values[0]},
                                                          {"Customer", x.values[1]},
                                                          {"Server", x.values[2]}});
    if (direct.default_fallback) {
      CHECK_FALSE(found.has_value());
    } else {
      REQUIRE(found.has_value());
      CHECK(found->capacity == direct.capacity);
      CHECK(found->level == direct.matched_level);
      CHECK(found->support == direct.support);
    }
  }
}

}  // namespace
}  // namespace skurec
