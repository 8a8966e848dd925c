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

#include <random>

#include "doctest.h"
#include "skurec/datagen.h"
#include "skurec/hierarchy.h"
#include "skurec/rightsizer.h"

namespace skurec {
namespace {

SyntheticSpec SmallSpec(std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.customers = 12;
  spec.duration_hours = 2.0;
  spec.seed = seed;
  return spec;
}

// Rightsized vCores for every resource.
std::vector<double> RightsizeAll(const Dataset& ds) {
  std::vector<double> out;
  const RightsizerConfig cfg;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& set = ds.catalog.Get(ds.profiles[i].offering, 0);
    const auto w = Resample(ds.traces[i], cfg.bin_width_min);
    out.push_back(Rightsize(w, ds.user_capacity[i][0], set, cfg).capacity[0]);
  }
  return out;
}

TEST_CASE("generation is deterministic in the seed") {
  const Dataset a = GenerateSynthetic(SmallSpec(5));
  const Dataset b = GenerateSynthetic(SmallSpec(5));
  const Dataset c = GenerateSynthetic(SmallSpec(6));
  REQUIRE(a.size() == b.size());
  bool traces_equal = true, differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.resource_ids[i] == b.resource_ids[i]);
    CHECK(a.profiles[i].values == b.profiles[i].values);
    CHECK(a.user_capacity[i] == b.user_capacity[i]);
    traces_equal = traces_equal && a.traces[i].size() == b.traces[i].size();
    for (std::size_t k = 0; traces_equal && k < a.traces[i].size(); ++k) {
      traces_equal = a.traces[i].usage(k)[0] == b.traces[i].usage(k)[0];
    }
    differs = differs || a.profiles[i].values != c.profiles[i].values;
  }
  CHECK(traces_equal);
  CHECK(differs);
}

TEST_CASE("generated data is internally consistent") {
  const Dataset ds = GenerateSynthetic(SmallSpec());
  CHECK(ds.size() == 12u * 2 * 4 * 5);
  CHECK(ds.feature_names == SyntheticFeatureNames());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.traces[i].BoundedBy(ds.user_capacity[i]));
    CHECK(ds.catalog.Get(ds.profiles[i].offering, 0).Contains(ds.user_capacity[i][0]));
  }
}

TEST_CASE("generated profiles form the declared hierarchy") {
  const Dataset ds = GenerateSynthetic(SmallSpec());
  const auto table = CategoricalTable::FromProfiles(ds.feature_names, ds.profiles);
  const auto model = LearnHierarchy(table, 0.6);
  const auto names = model.ChainNames();
  // Server version is unrelated to the rest.
  CHECK(std::find(names.begin(), names.end(), "ServerVersion") == names.end());
  CHECK(names.front() == "SegmentName");
  CHECK(names.back() == "ServerName");
}

TEST_CASE("two-level synthetic hierarchy is recovered") {
  StrictHierarchySpec spec;
  spec.chain = {2, 4};
  spec.noise = {};
  spec.rows = 10;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto sample = GenerateStrictHierarchy(spec);
    const std::size_t coarse = sample.table.cardinality(sample.chain[0]);
    if (coarse < 2 || sample.table.cardinality(sample.chain[1]) <= coarse) {
      continue;  // ten rows may not show every value
    }
    ++checked;
    CHECK(LearnHierarchy(sample.table, 0.6).chain == sample.chain);
  }
  CHECK(checked >= 10);
}

TEST_CASE("idle workloads rightsize to the smallest candidate") {
  SyntheticSpec spec = SmallSpec();
  spec.demand_scale = 0.0;
  const Dataset ds = GenerateSynthetic(spec);
  const auto labels = RightsizeAll(ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(labels[i] == ds.catalog.Get(ds.profiles[i].offering, 0).min());
  }
}

TEST_CASE("upscale sums the factors drawn for each value") {
  // Find values whose draws are (1, 0, 3) and (0, 0, 0).
  const std::uint64_t seed = 3;
  auto find = [&](const char* feature, double factor, double want) {
    for (int k = 0;; ++k) {
      const std::string v = std::string(feature) + std::to_string(k);
      if (AssignedFactor(feature, v, factor, seed) == want) return v;
    }
  };
  Dataset ds;
  ds.feature_names = {"ResourceGroup", "CloudCustomerGuid", "VerticalName"};
  ds.catalog = DefaultCatalog();
  const Offering gp(Offering::Kind::kGeneralPurpose);
  const std::vector<std::vector<std::string>> rows = {
      {find("ResourceGroup", 1, 1), find("CloudCustomerGuid", 1, 0), find("VerticalName", 3, 3)},
      {find("ResourceGroup", 1, 0), find("CloudCustomerGuid", 1, 0), find("VerticalName", 3, 0)}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.resource_ids.push_back("r" + std::to_string(i));
    ds.profiles.push_back({rows[i], gp});
    WorkloadTrace t(ds.resource_ids.back(), 1);
    for (int k = 0; k < 6; ++k) t.Append(2.5 * k, std::vector<double>{0.25 * (k % 3)});
    ds.traces.push_back(t);
    ds.user_capacity.push_back(CapacityVector({2}));
  }
  ds.RebuildIndex();
  const Dataset before = ds;
  UpscaleSpec spec;
  spec.seed = seed;
  const auto chi = Upscale(ds, spec);
  CHECK(chi == std::vector<double>{4, 0});
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double factor = std::exp2(chi[i]);
    REQUIRE(ds.traces[i].size() == before.traces[i].size());
    for (std::size_t k = 0; k < ds.traces[i].size(); ++k) {
      CHECK(ds.traces[i].timestamp(k) == before.traces[i].timestamp(k));
      CHECK(ds.traces[i].usage(k)[0] == before.traces[i].usage(k)[0] * factor);
    }
  }
  CHECK(ds.user_capacity[0][0] == 32);
  CHECK(ds.user_capacity[1] == before.user_capacity[1]);

  UpscaleSpec unknown;
  unknown.factors = {{"NoSuchFeature", 1.0}};
  CHECK_THROWS_AS(Upscale(ds, unknown), Error);
}

TEST_CASE("factor assignment is a seeded coin flip") {
  int ones = 0;
  for (int k = 0; k < 2000; ++k) {
    const double f = AssignedFactor("F", "v" + std::to_string(k), 1.0, 9);
    CHECK((f == 0.0 || f == 1.0));
    ones += f == 1.0;
    CHECK(f == AssignedFactor("F", "v" + std::to_string(k), 1.0, 9));
  }
  CHECK(ones > 900);
  CHECK(ones < 1100);
}

TEST_CASE("upscaled data keeps its invariants and spreads the labels") {
  Dataset ds = GenerateSynthetic(SmallSpec(2));
  const auto before = RightsizeAll(ds);
  const Dataset original = ds;
  const auto chi = Upscale(ds, UpscaleSpec{});
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(chi[i] >= 0.0);
    CHECK(chi[i] <= 5.0);
    CHECK(chi[i] == std::round(chi[i]));
    CHECK(ds.traces[i].size() == original.traces[i].size());
    CHECK(ds.traces[i].BoundedBy(ds.user_capacity[i]));
  }
  const auto after = RightsizeAll(ds);
  auto low_share = [&](const std::vector<double>& labels) {
    std::size_t low = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto values = ds.catalog.Get(ds.profiles[i].offering, 0).values();
      low += labels[i] <= values[std::min<std::size_t>(1, values.size() - 1)];
    }
    return static_cast<double>(low) / static_cast<double>(ds.size());
  };
  CHECK(low_share(before) > 0.8);
  CHECK(low_share(after) < low_share(before) - 0.2);
}

TEST_CASE("scaling a workload up never lowers its rightsized capacity") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CandidateSet set(Offering(Offering::Kind::kGeneralPurpose),
                         {1, 2, 4, 8, 16, 32, 64, 128, 256, 512});
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 40);
    for (double& x : v) x = 4.0 * u(rng);
    const auto w = ResampledWorkload::FromValues(v);
    auto scaled = w;
    scaled.Scale(std::exp2(1 + trial % 4));
    // User capacity at the top keeps both workloads uncensored.
    const double a = Rightsize(w, 512, set, RightsizerConfig{}).capacity[0];
    const double b = Rightsize(scaled, 512, set, RightsizerConfig{}).capacity[0];
    CHECK(b >= a);
  }
}

TEST_CASE("spec JSON round trips") {
  SyntheticSpec spec = SmallSpec(77);
  spec.vertical_sd = 0.9;
  const auto back = SyntheticSpec::FromJson(spec.ToJson());
  CHECK(back.ToJson() == spec.ToJson());
  UpscaleSpec up;
  up.seed = 4;
  CHECK(UpscaleSpec::FromJson(up.ToJson()).ToJson() == up.ToJson());
}

}  // namespace
}  // namespace skurec
