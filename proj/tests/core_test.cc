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

#include <cmath>
#include <random>

#include "doctest.h"
#include "skurec/core.h"

namespace skurec {
namespace {

WorkloadTrace Trace(std::initializer_list<std::pair<double, double>> samples) {
  WorkloadTrace t("r", 1);
  for (auto [ts, v] : samples) t.Append(ts, std::vector<double>{v});
  return t;
}

TEST_CASE("resample keeps the per-bin maximum") {
  const auto w = Resample(Trace({{0.2, 1.0}, {3.1, 2.0}, {4.9, 1.5}, {7.0, 3.0}}), 5.0);
  REQUIRE(w.size() == 2);
  CHECK(w.bin(0) == 0);
  CHECK(w.value(0, 0) == 2.0);
  CHECK(w.bin(1) == 1);
  CHECK(w.value(1, 0) == 3.0);
}

TEST_CASE("resample of a single sample") {
  const auto w = Resample(Trace({{0.0, 5.0}}), 5.0);
  REQUIRE(w.size() == 1);
  CHECK(w.bin(0) == 0);
  CHECK(w.value(0, 0) == 5.0);
}

TEST_CASE("resample drops empty bins") {
  const auto w = Resample(Trace({{10.0, 1.0}, {12.0, 4.0}, {14.9, 2.0}}), 5.0);
  REQUIRE(w.size() == 1);
  CHECK(w.bin(0) == 2);
  CHECK(w.value(0, 0) == 4.0);
}

TEST_CASE("resample rejects empty traces and bad widths") {
  WorkloadTrace empty("r", 1);
  try {
    Resample(empty, 5.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyTrace);
  }
  CHECK_THROWS_AS(Resample(Trace({{0.0, 1.0}}), 0.0), Error);
}

TEST_CASE("trace rejects decreasing timestamps and negative usage") {
  WorkloadTrace t("r", 1);
  t.Append(5.0, std::vector<double>{1.0});
  CHECK_THROWS_AS(t.Append(4.0, std::vector<double>{1.0}), Error);
  CHECK_THROWS_AS(t.Append(6.0, std::vector<double>{-1.0}), Error);
}

TEST_CASE("resampled values stay within the raw maximum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_real_distribution<double> gap(0.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    WorkloadTrace t("r", 2);
    double ts = 0.0;
    const int n = 1 + trial % 50;
    for (int i = 0; i < n; ++i) {
      ts += gap(rng);
      t.Append(ts, std::vector<double>{u(rng), u(rng)});
    }
    const auto w = Resample(t, 5.0);
    const auto raw = t.PeakUsage();
    const auto binned = w.PeakUsage();
    CHECK(binned[0] == raw[0]);
    CHECK(binned[1] == raw[1]);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w.bin(i) > w.bin(i - 1));
  }
}

TEST_CASE("resample is idempotent on bin-aligned samples") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    WorkloadTrace t("r", 1);
    for (int n = 0; n < 30; ++n) {
      if (rng() % 3 == 0) continue;
      t.Append(5.0 * n, std::vector<double>{u(rng)});
    }
    if (t.empty()) continue;
    const auto once = Resample(t, 5.0);
    WorkloadTrace again("r", 1);
    for (std::size_t i = 0; i < once.size(); ++i) {
      again.Append(5.0 * static_cast<double>(once.bin(i)), once.values(i));
    }
    const auto twice = Resample(again, 5.0);
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(twice.bin(i) == once.bin(i));
      CHECK(twice.value(i, 0) == once.value(i, 0));
    }
  }
}

TEST_CASE("log transform examples") {
  const LogTransform xi;
  CHECK(xi.Forward(4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(xi.Forward(1.0) == 0.0);
  CHECK(xi.Inverse(3.5) == doctest::Approx(11.3137084989847604).epsilon(1e-12));
  CHECK_THROWS_AS(xi.Forward(0.0), Error);
  CHECK_THROWS_AS(xi.Forward(-1.0), Error);
  CHECK_THROWS_AS(LogTransform(1.0), Error);
}

TEST_CASE("log transform round trip") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> exponent(-3.0, 6.0);
  std::uniform_real_distribution<double> base(1.1, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const LogTransform xi(trial % 2 == 0 ? 2.0 : base(rng));
    const double v = std::pow(10.0, exponent(rng));
    CHECK(std::abs(xi.Inverse(xi.Forward(v)) - v) <= 1e-9 * v);
  }
}

TEST_CASE("discretize examples") {
  const std::vector<double> c = {1, 2, 4, 8, 16, 32, 64, 128};
  // log2 of 8 * sqrt(2) sits on the midpoint between 8 and 16.
  CHECK(Discretize(8.0 * std::sqrt(2.0), c) == 16.0);
  CHECK(Discretize(11.31, c) == 8.0);
  CHECK(Discretize(11.32, c) == 16.0);
  CHECK(Discretize(4.0, c) == 4.0);
  CHECK(Discretize(300.0, c) == 128.0);
  CHECK(Discretize(0.01, c) == 1.0);
  CHECK_THROWS_AS(Discretize(-1.0, c), Error);
  CHECK_THROWS_AS(Discretize(1.0, std::vector<double>{}), Error);
}

TEST_CASE("discretize returns members and fixes members") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.05, 200.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> c;
    double v = 0.5 + u(rng) / 50.0;
    const int size = 1 + trial % 9;
    for (int i = 0; i < size; ++i) {
      c.push_back(v);
      v *= 1.2 + u(rng) / 100.0;
    }
    const CandidateSet set(Offering(Offering::Kind::kBurstable), c);
    for (double member : c) CHECK(Discretize(member, set) == member);
    const double x = u(rng);
    const double d = Discretize(x, set);
    CHECK(set.Contains(d));
    // No other member is strictly closer in log space.
    for (double member : c) {
      CHECK(std::abs(std::log2(d) - std::log2(x)) <=
            std::abs(std::log2(member) - std::log2(x)) + 1e-9);
    }
  }
}

TEST_CASE("candidate sets must be strictly ascending and positive") {
  const Offering gp(Offering::Kind::kGeneralPurpose);
  CHECK_THROWS_AS(CandidateSet(gp, {}), Error);
  CHECK_THROWS_AS(CandidateSet(gp, {2, 2}), Error);
  CHECK_THROWS_AS(CandidateSet(gp, {4, 2}), Error);
  CHECK_THROWS_AS(CandidateSet(gp, {0, 2}), Error);
  CHECK_NOTHROW(CandidateSet(gp, {1, 2, 4}));
}

TEST_CASE("capacity vectors must be positive") {
  CHECK_THROWS_AS(CapacityVector({1.0, 0.0}), Error);
  CHECK(CapacityVector({1.0, 2.0}).With(1, 4.0)[1] == 4.0);
}

TEST_CASE("dimensions must be dense and unique") {
  CHECK_NOTHROW(ValidateDims(std::vector<ResourceDim>{{0, "vCores"}, {1, "memoryGB"}}));
  CHECK_THROWS_AS(ValidateDims(std::vector<ResourceDim>{{0, "a"}, {2, "b"}}), Error);
  CHECK_THROWS_AS(ValidateDims(std::vector<ResourceDim>{{0, "a"}, {1, "a"}}), Error);
}

TEST_CASE("offering names round trip") {
  for (const char* name : {"Burstable", "GeneralPurpose", "MemoryOptimized", "Gen5"}) {
    CHECK(Offering::Parse(name).Name() == name);
  }
  CHECK(Offering::Parse("Gen5").kind() == Offering::Kind::kCustom);
}

}  // namespace
}  // namespace skurec
