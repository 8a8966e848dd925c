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
#include "skurec/personalizer.h"
#include "test_util.h"

namespace skurec {
namespace {

const std::vector<std::string> kStrats = {"B", "G", "M"};

// Customer A with subscriptions S1 {R1, R2} and S2 {R3, R4}; customer Z with
// one group.
LambdaStore SmallStore() {
  LambdaStore store(kStrats);
  store.Register("A", "S1", "R1");
  store.Register("A", "S1", "R2");
  store.Register("A", "S2", "R3");
  store.Register("A", "S2", "R4");
  store.Register("Z", "S9", "R9");
  return store;
}

PropagationConfig ExaggeratedConfig() {
  PropagationConfig cfg;
  cfg.learning_rate = 2.0;
  cfg.rho_r = 0.5;
  cfg.rho_s = 0.5;
  cfg.rho_c = 0.25;
  return cfg;
}

TEST_CASE("propagation reproduces the hand-derived deltas") {
  LambdaStore store = SmallStore();
  Propagate(store, {{"A", "S1", "R1", "G"}, 1.0}, ExaggeratedConfig());
  CHECK(store.Lookup("A", "S1", "R1", "G") == 2.0);
  CHECK(store.Lookup("A", "S1", "R1", "B") == 1.0);
  CHECK(store.Lookup("A", "S1", "R1", "M") == 1.0);
  CHECK(store.Lookup("A", "S1", "R2", "G") == 1.0);
  CHECK(store.Lookup("A", "S1", "R2", "B") == 0.5);
  CHECK(store.Lookup("A", "S1", "R2", "M") == 0.5);
  for (const char* rg : {"R3", "R4"}) {
    CHECK(store.Lookup("A", "S2", rg, "G") == 0.5);
    CHECK(store.Lookup("A", "S2", rg, "B") == 0.25);
    CHECK(store.Lookup("A", "S2", rg, "M") == 0.25);
  }
  for (const auto& st : kStrats) CHECK(store.Lookup("Z", "S9", "R9", st) == 0.0);
}

TEST_CASE("lookup defaults to zero and accumulates") {
  LambdaStore store = SmallStore();
  CHECK(store.Lookup("nobody", "x", "y", "G") == 0.0);
  const SatisfactionSignal sig{{"A", "S1", "R1", "G"}, 1.0};
  Propagate(store, sig, ExaggeratedConfig());
  Propagate(store, sig, ExaggeratedConfig());
  CHECK(store.Lookup("A", "S1", "R1", "G") == 4.0);
}

TEST_CASE("zero signals and zero decays") {
  LambdaStore store = SmallStore();
  const LambdaStore before = store;
  Propagate(store, {{"A", "S1", "R1", "G"}, 0.0}, ExaggeratedConfig());
  CHECK(store == before);

  PropagationConfig isolated = ExaggeratedConfig();
  isolated.rho_s = 0.0;
  isolated.rho_c = 0.0;
  Propagate(store, {{"A", "S1", "R1", "G"}, 1.0}, isolated);
  CHECK(store.Lookup("A", "S1", "R1", "G") == 2.0);
  CHECK(store.Lookup("A", "S1", "R1", "B") == 1.0);
  for (const auto& st : kStrats) {
    CHECK(store.Lookup("A", "S1", "R2", st) == 0.0);
    CHECK(store.Lookup("A", "S2", "R3", st) == 0.0);
  }
}

TEST_CASE("opposite signals restore a fresh store exactly") {
  LambdaStore store = SmallStore();
  const auto before = store.ToJson();
  Propagate(store, {{"A", "S1", "R1", "G"}, 1.0}, ExaggeratedConfig());
  Propagate(store, {{"A", "S1", "R1", "G"}, -1.0}, ExaggeratedConfig());
  for (const auto& c : store.Customers()) {
    for (const auto& s : store.Subscriptions(c)) {
      for (const auto& r : store.ResourceGroups(c, s)) {
        for (const auto& st : kStrats) CHECK(store.Lookup(c, s, r, st) == 0.0);
      }
    }
  }
}

LambdaStore RandomStore(std::mt19937_64& rng) {
  LambdaStore store(kStrats);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int c = 0; c < 3; ++c) {
    for (int s = 0; s < 3; ++s) {
      for (int r = 0; r < 3; ++r) {
        const std::string cs = "C" + std::to_string(c), ss = "S" + std::to_string(s),
                          rs = "R" + std::to_string(r);
        store.Register(cs, ss, rs);
        for (const auto& st : kStrats) {
          if (rng() % 2) store.Add({cs, ss, rs, st}, u(rng));
        }
      }
    }
  }
  return store;
}

SatisfactionSignal RandomSignal(std::mt19937_64& rng, double gamma) {
  return {{"C" + std::to_string(rng() % 3), "S" + std::to_string(rng() % 3),
           "R" + std::to_string(rng() % 3), kStrats[rng() % 3]},
          gamma};
}

template <typename Fn>
void ForEachEntry(const LambdaStore& store, Fn&& fn) {
  for (const auto& c : store.Customers()) {
    for (const auto& s : store.Subscriptions(c)) {
      for (const auto& r : store.ResourceGroups(c, s)) {
        for (const auto& st : store.stratifications()) fn(LambdaKey{c, s, r, st});
      }
    }
  }
}

TEST_CASE("propagation properties on random stores") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  const PropagationConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    const LambdaStore base = RandomStore(rng);
    const double g1 = g(rng), g2 = g(rng);
    const SatisfactionSignal sig = RandomSignal(rng, g1);

    // Opposite signals cancel.
    LambdaStore restored = base;
    Propagate(restored, sig, cfg);
    Propagate(restored, {sig.target, -g1}, cfg);
    ForEachEntry(base, [&](const LambdaKey& k) {
      CHECK(restored.Lookup(k) == doctest::Approx(base.Lookup(k)).epsilon(1e-12));
    });

    // Linearity: two signals equal one with the summed strength.
    if (std::abs(g1 + g2) <= 1.0) {
      LambdaStore twice = base, once = base;
      Propagate(twice, sig, cfg);
      Propagate(twice, {sig.target, g2}, cfg);
      Propagate(once, {sig.target, g1 + g2}, cfg);
      ForEachEntry(base, [&](const LambdaKey& k) {
        CHECK(twice.Lookup(k) == doctest::Approx(once.Lookup(k)).epsilon(1e-12));
      });
    }

    // Customer isolation, bitwise.
    LambdaStore after = base;
    Propagate(after, sig, cfg);
    ForEachEntry(base, [&](const LambdaKey& k) {
      if (k.customer != sig.target.customer) CHECK(after.Lookup(k) == base.Lookup(k));
    });
  }
}

TEST_CASE("signal strength and config are validated") {
  LambdaStore store = SmallStore();
  CHECK_THROWS_AS(Propagate(store, {{"A", "S1", "R1", "G"}, 1.5}, PropagationConfig{}), Error);
  PropagationConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(Propagate(store, {{"A", "S1", "R1", "G"}, 1.0}, bad), Error);
  bad = {};
  bad.rho_s = 1.5;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("new stratifications and groups are registered by signals") {
  LambdaStore store(std::vector<std::string>{"G"});
  Propagate(store, {{"A", "S1", "R1", "Custom"}, 1.0}, PropagationConfig{});
  CHECK(store.Lookup("A", "S1", "R1", "Custom") == doctest::Approx(0.3));
  CHECK(store.Lookup("A", "S1", "R1", "G") == doctest::Approx(0.075));
  CHECK(store.stratifications().size() == 2);
}

TEST_CASE("adjust examples") {
  const std::vector<double> c = {1, 2, 4, 8, 16, 32};
  const LogTransform xi;
  CHECK(Adjust(4, 0.0, xi, c) == 4);
  CHECK(Adjust(4, 1.5, xi, c) == 16);
  CHECK(Adjust(8, -1.0, xi, c) == 4);
  CHECK(Adjust(4, 1.0, xi, c) == 8);
  CHECK_THROWS_AS(Adjust(0.0, 0.0, xi, c), Error);
  CHECK_THROWS_AS(Adjust(4.0, std::nan(""), xi, c), Error);
}

TEST_CASE("adjust is the identity at zero and monotone in lambda") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> lam(-4.0, 4.0);
  const std::vector<double> c = {1, 2, 4, 8, 16, 32, 64, 128};
  const LogTransform xi;
  for (int trial = 0; trial < 500; ++trial) {
    const double cap = c[rng() % c.size()];
    CHECK(Adjust(cap, 0.0, xi, c) == cap);
    double l1 = lam(rng), l2 = lam(rng);
    if (l1 > l2) std::swap(l1, l2);
    const double base = std::exp2(lam(rng) + 2.0);
    CHECK(Adjust(base, l1, xi, c) <= Adjust(base, l2, xi, c));
  }
}

TEST_CASE("ticket classification") {
  const auto filters = TicketFilters::Default();
  CHECK(ClassifyTicket({"high cpu usage", "", "scaled up the server"}, filters) == 1);
  CHECK(ClassifyTicket({"", "", ""}, filters) == 0);
  CHECK(ClassifyTicket({"", "reduce cost", "scale down"}, filters) == -1);
  CHECK(ClassifyTicket({"HIGH CPU", "", "Scaled Up"}, filters) == 1);
  // Keywords without a matching resolution are not enough.
  CHECK(ClassifyTicket({"high cpu usage", "", "restarted"}, filters) == 0);
  // Throttle wins when both match.
  CHECK(ClassifyTicket({"high cpu", "too expensive", "scaled up then scaled down"}, filters) == 1);
  const auto round_trip = TicketFilters::FromJson(filters.ToJson());
  CHECK(round_trip.ToJson() == filters.ToJson());
}

TEST_CASE("store persistence is atomic and versioned") {
  testing::TempDir dir("lambda");
  LambdaStore store = SmallStore();
  Propagate(store, {{"A", "S1", "R1", "G"}, 1.0}, ExaggeratedConfig());
  store.BumpVersion();
  store.Save(dir / "store.json");
  CHECK_FALSE(std::filesystem::exists(dir / "store.json.tmp"));
  const auto loaded = LambdaStore::Load(dir / "store.json");
  CHECK(loaded == store);
  CHECK(loaded.version() == 1);
  CHECK(loaded.Lookup("A", "S2", "R4", "B") == 0.25);
  CHECK(loaded.ResourceGroups("A", "S1").size() == 2);
}

TEST_CASE("a second writer fails fast") {
  testing::TempDir dir("lock");
  const auto path = dir / "store.json";
  {
    StoreLock first(path);
    try {
      StoreLock second(path);
      FAIL("expected a lock error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kLocked);
    }
  }
  CHECK_NOTHROW(StoreLock{path});
}

TEST_CASE("signal files round trip") {
  testing::TempDir dir("signals");
  const std::vector<SatisfactionSignal> signals = {
      {{"A", "S1", "R1", "G"}, 1.0, SignalSource::kCri},
      {{"A", "S1", "R,2", "B"}, -0.5, SignalSource::kScaleAction}};
  WriteSignals(dir / "s.csv", signals);
  const auto back = ReadSignals(dir / "s.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].target.resource_group == "R,2");
  CHECK(back[1].gamma == -0.5);
  CHECK(back[1].source == SignalSource::kScaleAction);
}

}  // namespace
}  // namespace skurec
