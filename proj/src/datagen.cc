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

#include "skurec/datagen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace skurec {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t Fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t Mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string Guid(std::mt19937_64& rng) {
  const std::uint64_t a = rng();
  const std::uint64_t b = rng();
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%08llx-%04llx-%04llx-%04llx-%012llx",
                static_cast<unsigned long long>(a >> 32),
                static_cast<unsigned long long>((a >> 16) & 0xffff),
                static_cast<unsigned long long>(a & 0xffff),
                static_cast<unsigned long long>(b >> 48),
                static_cast<unsigned long long>(b & 0xffffffffffffULL));
  return buf;
}

std::string Numbered(std::string_view prefix, std::size_t k) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%02zu", k);
  return std::string(prefix) + buf;
}

Offering DrawOffering(std::mt19937_64& rng, const std::vector<double>& shares) {
  static const Offering kOfferings[] = {
      Offering(Offering::Kind::kBurstable),
      Offering(Offering::Kind::kGeneralPurpose),
      Offering(Offering::Kind::kMemoryOptimized)};
  std::discrete_distribution<std::size_t> pick(shares.begin(), shares.end());
  return kOfferings[pick(rng)];
}

// Candidate a user picks: the smallest one most of the time, otherwise one
// near the smallest candidate covering the observed peak.
double DrawUserCapacity(std::mt19937_64& rng, const CandidateSet& candidates,
                        double peak, double min_choice_share) {
  std::bernoulli_distribution smallest(min_choice_share);
  if (smallest(rng)) return candidates.min();
  const auto values = candidates.values();
  const auto fit = static_cast<std::ptrdiff_t>(
      std::lower_bound(values.begin(), values.end(), peak / 0.95) -
      values.begin());
  const auto last = static_cast<std::ptrdiff_t>(values.size()) - 1;
  const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(fit - 1, 0, last);
  const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(fit + 3, 0, last);
  std::uniform_int_distribution<std::ptrdiff_t> pick(lo, hi);
  return values[static_cast<std::size_t>(pick(rng))];
}

void ClampTrace(WorkloadTrace& trace, const CapacityVector& capacity) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto u = trace.mutable_usage(i);
    for (std::size_t r = 0; r < u.size(); ++r) u[r] = std::min(u[r], capacity[r]);
  }
}

}  // namespace

SkuCatalog DefaultCatalog() {
  SkuCatalog catalog({ResourceDim{0, "vcores"}});
  const Offering burstable(Offering::Kind::kBurstable);
  const Offering general(Offering::Kind::kGeneralPurpose);
  const Offering memory(Offering::Kind::kMemoryOptimized);
  catalog.Set(burstable, 0, CandidateSet(burstable, {1, 2, 4, 8, 12, 16, 20}));
  catalog.Set(general, 0, CandidateSet(general, {2, 4, 8, 16, 32, 48, 64, 96}));
  catalog.Set(memory, 0,
              CandidateSet(memory, {2, 4, 8, 16, 20, 32, 48, 64, 96}));
  return catalog;
}

std::vector<std::string> SyntheticFeatureNames() {
  return {"SegmentName",    "IndustryName",  "VerticalName",
          "CloudCustomerGuid", "SubscriptionId", "ResourceGroup",
          "ServerName",     "ServerVersion"};
}

nlohmann::json SyntheticSpec::ToJson() const {
  return {{"customers", customers},
          {"subscriptions_per_customer", subscriptions_per_customer},
          {"groups_per_subscription", groups_per_subscription},
          {"resources_per_group", resources_per_group},
          {"segments", segments},
          {"industries", industries},
          {"verticals", verticals},
          {"server_versions", server_versions},
          {"duration_hours", duration_hours},
          {"sample_interval_min", sample_interval_min},
          {"mean_log2_demand", mean_log2_demand},
          {"vertical_sd", vertical_sd},
          {"customer_sd", customer_sd},
          {"group_sd", group_sd},
          {"resource_sd", resource_sd},
          {"demand_scale", demand_scale},
          {"diurnal_amplitude", diurnal_amplitude},
          {"noise_sd", noise_sd},
          {"spike_probability", spike_probability},
          {"spike_factor", spike_factor},
          {"min_choice_share", min_choice_share},
          {"offering_shares", offering_shares},
          {"seed", seed}};
}

SyntheticSpec SyntheticSpec::FromJson(const nlohmann::json& j) {
  SyntheticSpec s;
  try {
    s.customers = j.value("customers", s.customers);
    s.subscriptions_per_customer =
        j.value("subscriptions_per_customer", s.subscriptions_per_customer);
    s.groups_per_subscription =
        j.value("groups_per_subscription", s.groups_per_subscription);
    s.resources_per_group = j.value("resources_per_group", s.resources_per_group);
    s.segments = j.value("segments", s.segments);
    s.industries = j.value("industries", s.industries);
    s.verticals = j.value("verticals", s.verticals);
    s.server_versions = j.value("server_versions", s.server_versions);
    s.duration_hours = j.value("duration_hours", s.duration_hours);
    s.sample_interval_min = j.value("sample_interval_min", s.sample_interval_min);
    s.mean_log2_demand = j.value("mean_log2_demand", s.mean_log2_demand);
    s.vertical_sd = j.value("vertical_sd", s.vertical_sd);
    s.customer_sd = j.value("customer_sd", s.customer_sd);
    s.group_sd = j.value("group_sd", s.group_sd);
    s.resource_sd = j.value("resource_sd", s.resource_sd);
    s.demand_scale = j.value("demand_scale", s.demand_scale);
    s.diurnal_amplitude = j.value("diurnal_amplitude", s.diurnal_amplitude);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.spike_probability = j.value("spike_probability", s.spike_probability);
    s.spike_factor = j.value("spike_factor", s.spike_factor);
    s.min_choice_share = j.value("min_choice_share", s.min_choice_share);
    s.offering_shares = j.value("offering_shares", s.offering_shares);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig,
                std::string("malformed synthetic spec: ") + e.what());
  }
  return s;
}

Dataset GenerateSynthetic(const SyntheticSpec& spec, const SkuCatalog& catalog) {
  if (spec.customers == 0 || spec.subscriptions_per_customer == 0 ||
      spec.groups_per_subscription == 0 || spec.resources_per_group == 0 ||
      spec.segments == 0 || spec.industries == 0 || spec.verticals == 0 ||
      spec.server_versions == 0) {
    throw Error(ErrorCode::kConfig, "synthetic counts must be positive");
  }
  if (!(spec.sample_interval_min > 0.0) || !(spec.duration_hours > 0.0)) {
    throw Error(ErrorCode::kConfig, "sampling parameters must be positive");
  }
  if (spec.offering_shares.size() != 3) {
    throw Error(ErrorCode::kConfig, "offering_shares needs three entries");
  }
  if (!(spec.min_choice_share >= 0.0 && spec.min_choice_share <= 1.0) ||
      spec.demand_scale < 0.0) {
    throw Error(ErrorCode::kConfig, "invalid synthetic spec");
  }
  if (catalog.dims().size() != 1) {
    throw Error(ErrorCode::kConfig, "synthetic data has a single dimension");
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> vertical_effect(spec.verticals);
  for (double& v : vertical_effect) v = spec.vertical_sd * normal(rng);

  Dataset ds;
  ds.feature_names = SyntheticFeatureNames();
  ds.catalog = catalog;
  const std::size_t num_samples = static_cast<std::size_t>(
      std::floor(spec.duration_hours * 60.0 / spec.sample_interval_min));

  for (std::size_t c = 0; c < spec.customers; ++c) {
    const std::size_t vertical =
        std::uniform_int_distribution<std::size_t>(0, spec.verticals - 1)(rng);
    const std::size_t industry = vertical % spec.industries;
    const std::size_t segment = industry % spec.segments;
    const std::string customer = Guid(rng);
    const double customer_effect = spec.customer_sd * normal(rng);
    for (std::size_t s = 0; s < spec.subscriptions_per_customer; ++s) {
      const std::string subscription = Guid(rng);
      for (std::size_t g = 0; g < spec.groups_per_subscription; ++g) {
        const std::string group =
            "rg-" + subscription.substr(0, 8) + "-" + Numbered("", g);
        const double group_effect = spec.group_sd * normal(rng);
        for (std::size_t k = 0; k < spec.resources_per_group; ++k) {
          const std::string server =
              "srv-" + subscription.substr(0, 8) + "-" + Numbered("", g) +
              Numbered("", k);
          const std::string version = std::to_string(
              11 + std::uniform_int_distribution<std::size_t>(
                       0, spec.server_versions - 1)(rng));
          const Offering offering = DrawOffering(rng, spec.offering_shares);
          const double level =
              spec.demand_scale *
              std::exp2(spec.mean_log2_demand + vertical_effect[vertical] +
                        customer_effect + group_effect +
                        spec.resource_sd * normal(rng));
          const double phase = 2.0 * std::numbers::pi * unit(rng);

          WorkloadTrace trace(server, 1);
          double peak = 0.0;
          for (std::size_t n = 0; n < num_samples; ++n) {
            const double t = (static_cast<double>(n) + 0.2 * unit(rng)) *
                             spec.sample_interval_min;
            double u = level *
                       (1.0 + spec.diurnal_amplitude *
                                  std::sin(2.0 * std::numbers::pi * t / 1440.0 +
                                           phase)) *
                       std::exp(spec.noise_sd * normal(rng));
            if (unit(rng) < spec.spike_probability) u *= spec.spike_factor;
            u = std::max(u, 0.0);
            peak = std::max(peak, u);
            const double usage[1] = {u};
            trace.Append(t, usage);
          }
          const CandidateSet& candidates = catalog.Get(offering, 0);
          const CapacityVector user({DrawUserCapacity(
              rng, candidates, peak, spec.min_choice_share)});
          ClampTrace(trace, user);

          ProfileRecord profile;
          profile.offering = offering;
          profile.values = {Numbered("Segment-", segment),
                            Numbered("Industry-", industry),
                            Numbered("Vertical-", vertical),
                            customer,
                            subscription,
                            group,
                            server,
                            version};
          ds.resource_ids.push_back(server);
          ds.profiles.push_back(std::move(profile));
          ds.traces.push_back(std::move(trace));
          ds.user_capacity.push_back(user);
        }
      }
    }
  }
  ds.RebuildIndex();
  return ds;
}

nlohmann::json UpscaleSpec::ToJson() const {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& [name, factor] : factors) {
    f.push_back({{"feature", name}, {"factor", factor}});
  }
  return {{"factors", f}, {"seed", seed}};
}

UpscaleSpec UpscaleSpec::FromJson(const nlohmann::json& j) {
  UpscaleSpec s;
  try {
    if (j.contains("factors")) {
      s.factors.clear();
      for (const auto& f : j.at("factors")) {
        s.factors.emplace_back(f.at("feature").get<std::string>(),
                               f.at("factor").get<double>());
      }
    }
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig,
                std::string("malformed upscale spec: ") + e.what());
  }
  return s;
}

double AssignedFactor(std::string_view feature, std::string_view value,
                      double factor, std::uint64_t seed) {
  std::uint64_t h = kFnvOffset;
  for (int b = 0; b < 8; ++b) {
    h ^= (seed >> (8 * b)) & 0xff;
    h *= kFnvPrime;
  }
  h = Fnv1a(h, feature);
  h = Fnv1a(h, std::string_view("\0", 1));
  h = Fnv1a(h, value);
  return (Mix(h) & 1) ? factor : 0.0;
}

std::vector<double> Upscale(Dataset& dataset, const UpscaleSpec& spec) {
  std::vector<std::pair<std::size_t, double>> selected;
  for (const auto& [name, factor] : spec.factors) {
    auto it = std::find(dataset.feature_names.begin(),
                        dataset.feature_names.end(), name);
    if (it == dataset.feature_names.end()) {
      throw Error(ErrorCode::kConfig, "upscale feature '" + name +
                                          "' is not in the profile schema");
    }
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
      throw Error(ErrorCode::kConfig, "upscale factors must be non-negative");
    }
    selected.emplace_back(
        static_cast<std::size_t>(it - dataset.feature_names.begin()), factor);
  }

  const LogTransform xi;
  std::vector<double> chi(dataset.size(), 0.0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ProfileRecord& profile = dataset.profiles[i];
    for (const auto& [m, factor] : selected) {
      chi[i] += AssignedFactor(dataset.feature_names[m], profile.values[m],
                               factor, spec.seed);
    }
    if (chi[i] == 0.0) continue;
    const double scale = std::exp2(chi[i]);
    WorkloadTrace& trace = dataset.traces[i];
    for (std::size_t n = 0; n < trace.size(); ++n) {
      for (double& u : trace.mutable_usage(n)) u *= scale;
    }
    std::vector<double> user(dataset.user_capacity[i].values().begin(),
                             dataset.user_capacity[i].values().end());
    for (std::size_t r = 0; r < user.size(); ++r) {
      user[r] = Discretize(user[r] * scale,
                           dataset.catalog.Get(profile.offering, r), xi);
    }
    dataset.user_capacity[i] = CapacityVector(std::move(user));
    ClampTrace(trace, dataset.user_capacity[i]);
  }
  return chi;
}

StrictHierarchySample GenerateStrictHierarchy(const StrictHierarchySpec& spec) {
  if (spec.chain.empty() || spec.rows == 0) {
    throw Error(ErrorCode::kConfig, "strict hierarchy needs levels and rows");
  }
  for (std::size_t j = 0; j < spec.chain.size(); ++j) {
    if (spec.chain[j] == 0 || (j > 0 && spec.chain[j] <= spec.chain[j - 1])) {
      throw Error(ErrorCode::kConfig,
                  "chain cardinalities must be positive and increasing");
    }
  }
  for (std::size_t k : spec.noise) {
    if (k == 0) throw Error(ErrorCode::kConfig, "noise cardinality is zero");
  }
  std::mt19937_64 rng(spec.seed);
  const std::size_t levels = spec.chain.size();
  const std::size_t total = levels + spec.noise.size();

  // parent[j][v]: value at level j of a level j+1 value v. The first K_j fine
  // values cover every coarse value.
  std::vector<std::vector<std::size_t>> parent(levels);
  for (std::size_t j = 0; j + 1 < levels; ++j) {
    parent[j].resize(spec.chain[j + 1]);
    std::uniform_int_distribution<std::size_t> pick(0, spec.chain[j] - 1);
    for (std::size_t v = 0; v < parent[j].size(); ++v) {
      parent[j][v] = v < spec.chain[j] ? v : pick(rng);
    }
    std::shuffle(parent[j].begin(), parent[j].end(), rng);
  }

  std::vector<std::size_t> column_of(total);
  for (std::size_t k = 0; k < total; ++k) column_of[k] = k;
  std::shuffle(column_of.begin(), column_of.end(), rng);

  std::vector<std::string> names(total);
  for (std::size_t j = 0; j < levels; ++j) {
    names[column_of[j]] = "level" + std::to_string(j);
  }
  for (std::size_t k = 0; k < spec.noise.size(); ++k) {
    names[column_of[levels + k]] = "noise" + std::to_string(k);
  }
  StrictHierarchySample out{CategoricalTable(names), {}};
  for (std::size_t j = 0; j < levels; ++j) out.chain.push_back(column_of[j]);

  std::vector<std::string> row(total);
  std::vector<std::size_t> value(levels);
  std::uniform_int_distribution<std::size_t> finest(0, spec.chain.back() - 1);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    value[levels - 1] = finest(rng);
    for (std::size_t j = levels - 1; j-- > 0;) {
      value[j] = parent[j][value[j + 1]];
    }
    for (std::size_t j = 0; j < levels; ++j) {
      row[column_of[j]] = "v" + std::to_string(value[j]);
    }
    for (std::size_t k = 0; k < spec.noise.size(); ++k) {
      std::uniform_int_distribution<std::size_t> noise(0, spec.noise[k] - 1);
      row[column_of[levels + k]] = "n" + std::to_string(noise(rng));
    }
    out.table.AddRow(row);
  }
  return out;
}

}  // namespace skurec
