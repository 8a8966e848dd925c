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

#ifndef SKUREC_PERSONALIZER_H_
#define SKUREC_PERSONALIZER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "skurec/core.h"

namespace skurec {

// Coordinates of one sensitivity score.
struct LambdaKey {
  std::string customer;
  std::string subscription;
  std::string resource_group;
  std::string stratification;
};

// Sensitivity scores lambda keyed customer / subscription / resource group /
// stratification. Absent entries read as 0. Resource groups are registered
// so that a signal can reach siblings that never received one directly.
class LambdaStore {
 public:
  static constexpr int kFormatVersion = 1;

  LambdaStore();
  explicit LambdaStore(std::vector<std::string> stratifications);

  std::span<const std::string> stratifications() const {
    return stratifications_;
  }
  std::uint64_t version() const { return version_; }
  void BumpVersion() { ++version_; }

  // Adds the resource group (and its parents) to the topology.
  void Register(const std::string& customer, const std::string& subscription,
                const std::string& resource_group);
  // Appends a stratification if it is not known yet.
  void AddStratification(const std::string& stratification);

  double Lookup(const LambdaKey& key) const;
  double Lookup(const std::string& customer, const std::string& subscription,
                const std::string& resource_group,
                const std::string& stratification) const;
  // Adds delta to an entry, registering its resource group if needed.
  void Add(const LambdaKey& key, double delta);

  std::vector<std::string> Customers() const;
  std::vector<std::string> Subscriptions(const std::string& customer) const;
  std::vector<std::string> ResourceGroups(const std::string& customer,
                                          const std::string& subscription) const;

  // Explicitly stored values only (registered groups without values are not
  // compared).
  friend bool operator==(const LambdaStore& a, const LambdaStore& b);

  nlohmann::json ToJson() const;
  static LambdaStore FromJson(const nlohmann::json& j);
  // Writes to a temporary sibling and renames it over `path`.
  void Save(const std::filesystem::path& path) const;
  static LambdaStore Load(const std::filesystem::path& path);

 private:
  using StratMap = std::map<std::string, double>;
  using GroupMap = std::map<std::string, StratMap>;
  using SubscriptionMap = std::map<std::string, GroupMap>;

  std::vector<std::string> stratifications_;
  std::map<std::string, SubscriptionMap> data_;
  std::uint64_t version_ = 0;
};

// Exclusive writer lock on a store file, held through a sibling ".lock" file
// created with O_EXCL. A second writer fails fast with kLocked.
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& store_path);
  ~StoreLock();
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  std::filesystem::path lock_path_;
};

enum class SignalSource { kCri, kScaleAction, kSynthetic };

const char* SignalSourceName(SignalSource source);
SignalSource ParseSignalSource(std::string_view name);

struct SatisfactionSignal {
  LambdaKey target;
  double gamma = 0.0;  // in [-1, 1]; positive asks for more capacity
  SignalSource source = SignalSource::kSynthetic;
};

struct PropagationConfig {
  double learning_rate = 0.3;
  double rho_r = 0.25;  // across stratifications
  double rho_s = 0.25;  // across resource groups
  double rho_c = 0.25;  // across subscriptions
  void Validate() const;
};

// Applies one signal. With s = l_r * gamma and d = rho_R * s: the target gets
// s, other stratifications of the target group get d, same-stratification
// entries of sibling groups get rho_S * s and their other entries rho_S * d,
// and groups of other subscriptions of the customer get rho_C * s and
// rho_C * d. Other customers are untouched.
void Propagate(LambdaStore& store, const SatisfactionSignal& signal,
               const PropagationConfig& config);

// c** = b^lambda * c*, discretized to the candidates.
double Adjust(double capacity, double lambda, const LogTransform& transform,
              std::span<const double> candidates);
double Adjust(double capacity, double lambda, const LogTransform& transform,
              const CandidateSet& candidates);

struct TicketRecord {
  std::string symptoms;
  std::string subject;
  std::string resolution;
};

// One keyword filter: a ticket matches when a symptom/subject keyword occurs
// in the symptoms or subject, or a subject-only keyword in the subject, and a
// resolution keyword occurs in the resolution. Case-insensitive substrings.
struct KeywordFilter {
  std::vector<std::string> symptoms_or_subject;
  std::vector<std::string> subject_only;
  std::vector<std::string> resolution;

  bool Matches(const TicketRecord& ticket) const;
};

struct TicketFilters {
  KeywordFilter throttle;
  KeywordFilter cost;

  static TicketFilters Default();
  nlohmann::json ToJson() const;
  static TicketFilters FromJson(const nlohmann::json& j);
};

// +1 for a throttling complaint, -1 for a cost complaint, 0 otherwise.
int ClassifyTicket(const TicketRecord& ticket, const TicketFilters& filters);

// Signal CSV: customer,subscription,resource_group,stratification,gamma,source
std::vector<SatisfactionSignal> ReadSignals(const std::filesystem::path& path);
void WriteSignals(const std::filesystem::path& path,
                  std::span<const SatisfactionSignal> signals);

}  // namespace skurec

#endif  // SKUREC_PERSONALIZER_H_
