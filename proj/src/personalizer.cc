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

#include "skurec/personalizer.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <system_error>

#include "skurec/csv.h"

namespace skurec {

namespace {

const std::vector<std::string>& DefaultStratifications() {
  static const std::vector<std::string> kDefault = {
      "Burstable", "GeneralPurpose", "MemoryOptimized"};
  return kDefault;
}

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool ContainsAny(const std::string& haystack,
                 const std::vector<std::string>& needles) {
  for (const auto& needle : needles) {
    if (!needle.empty() && haystack.find(Lower(needle)) != std::string::npos) {
      return true;
    }
  }
  return false;
}

// True when every stored value of `a` equals its counterpart in `b`, with
// absent entries reading as 0.
bool SameValues(const LambdaStore& a, const LambdaStore& b) {
  bool same = true;
  const nlohmann::json ja = a.ToJson().at("lambda");
  for (const auto& [c, subs] : ja.items()) {
    for (const auto& [s, groups] : subs.items()) {
      for (const auto& [r, strats] : groups.items()) {
        for (const auto& [st, v] : strats.items()) {
          if (b.Lookup(c, s, r, st) != v.get<double>()) same = false;
        }
      }
    }
  }
  return same;
}

}  // namespace

LambdaStore::LambdaStore() : stratifications_(DefaultStratifications()) {}

LambdaStore::LambdaStore(std::vector<std::string> stratifications)
    : stratifications_(std::move(stratifications)) {
  std::vector<std::string> seen;
  for (const auto& st : stratifications_) {
    if (st.empty()) throw Error(ErrorCode::kConfig, "empty stratification");
    if (std::find(seen.begin(), seen.end(), st) != seen.end()) {
      throw Error(ErrorCode::kConfig, "duplicate stratification " + st);
    }
    seen.push_back(st);
  }
}

void LambdaStore::Register(const std::string& customer,
                           const std::string& subscription,
                           const std::string& resource_group) {
  data_[customer][subscription][resource_group];
}

void LambdaStore::AddStratification(const std::string& stratification) {
  if (std::find(stratifications_.begin(), stratifications_.end(),
                stratification) == stratifications_.end()) {
    stratifications_.push_back(stratification);
  }
}

double LambdaStore::Lookup(const LambdaKey& key) const {
  return Lookup(key.customer, key.subscription, key.resource_group,
                key.stratification);
}

double LambdaStore::Lookup(const std::string& customer,
                           const std::string& subscription,
                           const std::string& resource_group,
                           const std::string& stratification) const {
  auto c = data_.find(customer);
  if (c == data_.end()) return 0.0;
  auto s = c->second.find(subscription);
  if (s == c->second.end()) return 0.0;
  auto r = s->second.find(resource_group);
  if (r == s->second.end()) return 0.0;
  auto st = r->second.find(stratification);
  return st == r->second.end() ? 0.0 : st->second;
}

void LambdaStore::Add(const LambdaKey& key, double delta) {
  if (!std::isfinite(delta)) {
    throw Error(ErrorCode::kDomain, "non-finite lambda update");
  }
  data_[key.customer][key.subscription][key.resource_group]
       [key.stratification] += delta;
}

std::vector<std::string> LambdaStore::Customers() const {
  std::vector<std::string> out;
  for (const auto& [c, _] : data_) out.push_back(c);
  return out;
}

std::vector<std::string> LambdaStore::Subscriptions(
    const std::string& customer) const {
  std::vector<std::string> out;
  auto c = data_.find(customer);
  if (c == data_.end()) return out;
  for (const auto& [s, _] : c->second) out.push_back(s);
  return out;
}

std::vector<std::string> LambdaStore::ResourceGroups(
    const std::string& customer, const std::string& subscription) const {
  std::vector<std::string> out;
  auto c = data_.find(customer);
  if (c == data_.end()) return out;
  auto s = c->second.find(subscription);
  if (s == c->second.end()) return out;
  for (const auto& [r, _] : s->second) out.push_back(r);
  return out;
}

bool operator==(const LambdaStore& a, const LambdaStore& b) {
  return SameValues(a, b) && SameValues(b, a);
}

nlohmann::json LambdaStore::ToJson() const {
  nlohmann::json lambda = nlohmann::json::object();
  for (const auto& [c, subs] : data_) {
    auto& jc = lambda[c] = nlohmann::json::object();
    for (const auto& [s, groups] : subs) {
      auto& js = jc[s] = nlohmann::json::object();
      for (const auto& [r, strats] : groups) {
        auto& jr = js[r] = nlohmann::json::object();
        for (const auto& [st, v] : strats) jr[st] = v;
      }
    }
  }
  return {{"format_version", kFormatVersion},
          {"version", version_},
          {"stratifications", stratifications_},
          {"lambda", std::move(lambda)}};
}

LambdaStore LambdaStore::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorCode::kInput, "unsupported lambda store format");
    }
    LambdaStore store(j.at("stratifications").get<std::vector<std::string>>());
    store.version_ = j.at("version").get<std::uint64_t>();
    for (const auto& [c, subs] : j.at("lambda").items()) {
      for (const auto& [s, groups] : subs.items()) {
        for (const auto& [r, strats] : groups.items()) {
          store.Register(c, s, r);
          for (const auto& [st, v] : strats.items()) {
            const double value = v.get<double>();
            if (!std::isfinite(value)) {
              throw Error(ErrorCode::kInput, "non-finite lambda in store");
            }
            store.data_[c][s][r][st] = value;
          }
        }
      }
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput,
                std::string("malformed lambda store: ") + e.what());
  }
}

void LambdaStore::Save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInput, "cannot write " + tmp.string());
    out << ToJson().dump(2) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kInput, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kInput,
                "cannot replace " + path.string() + ": " + ec.message());
  }
}

LambdaStore LambdaStore::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInput, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput, path.string() + ": " + e.what());
  }
  return FromJson(j);
}

StoreLock::StoreLock(const std::filesystem::path& store_path)
    : lock_path_(store_path) {
  lock_path_ += ".lock";
  const int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(ErrorCode::kLocked,
                  "store is locked by another writer: " + lock_path_.string());
    }
    throw Error(ErrorCode::kInput, "cannot create " + lock_path_.string() +
                                       ": " + std::strerror(errno));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

StoreLock::~StoreLock() {
  std::error_code ec;
  std::filesystem::remove(lock_path_, ec);
}

const char* SignalSourceName(SignalSource source) {
  switch (source) {
    case SignalSource::kCri:
      return "CRI";
    case SignalSource::kScaleAction:
      return "ScaleAction";
    case SignalSource::kSynthetic:
      return "Synthetic";
  }
  return "Synthetic";
}

SignalSource ParseSignalSource(std::string_view name) {
  if (name == "CRI") return SignalSource::kCri;
  if (name == "ScaleAction") return SignalSource::kScaleAction;
  if (name == "Synthetic") return SignalSource::kSynthetic;
  throw Error(ErrorCode::kInput,
              "unknown signal source '" + std::string(name) + "'");
}

void PropagationConfig::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kConfig, "learning rate must be positive");
  }
  for (double rho : {rho_r, rho_s, rho_c}) {
    if (!(rho >= 0.0 && rho <= 1.0)) {
      throw Error(ErrorCode::kConfig, "decay parameters must lie in [0, 1]");
    }
  }
}

void Propagate(LambdaStore& store, const SatisfactionSignal& signal,
               const PropagationConfig& config) {
  config.Validate();
  if (!(signal.gamma >= -1.0 && signal.gamma <= 1.0)) {
    throw Error(ErrorCode::kDomain, "signal strength must lie in [-1, 1]");
  }
  const LambdaKey& t = signal.target;
  store.Register(t.customer, t.subscription, t.resource_group);
  store.AddStratification(t.stratification);
  const double s = config.learning_rate * signal.gamma;
  const double d = config.rho_r * s;
  if (s == 0.0) return;

  const std::vector<std::string> strats(store.stratifications().begin(),
                                        store.stratifications().end());
  auto update_group = [&](const std::string& sub, const std::string& rg,
                          double same, double other) {
    for (const auto& st : strats) {
      const double delta = st == t.stratification ? same : other;
      if (delta != 0.0) store.Add({t.customer, sub, rg, st}, delta);
    }
  };

  update_group(t.subscription, t.resource_group, s, d);
  for (const auto& rg : store.ResourceGroups(t.customer, t.subscription)) {
    if (rg == t.resource_group) continue;
    update_group(t.subscription, rg, config.rho_s * s, config.rho_s * d);
  }
  for (const auto& sub : store.Subscriptions(t.customer)) {
    if (sub == t.subscription) continue;
    for (const auto& rg : store.ResourceGroups(t.customer, sub)) {
      update_group(sub, rg, config.rho_c * s, config.rho_c * d);
    }
  }
}

double Adjust(double capacity, double lambda, const LogTransform& transform,
              std::span<const double> candidates) {
  if (!(capacity > 0.0)) {
    throw Error(ErrorCode::kDomain, "capacity must be positive");
  }
  if (!std::isfinite(lambda)) {
    throw Error(ErrorCode::kDomain, "lambda must be finite");
  }
  const double scaled = std::pow(transform.base(), lambda) * capacity;
  return Discretize(scaled, candidates, transform);
}

double Adjust(double capacity, double lambda, const LogTransform& transform,
              const CandidateSet& candidates) {
  return Adjust(capacity, lambda, transform, candidates.values());
}

bool KeywordFilter::Matches(const TicketRecord& ticket) const {
  const std::string symptoms = Lower(ticket.symptoms);
  const std::string subject = Lower(ticket.subject);
  const std::string resolution = Lower(ticket.resolution);
  const bool complaint = ContainsAny(symptoms, symptoms_or_subject) ||
                         ContainsAny(subject, symptoms_or_subject) ||
                         ContainsAny(subject, subject_only);
  return complaint && ContainsAny(resolution, this->resolution);
}

TicketFilters TicketFilters::Default() {
  TicketFilters f;
  f.throttle.symptoms_or_subject = {"high cpu", "high cpu usage",
                                    "high cpu utilization",
                                    "high cpu utilisation"};
  f.throttle.subject_only = {"100%", "99%", "95%", "90%", "0%", "9%"};
  f.throttle.resolution = {"increas", "throttl", "scale up", "scaling up",
                           "scaled up"};
  f.cost.symptoms_or_subject = {"reduce cost", "too expensive"};
  f.cost.resolution = {"scale down", "scaled down", "scaling down",
                       "downgrade"};
  return f;
}

nlohmann::json TicketFilters::ToJson() const {
  auto filter = [](const KeywordFilter& k) {
    return nlohmann::json{{"symptoms_or_subject", k.symptoms_or_subject},
                          {"subject_only", k.subject_only},
                          {"resolution", k.resolution}};
  };
  return {{"throttle", filter(throttle)}, {"cost", filter(cost)}};
}

TicketFilters TicketFilters::FromJson(const nlohmann::json& j) {
  auto filter = [](const nlohmann::json& k) {
    KeywordFilter f;
    f.symptoms_or_subject = k.value("symptoms_or_subject",
                                    std::vector<std::string>{});
    f.subject_only = k.value("subject_only", std::vector<std::string>{});
    f.resolution = k.value("resolution", std::vector<std::string>{});
    return f;
  };
  try {
    return {filter(j.at("throttle")), filter(j.at("cost"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig,
                std::string("malformed ticket filters: ") + e.what());
  }
}

int ClassifyTicket(const TicketRecord& ticket, const TicketFilters& filters) {
  if (filters.throttle.Matches(ticket)) return 1;
  if (filters.cost.Matches(ticket)) return -1;
  return 0;
}

std::vector<SatisfactionSignal> ReadSignals(const std::filesystem::path& path) {
  csv::Reader in(path);
  const std::size_t c = in.Column("customer");
  const std::size_t s = in.Column("subscription");
  const std::size_t r = in.Column("resource_group");
  const std::size_t st = in.Column("stratification");
  const std::size_t g = in.Column("gamma");
  const std::size_t src = in.Column("source");
  std::vector<SatisfactionSignal> out;
  std::vector<std::string> f;
  while (in.Next(f)) {
    const std::string where =
        path.string() + ":" + std::to_string(in.line_number()) + ": ";
    if (f.size() != in.header().size()) {
      throw Error(ErrorCode::kInput, where + "wrong field count");
    }
    SatisfactionSignal sig;
    sig.target = {f[c], f[s], f[r], f[st]};
    try {
      sig.gamma = csv::ParseNumber(f[g]);
      sig.source = ParseSignalSource(f[src]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kInput, where + e.what());
    }
    if (!(sig.gamma >= -1.0 && sig.gamma <= 1.0)) {
      throw Error(ErrorCode::kInput, where + "gamma outside [-1, 1]");
    }
    out.push_back(std::move(sig));
  }
  return out;
}

void WriteSignals(const std::filesystem::path& path,
                  std::span<const SatisfactionSignal> signals) {
  csv::Writer out(path);
  out.Row({"customer", "subscription", "resource_group", "stratification",
           "gamma", "source"});
  for (const auto& sig : signals) {
    out.Row({sig.target.customer, sig.target.subscription,
             sig.target.resource_group, sig.target.stratification,
             csv::FormatNumber(sig.gamma), SignalSourceName(sig.source)});
  }
  out.Close();
}

}  // namespace skurec
