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

#include "skurec/dataset.h"

#include <algorithm>
#include <optional>
#include <tuple>

#include "skurec/csv.h"

namespace skurec {

namespace {

std::optional<std::size_t> FindDim(std::span<const ResourceDim> dims,
                                   const std::string& name) {
  for (const auto& d : dims) {
    if (d.name == name) return static_cast<std::size_t>(d.index);
  }
  return std::nullopt;
}

std::string Where(const csv::Reader& in) {
  return in.path().string() + ":" + std::to_string(in.line_number()) + ": ";
}

void Skip(LoadReport* report, const csv::Reader& in, const std::string& why) {
  if (report == nullptr) throw Error(ErrorCode::kInput, Where(in) + why);
  ++report->skipped;
  report->messages.push_back(Where(in) + why);
}

}  // namespace

std::size_t Dataset::IndexOf(const std::string& resource_id) const {
  auto it = index_.find(resource_id);
  if (it == index_.end()) {
    throw Error(ErrorCode::kInput, "unknown resource '" + resource_id + "'");
  }
  return it->second;
}

void Dataset::RebuildIndex() {
  index_.clear();
  for (std::size_t i = 0; i < resource_ids.size(); ++i) {
    if (!index_.emplace(resource_ids[i], i).second) {
      throw Error(ErrorCode::kInput,
                  "duplicate resource id '" + resource_ids[i] + "'");
    }
  }
}

void WriteCatalog(const std::filesystem::path& path, const SkuCatalog& catalog) {
  csv::Writer out(path);
  out.Row({"offering", "dimension", "candidates"});
  for (const Offering& offering : catalog.Offerings()) {
    for (const auto& dim : catalog.dims()) {
      std::string joined;
      for (double v : catalog.Get(offering, dim.index).values()) {
        if (!joined.empty()) joined += '|';
        joined += csv::FormatNumber(v);
      }
      out.Row({offering.Name(), dim.name, joined});
    }
  }
  out.Close();
}

SkuCatalog ReadCatalog(const std::filesystem::path& path) {
  csv::Reader in(path);
  const std::size_t c_off = in.Column("offering");
  const std::size_t c_dim = in.Column("dimension");
  const std::size_t c_cand = in.Column("candidates");
  std::vector<std::tuple<Offering, std::string, std::vector<double>>> rows;
  std::vector<ResourceDim> dims;
  std::vector<std::string> f;
  while (in.Next(f)) {
    if (f.size() != in.header().size()) {
      throw Error(ErrorCode::kInput, Where(in) + "wrong field count");
    }
    std::vector<double> values;
    std::string_view rest = f[c_cand];
    while (!rest.empty()) {
      const auto bar = rest.find('|');
      values.push_back(csv::ParseNumber(rest.substr(0, bar)));
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    if (!FindDim(dims, f[c_dim])) {
      dims.push_back({static_cast<int>(dims.size()), f[c_dim]});
    }
    rows.emplace_back(Offering::Parse(f[c_off]), f[c_dim], std::move(values));
  }
  if (rows.empty()) throw Error(ErrorCode::kInput, "empty catalog");
  SkuCatalog catalog(dims);
  for (auto& [offering, dim, values] : rows) {
    catalog.Set(offering, *FindDim(dims, dim),
                CandidateSet(offering, std::move(values)));
  }
  // Every offering must cover every dimension; Get throws otherwise.
  for (const Offering& offering : catalog.Offerings()) {
    for (const auto& dim : dims) catalog.Get(offering, dim.index);
  }
  return catalog;
}

void WriteTelemetry(const std::filesystem::path& path,
                    std::span<const WorkloadTrace> traces,
                    std::span<const ResourceDim> dims) {
  csv::Writer out(path);
  out.Row({"resource_id", "timestamp_min", "dimension", "value"});
  std::vector<std::string> row(4);
  for (const auto& trace : traces) {
    row[0] = trace.resource_id();
    for (std::size_t i = 0; i < trace.size(); ++i) {
      row[1] = csv::FormatNumber(trace.timestamp(i));
      for (const auto& dim : dims) {
        row[2] = dim.name;
        row[3] = csv::FormatNumber(trace.usage(i)[dim.index]);
        out.Row(row);
      }
    }
  }
  out.Close();
}

std::map<std::string, WorkloadTrace> ReadTelemetry(
    const std::filesystem::path& path, std::span<const ResourceDim> dims,
    LoadReport* report) {
  csv::Reader in(path);
  const std::size_t c_id = in.Column("resource_id");
  const std::size_t c_ts = in.Column("timestamp_min");
  const std::size_t c_dim = in.Column("dimension");
  const std::size_t c_val = in.Column("value");
  struct Sample {
    double timestamp;
    std::size_t dim;
    double value;
  };
  std::map<std::string, std::vector<Sample>> raw;
  std::vector<std::string> f;
  while (in.Next(f)) {
    if (report != nullptr) ++report->rows;
    if (f.size() != in.header().size()) {
      Skip(report, in, "wrong field count");
      continue;
    }
    const auto dim = FindDim(dims, f[c_dim]);
    if (!dim) {
      Skip(report, in, "unknown dimension '" + f[c_dim] + "'");
      continue;
    }
    Sample s{};
    s.dim = *dim;
    try {
      s.timestamp = csv::ParseNumber(f[c_ts]);
      s.value = csv::ParseNumber(f[c_val]);
    } catch (const Error& e) {
      Skip(report, in, e.what());
      continue;
    }
    if (s.value < 0.0) {
      Skip(report, in, "negative usage");
      continue;
    }
    raw[f[c_id]].push_back(s);
  }

  std::map<std::string, WorkloadTrace> out;
  std::vector<double> usage(dims.size());
  std::vector<bool> seen(dims.size());
  for (auto& [id, samples] : raw) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const Sample& a, const Sample& b) {
                       return a.timestamp < b.timestamp;
                     });
    WorkloadTrace trace(id, dims.size());
    std::size_t i = 0;
    while (i < samples.size()) {
      std::size_t j = i;
      std::fill(seen.begin(), seen.end(), false);
      while (j < samples.size() && samples[j].timestamp == samples[i].timestamp) {
        usage[samples[j].dim] = samples[j].value;
        seen[samples[j].dim] = true;
        ++j;
      }
      // A sample lacking some dimension cannot be evaluated; drop it.
      if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        trace.Append(samples[i].timestamp, usage);
      } else if (report != nullptr) {
        report->messages.push_back(path.string() + ": resource " + id +
                                   " timestamp " +
                                   csv::FormatNumber(samples[i].timestamp) +
                                   " lacks a dimension");
      }
      i = j;
    }
    if (!trace.empty()) out.emplace(id, std::move(trace));
  }
  return out;
}

void WriteProfiles(const std::filesystem::path& path,
                   std::span<const std::string> feature_names,
                   std::span<const std::string> resource_ids,
                   std::span<const ProfileRecord> profiles) {
  csv::Writer out(path);
  std::vector<std::string> row = {"resource_id", "offering"};
  row.insert(row.end(), feature_names.begin(), feature_names.end());
  out.Row(row);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    row.assign({resource_ids[i], profiles[i].offering.Name()});
    row.insert(row.end(), profiles[i].values.begin(), profiles[i].values.end());
    out.Row(row);
  }
  out.Close();
}

ProfileTable ReadProfiles(const std::filesystem::path& path) {
  csv::Reader in(path);
  const std::size_t c_id = in.Column("resource_id");
  const std::size_t c_off = in.Column("offering");
  ProfileTable table;
  std::vector<std::size_t> feature_cols;
  for (std::size_t k = 0; k < in.header().size(); ++k) {
    if (k == c_id || k == c_off) continue;
    feature_cols.push_back(k);
    table.feature_names.push_back(in.header()[k]);
  }
  std::vector<std::string> f;
  while (in.Next(f)) {
    if (f.size() != in.header().size()) {
      throw Error(ErrorCode::kInput, Where(in) + "wrong field count");
    }
    ProfileRecord p;
    p.offering = Offering::Parse(f[c_off]);
    for (std::size_t k : feature_cols) {
      p.values.push_back(f[k].empty() ? std::string(kMissing) : f[k]);
    }
    table.resource_ids.push_back(f[c_id]);
    table.profiles.push_back(std::move(p));
  }
  if (table.profiles.empty()) {
    throw Error(ErrorCode::kInput, path.string() + ": no profile rows");
  }
  return table;
}

void WriteCapacities(const std::filesystem::path& path,
                     std::span<const std::string> resource_ids,
                     std::span<const CapacityVector> capacities,
                     std::span<const ResourceDim> dims) {
  csv::Writer out(path);
  out.Row({"resource_id", "dimension", "user_capacity"});
  for (std::size_t i = 0; i < resource_ids.size(); ++i) {
    for (const auto& dim : dims) {
      out.Row({resource_ids[i], dim.name,
               csv::FormatNumber(capacities[i][dim.index])});
    }
  }
  out.Close();
}

std::map<std::string, CapacityVector> ReadCapacities(
    const std::filesystem::path& path, std::span<const ResourceDim> dims,
    LoadReport* report) {
  csv::Reader in(path);
  const std::size_t c_id = in.Column("resource_id");
  const std::size_t c_dim = in.Column("dimension");
  const std::size_t c_cap = in.Column("user_capacity");
  std::map<std::string, std::vector<double>> raw;
  std::vector<std::string> f;
  while (in.Next(f)) {
    if (report != nullptr) ++report->rows;
    if (f.size() != in.header().size()) {
      Skip(report, in, "wrong field count");
      continue;
    }
    const auto dim = FindDim(dims, f[c_dim]);
    if (!dim) {
      Skip(report, in, "unknown dimension '" + f[c_dim] + "'");
      continue;
    }
    double value = 0.0;
    try {
      value = csv::ParseNumber(f[c_cap]);
    } catch (const Error& e) {
      Skip(report, in, e.what());
      continue;
    }
    if (!(value > 0.0)) {
      Skip(report, in, "user capacity must be positive");
      continue;
    }
    auto& v = raw[f[c_id]];
    v.resize(dims.size(), 0.0);
    v[*dim] = value;
  }
  std::map<std::string, CapacityVector> out;
  for (auto& [id, v] : raw) {
    if (std::any_of(v.begin(), v.end(), [](double x) { return x <= 0.0; })) {
      if (report != nullptr) {
        report->messages.push_back(path.string() + ": resource " + id +
                                   " lacks a dimension");
      }
      continue;
    }
    out.emplace(id, CapacityVector(std::move(v)));
  }
  return out;
}

}  // namespace skurec
