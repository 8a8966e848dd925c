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

#include "skurec/pipeline.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "skurec/csv.h"
#include "skurec/dataset.h"
#include "skurec/evaluator.h"
#include "skurec/hierarchy.h"

namespace skurec {

namespace {

namespace fs = std::filesystem;

void WriteJson(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInput, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kInput, "cannot write " + path.string());
}

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInput, "cannot read " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInput, path.string() + ": " + e.what());
  }
}

void EnsureOutputDir(const PipelineConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kInput, "cannot create " +
                                       config.output_dir.string() + ": " +
                                       ec.message());
  }
}

std::vector<double> BroadcastList(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<std::vector<double>>();
}

std::size_t DimensionIndex(const PipelineConfig& config,
                           const SkuCatalog& catalog) {
  if (config.dimension.empty()) return 0;
  return catalog.DimIndex(config.dimension);
}

std::size_t FeatureIndex(std::span<const std::string> names,
                         const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorCode::kConfig, "profile schema lacks feature " + name);
  }
  return static_cast<std::size_t>(it - names.begin());
}

struct Label {
  double user = 0.0;
  double rightsized = 0.0;
  bool censored = false;
};

// rightsized.csv rows of one dimension, keyed by resource id.
std::map<std::string, Label> ReadLabels(const fs::path& path,
                                        const std::string& dimension) {
  csv::Reader in(path);
  const std::size_t c_id = in.Column("resource_id");
  const std::size_t c_dim = in.Column("dimension");
  const std::size_t c_user = in.Column("user_capacity");
  const std::size_t c_cap = in.Column("rightsized_capacity");
  const std::size_t c_cen = in.Column("censored");
  std::map<std::string, Label> out;
  std::vector<std::string> f;
  while (in.Next(f)) {
    if (f.size() != in.header().size()) {
      throw Error(ErrorCode::kInput, path.string() + ":" +
                                         std::to_string(in.line_number()) +
                                         ": wrong field count");
    }
    if (f[c_dim] != dimension) continue;
    out[f[c_id]] = {csv::ParseNumber(f[c_user]), csv::ParseNumber(f[c_cap]),
                    f[c_cen] == "1"};
  }
  return out;
}

enum class Split { kTrain, kValidation, kTest };

const char* SplitName(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValidation:
      return "validation";
    case Split::kTest:
      return "test";
  }
  return "train";
}

std::map<std::string, Split> ReadSplit(const fs::path& path) {
  csv::Reader in(path);
  const std::size_t c_id = in.Column("resource_id");
  const std::size_t c_split = in.Column("split");
  std::map<std::string, Split> out;
  std::vector<std::string> f;
  while (in.Next(f)) {
    const std::string& s = f.at(c_split);
    out[f.at(c_id)] = s == "train"        ? Split::kTrain
                      : s == "validation" ? Split::kValidation
                                          : Split::kTest;
  }
  return out;
}

// (feature name, value) pairs along the chain, coarse to fine.
std::vector<std::pair<std::string, std::string>> ChainQuery(
    const HierarchyModel& model, const ProfileRecord& profile) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t m : model.chain) {
    out.emplace_back(model.feature_names.at(m), profile.values.at(m));
  }
  return out;
}

ProvisionerPrediction PredictFromStore(const PredictionStore& store,
                                       const HierarchyModel& model,
                                       const ProfileRecord& profile,
                                       const CandidateSet& candidates) {
  const auto query = ChainQuery(model, profile);
  ProvisionerPrediction out;
  if (auto row = store.Lookup(profile.offering.Name(), query)) {
    out.capacity = row->capacity;
    out.raw = row->capacity;
    out.matched_level = row->level;
    out.matched_value = row->value;
    out.support = row->support;
    return out;
  }
  out.capacity = candidates.min();
  out.raw = candidates.min();
  out.default_fallback = true;
  return out;
}

void CheckSchema(const HierarchyModel& model,
                 std::span<const std::string> names) {
  if (!std::equal(model.feature_names.begin(), model.feature_names.end(),
                  names.begin(), names.end())) {
    throw Error(ErrorCode::kInput,
                "hierarchy model was learned on a different profile schema");
  }
}

struct ValidationStats {
  std::size_t n = 0;
  double mean_abs_log_error = 0.0;
  double exact_match = 0.0;
  std::size_t default_fallbacks = 0;

  nlohmann::json ToJson() const {
    return {{"rows", n},
            {"mean_abs_log_error", mean_abs_log_error},
            {"exact_match_rate", exact_match},
            {"default_fallbacks", default_fallbacks}};
  }
};

template <typename PredictFn>
ValidationStats Validate(std::span<const LabeledProfile> rows,
                         const LogTransform& xi, PredictFn&& predict) {
  ValidationStats s;
  for (const auto& row : rows) {
    const ProvisionerPrediction p = predict(row.profile);
    s.mean_abs_log_error += std::abs(xi.Forward(p.capacity) -
                                     xi.Forward(row.label));
    if (p.capacity == row.label) s.exact_match += 1.0;
    if (p.default_fallback) ++s.default_fallbacks;
    ++s.n;
  }
  if (s.n > 0) {
    s.mean_abs_log_error /= static_cast<double>(s.n);
    s.exact_match /= static_cast<double>(s.n);
  }
  return s;
}

void WarnDefaultOnly(const std::vector<Offering>& offerings,
                     const std::string& model, std::ostream& log) {
  for (const auto& o : offerings) {
    log << "warning: " << model << ": offering " << o.Name()
        << " has too few training rows; it answers with the default\n";
  }
}

}  // namespace

const char* ProvisionerName(ProvisionerKind kind) {
  return kind == ProvisionerKind::kHierarchical ? "hierarchical"
                                                : "target_encoding";
}

fs::path PipelineConfig::Path(const std::string& name,
                              const std::string& default_file) const {
  auto it = paths.find(name);
  if (it != paths.end()) return it->second;
  return output_dir / default_file;
}

void PipelineConfig::SetSeed(std::uint64_t value) {
  seed = value;
  synthetic.seed = value;
  upscale_spec.seed = value;
  simulation.seed = value;
  target_encoding.forest.seed = value;
}

PipelineConfig PipelineConfig::FromJson(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("paths")) {
      for (const auto& [name, p] : j.at("paths").items()) {
        c.paths[name] = p.get<std::string>();
      }
    }
    if (j.contains("rightsizer")) {
      const auto& r = j.at("rightsizer");
      c.rightsizer.bin_width_min =
          r.value("bin_width_min", c.rightsizer.bin_width_min);
      if (r.contains("utilization_threshold")) {
        c.rightsizer.utilization_threshold =
            BroadcastList(r.at("utilization_threshold"));
      }
      if (r.contains("slack_target")) {
        c.rightsizer.slack_target = BroadcastList(r.at("slack_target"));
      }
      c.rightsizer.throttling_bound =
          r.value("throttling_bound", c.rightsizer.throttling_bound);
      c.rightsizer.censoring_exponent =
          r.value("censoring_exponent", c.rightsizer.censoring_exponent);
    }
    c.dimension = j.value("dimension", c.dimension);
    c.log_base = j.value("log_base", c.log_base);
    const std::string kind = j.value("provisioner", "hierarchical");
    if (kind == "hierarchical") {
      c.provisioner = ProvisionerKind::kHierarchical;
    } else if (kind == "target_encoding") {
      c.provisioner = ProvisionerKind::kTargetEncoding;
    } else {
      throw Error(ErrorCode::kConfig, "unknown provisioner '" + kind + "'");
    }
    if (j.contains("hierarchical")) {
      const auto& h = j.at("hierarchical");
      c.hierarchical.min_bucket_size =
          h.value("min_bucket_size", c.hierarchical.min_bucket_size);
      c.hierarchical.percentile = h.value("percentile", c.hierarchical.percentile);
    }
    c.hierarchy_threshold = j.value("hierarchy_threshold", c.hierarchy_threshold);
    if (j.contains("target_encoding")) {
      const auto& t = j.at("target_encoding");
      auto& te = c.target_encoding;
      const std::string agg = t.value("aggregator", "mean");
      if (agg == "mean") {
        te.aggregator = Aggregator::kMean;
      } else if (agg == "percentile") {
        te.aggregator = Aggregator::kPercentile;
      } else {
        throw Error(ErrorCode::kConfig, "unknown aggregator '" + agg + "'");
      }
      te.aggregator_percentile =
          t.value("aggregator_percentile", te.aggregator_percentile);
      te.forest.num_trees = t.value("num_trees", te.forest.num_trees);
      te.forest.tree.max_depth = t.value("max_depth", te.forest.tree.max_depth);
      te.forest.tree.min_leaf = t.value("min_leaf", te.forest.tree.min_leaf);
      te.forest.bootstrap = t.value("bootstrap", te.forest.bootstrap);
      te.skip_identifier_features =
          t.value("skip_identifier_features", te.skip_identifier_features);
    }
    c.min_offering_rows = j.value("min_offering_rows", c.min_offering_rows);
    if (j.contains("split")) {
      const auto& s = j.at("split");
      c.train_fraction = s.value("train", c.train_fraction);
      c.validation_fraction = s.value("validation", c.validation_fraction);
    }
    c.validation_gate = j.value("validation_gate", c.validation_gate);
    c.lambda_keys = j.value("lambda_keys", c.lambda_keys);
    if (j.contains("propagation")) {
      const auto& p = j.at("propagation");
      c.propagation.learning_rate =
          p.value("learning_rate", c.propagation.learning_rate);
      c.propagation.rho_r = p.value("rho_r", c.propagation.rho_r);
      c.propagation.rho_s = p.value("rho_s", c.propagation.rho_s);
      c.propagation.rho_c = p.value("rho_c", c.propagation.rho_c);
    }
    if (j.contains("ticket_filters")) {
      c.ticket_filters = TicketFilters::FromJson(j.at("ticket_filters"));
    }
    if (j.contains("synthetic")) {
      c.synthetic = SyntheticSpec::FromJson(j.at("synthetic"));
    }
    c.upscale = j.value("upscale", c.upscale);
    if (j.contains("upscale_spec")) {
      c.upscale_spec = UpscaleSpec::FromJson(j.at("upscale_spec"));
    }
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      c.simulation = SimConfig::FromJson(s);
      c.simulation_seeds = s.value("num_seeds", c.simulation_seeds);
      c.grid_noises = s.value("grid_noises", c.grid_noises);
      c.grid_sigmas = s.value("grid_sigmas", c.grid_sigmas);
      c.grid_rates = s.value("grid_rates", c.grid_rates);
      c.grid_seeds = s.value("grid_seeds", c.grid_seeds);
    }
    if (j.contains("evaluation")) {
      const auto& e = j.at("evaluation");
      c.exponents = e.value("exponents", c.exponents);
      c.throttle_bound = e.value("throttle_bound", c.throttle_bound);
      c.baseline_max_per_offering =
          e.value("baseline_max_per_offering", c.baseline_max_per_offering);
      c.population = e.value("population", c.population);
    }
    if (j.contains("seed")) {
      c.SetSeed(j.at("seed").get<std::uint64_t>());
    } else {
      // Component seeds given in their own sections stay as written.
      c.seed = c.synthetic.seed;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig,
                std::string("malformed pipeline config: ") + e.what());
  }
  c.rightsizer.Validate();
  c.propagation.Validate();
  if (!(c.train_fraction > 0.0) || !(c.validation_fraction >= 0.0) ||
      c.train_fraction + c.validation_fraction > 1.0) {
    throw Error(ErrorCode::kConfig, "invalid split fractions");
  }
  if (c.lambda_keys.size() != 3) {
    throw Error(ErrorCode::kConfig,
                "lambda_keys names customer, subscription and resource group");
  }
  return c;
}

PipelineConfig PipelineConfig::Load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return FromJson(j);
}

int ExitCodeFor(const Error& error) {
  switch (error.code()) {
    case ErrorCode::kEmptyHistory:
    case ErrorCode::kNoHierarchy:
      return kExitGate;
    default:
      return kExitInput;
  }
}

int CmdGenSynthetic(const PipelineConfig& config, std::ostream& log) {
  EnsureOutputDir(config);
  const SkuCatalog catalog = DefaultCatalog();
  Dataset ds = GenerateSynthetic(config.synthetic, catalog);
  std::vector<double> chi;
  if (config.upscale) chi = Upscale(ds, config.upscale_spec);

  const auto dims = catalog.dims();
  WriteCatalog(config.Path("catalog", "catalog.csv"), catalog);
  WriteTelemetry(config.Path("telemetry", "telemetry.csv"), ds.traces, dims);
  WriteProfiles(config.Path("profiles", "profiles.csv"), ds.feature_names,
                ds.resource_ids, ds.profiles);
  WriteCapacities(config.Path("capacities", "capacities.csv"), ds.resource_ids,
                  ds.user_capacity, dims);

  std::map<std::string, std::size_t> chi_histogram;
  for (double x : chi) ++chi_histogram[csv::FormatNumber(x)];
  nlohmann::json manifest = {
      {"generator", "skurec gen-synthetic"},
      {"seed", config.synthetic.seed},
      {"resources", ds.size()},
      {"synthetic", config.synthetic.ToJson()},
      {"upscaled", config.upscale},
      {"deviations",
       {{"user_capacity_scaled_with_traces", config.upscale},
        {"traces_reclamped_to_scaled_capacity", config.upscale}}}};
  if (config.upscale) {
    manifest["upscale"] = config.upscale_spec.ToJson();
    manifest["upscale_exponent_counts"] = chi_histogram;
  }
  WriteJson(config.Path("manifest", "manifest.json"), manifest);
  log << "generated " << ds.size() << " resources in "
      << config.output_dir.string() << "\n";
  return kExitOk;
}

int CmdRightsize(const PipelineConfig& config, std::ostream& log) {
  EnsureOutputDir(config);
  const SkuCatalog catalog = ReadCatalog(config.Path("catalog", "catalog.csv"));
  const auto dims = catalog.dims();
  const ProfileTable profiles =
      ReadProfiles(config.Path("profiles", "profiles.csv"));
  LoadReport report;
  const auto traces =
      ReadTelemetry(config.Path("telemetry", "telemetry.csv"), dims, &report);
  const auto capacities =
      ReadCapacities(config.Path("capacities", "capacities.csv"), dims, &report);
  for (const auto& m : report.messages) log << "skipped: " << m << "\n";

  const std::size_t main_dim = DimensionIndex(config, catalog);
  csv::Writer out(config.Path("rightsized", "rightsized.csv"));
  out.Row({"resource_id", "dimension", "user_capacity", "rightsized_capacity",
           "censored", "slack_at_rightsized", "throttle_at_rightsized"});
  std::size_t over = 0, under = 0, right = 0, censored = 0, infeasible = 0;
  std::size_t missing = 0;
  for (std::size_t i = 0; i < profiles.resource_ids.size(); ++i) {
    const std::string& id = profiles.resource_ids[i];
    auto t = traces.find(id);
    auto c = capacities.find(id);
    const Offering& offering = profiles.profiles[i].offering;
    if (t == traces.end() || c == capacities.end() || !catalog.Has(offering)) {
      log << "warning: resource " << id
          << " lacks telemetry, capacity or a catalog offering; skipped\n";
      ++missing;
      continue;
    }
    std::vector<CandidateSet> sets;
    for (const auto& d : dims) sets.push_back(catalog.Get(offering, d.index));
    const ResampledWorkload w = Resample(t->second, config.rightsizer.bin_width_min);
    const RightsizeResult res = Rightsize(w, c->second, sets, config.rightsizer);
    const auto eta = config.rightsizer.Etas(dims.size());
    for (const auto& d : dims) {
      const auto r = static_cast<std::size_t>(d.index);
      const CapacityVector trial = c->second.With(r, res.capacity[r]);
      out.Row({id, d.name, csv::FormatNumber(c->second[r]),
               csv::FormatNumber(res.capacity[r]), res.censored ? "1" : "0",
               csv::FormatNumber(SlackRatio(w, trial)[r]),
               csv::FormatNumber(ThrottlingProbability(w, trial, eta))});
      if (res.constraint_infeasible[r]) ++infeasible;
    }
    if (res.censored) ++censored;
    const double user = c->second[main_dim];
    const double fit = res.capacity[main_dim];
    if (fit < user) {
      ++over;
    } else if (fit > user) {
      ++under;
    } else {
      ++right;
    }
  }
  out.Close();

  const std::size_t n = over + under + right;
  auto share = [n](std::size_t k) {
    return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
  };
  const nlohmann::json summary = {
      {"resources", n},
      {"skipped_resources", missing},
      {"over_provisioned", share(over)},
      {"under_provisioned", share(under)},
      {"right_sized", share(right)},
      {"censored", share(censored)},
      {"constraint_infeasible_dims", infeasible},
      {"rows_read", report.rows},
      {"rows_skipped", report.skipped}};
  WriteJson(config.Path("rightsize_summary", "rightsize_summary.json"), summary);
  log << "rightsized " << n << " resources: over " << share(over) << ", under "
      << share(under) << ", right " << share(right) << "\n";
  if (report.SkippedFraction() > 0.01) {
    log << "error: " << report.skipped << " of " << report.rows
        << " input rows were malformed\n";
    return kExitInput;
  }
  return kExitOk;
}

int CmdLearnHierarchy(const PipelineConfig& config, std::ostream& log) {
  EnsureOutputDir(config);
  const ProfileTable profiles =
      ReadProfiles(config.Path("profiles", "profiles.csv"));
  const CategoricalTable table =
      CategoricalTable::FromProfiles(profiles.feature_names, profiles.profiles);
  const HierarchyModel model =
      LearnHierarchyOrSchema(table, config.hierarchy_threshold);
  if (model.schema_fallback) {
    log << "warning: no hierarchy passes the threshold; using schema order\n";
  }
  model.Save(config.Path("hierarchy", "hierarchy.json"));
  std::string chain;
  for (const auto& name : model.ChainNames()) {
    chain += (chain.empty() ? "" : " > ") + name;
  }
  log << "hierarchy: " << chain << "\n";
  return kExitOk;
}

int CmdTrain(const PipelineConfig& config, std::ostream& log) {
  EnsureOutputDir(config);
  const SkuCatalog catalog = ReadCatalog(config.Path("catalog", "catalog.csv"));
  const std::size_t dim = DimensionIndex(config, catalog);
  const std::string dim_name = catalog.dims()[dim].name;
  const ProfileTable profiles =
      ReadProfiles(config.Path("profiles", "profiles.csv"));
  const auto labels =
      ReadLabels(config.Path("rightsized", "rightsized.csv"), dim_name);

  const fs::path hierarchy_path = config.Path("hierarchy", "hierarchy.json");
  HierarchyModel hierarchy;
  if (fs::exists(hierarchy_path)) {
    hierarchy = HierarchyModel::Load(hierarchy_path);
  } else {
    log << "no hierarchy model found; learning one\n";
    hierarchy = LearnHierarchyOrSchema(
        CategoricalTable::FromProfiles(profiles.feature_names, profiles.profiles),
        config.hierarchy_threshold);
    hierarchy.Save(hierarchy_path);
  }
  CheckSchema(hierarchy, profiles.feature_names);

  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < profiles.resource_ids.size(); ++i) {
    if (labels.count(profiles.resource_ids[i])) labeled.push_back(i);
  }
  if (labeled.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no labeled profiles to train on");
  }
  std::mt19937_64 rng(config.seed);
  std::shuffle(labeled.begin(), labeled.end(), rng);
  const auto n = static_cast<double>(labeled.size());
  const auto n_train = static_cast<std::size_t>(std::floor(config.train_fraction * n));
  const auto n_val =
      static_cast<std::size_t>(std::floor(config.validation_fraction * n));

  std::vector<LabeledProfile> train, validation;
  std::vector<std::pair<std::string, Split>> split_rows;
  for (std::size_t k = 0; k < labeled.size(); ++k) {
    const std::size_t i = labeled[k];
    const Split s = k < n_train           ? Split::kTrain
                    : k < n_train + n_val ? Split::kValidation
                                          : Split::kTest;
    split_rows.emplace_back(profiles.resource_ids[i], s);
    LabeledProfile row{profiles.profiles[i],
                       labels.at(profiles.resource_ids[i]).rightsized};
    if (s == Split::kTrain) train.push_back(std::move(row));
    if (s == Split::kValidation) validation.push_back(std::move(row));
  }
  std::sort(split_rows.begin(), split_rows.end());

  HierarchicalConfig hcfg = config.hierarchical;
  hcfg.log_base = config.log_base;
  const auto hier = HierarchicalProvisioner::Fit(train, hierarchy, catalog, dim,
                                                 hcfg, config.min_offering_rows);
  WarnDefaultOnly(hier.DefaultOnlyOfferings(), "hierarchical", log);
  const PredictionStore store = hier.ExportStore();

  TargetEncodingConfig tcfg = config.target_encoding;
  tcfg.log_base = config.log_base;
  const auto te = TargetEncodingProvisioner::Fit(
      train, profiles.feature_names.size(), catalog, dim, tcfg,
      config.min_offering_rows);
  WarnDefaultOnly(te.DefaultOnlyOfferings(), "target_encoding", log);

  const LogTransform xi(config.log_base);
  const ValidationStats hstats = Validate(validation, xi, [&](const ProfileRecord& p) {
    return PredictFromStore(store, hierarchy, p, catalog.Get(p.offering, dim));
  });
  const ValidationStats tstats = Validate(
      validation, xi, [&](const ProfileRecord& p) { return te.Predict(p); });
  const ValidationStats& selected =
      config.provisioner == ProvisionerKind::kHierarchical ? hstats : tstats;
  const bool passed = selected.n == 0 ||
                      selected.mean_abs_log_error <= config.validation_gate;

  WriteJson(config.Path("validation_report", "validation_report.json"),
            {{"seed", config.seed},
             {"train_rows", train.size()},
             {"validation_rows", validation.size()},
             {"selected", ProvisionerName(config.provisioner)},
             {"gate", config.validation_gate},
             {"passed", passed},
             {"hierarchical", hstats.ToJson()},
             {"target_encoding", tstats.ToJson()}});
  log << "validation mean |log error|: hierarchical "
      << hstats.mean_abs_log_error << ", target_encoding "
      << tstats.mean_abs_log_error << "\n";
  if (!passed) {
    log << "error: validation gate failed for "
        << ProvisionerName(config.provisioner) << "; no model written\n";
    return kExitGate;
  }

  csv::Writer split_out(config.Path("split", "split.csv"));
  split_out.Row({"resource_id", "split"});
  for (const auto& [id, s] : split_rows) split_out.Row({id, SplitName(s)});
  split_out.Close();
  store.Save(config.Path("prediction_store", "prediction_store.csv"));
  WriteJson(config.Path("te_model", "te_model.json"), te.ToJson());
  log << "trained on " << train.size() << " rows; prediction store has "
      << store.rows().size() << " keys\n";
  return kExitOk;
}

int CmdPredict(const PipelineConfig& config, std::ostream& log) {
  EnsureOutputDir(config);
  const SkuCatalog catalog = ReadCatalog(config.Path("catalog", "catalog.csv"));
  const std::size_t dim = DimensionIndex(config, catalog);
  const auto in_path = config.paths.find("predict_input");
  const ProfileTable input = ReadProfiles(
      in_path != config.paths.end() ? in_path->second
                                    : config.Path("profiles", "profiles.csv"));
  const HierarchyModel hierarchy =
      HierarchyModel::Load(config.Path("hierarchy", "hierarchy.json"));
  CheckSchema(hierarchy, input.feature_names);

  std::optional<PredictionStore> store;
  std::optional<TargetEncodingProvisioner> te;
  if (config.provisioner == ProvisionerKind::kHierarchical) {
    store = PredictionStore::Load(
        config.Path("prediction_store", "prediction_store.csv"));
  } else {
    te = TargetEncodingProvisioner::FromJson(
        ReadJson(config.Path("te_model", "te_model.json")));
  }
  const fs::path store_path = config.Path("lambda_store", "lambda_store.json");
  const LambdaStore lambdas =
      fs::exists(store_path) ? LambdaStore::Load(store_path) : LambdaStore();

  std::array<std::size_t, 3> keys{};
  for (std::size_t k = 0; k < 3; ++k) {
    keys[k] = FeatureIndex(input.feature_names, config.lambda_keys[k]);
  }
  double fallback_min = std::numeric_limits<double>::infinity();
  for (const auto& o : catalog.Offerings()) {
    fallback_min = std::min(fallback_min, catalog.Get(o, dim).min());
  }

  const LogTransform xi(config.log_base);
  csv::Writer out(config.Path("recommendations", "recommendations.csv"));
  out.Row({"resource_id", "offering", "model", "stage2_capacity",
           "raw_prediction", "lambda", "recommended_capacity", "matched_level",
           "matched_value", "support", "explanation"});
  std::size_t unknown = 0;
  for (std::size_t i = 0; i < input.profiles.size(); ++i) {
    const ProfileRecord& p = input.profiles[i];
    if (!catalog.Has(p.offering)) {
      ++unknown;
      out.Row({input.resource_ids[i], p.offering.Name(),
               ProvisionerName(config.provisioner),
               csv::FormatNumber(fallback_min), csv::FormatNumber(fallback_min),
               "0", csv::FormatNumber(fallback_min), "", "", "0",
               "default_fallback;unknown_offering"});
      continue;
    }
    const CandidateSet& candidates = catalog.Get(p.offering, dim);
    const ProvisionerPrediction pred =
        store ? PredictFromStore(*store, hierarchy, p, candidates)
              : te->Predict(p);
    const double lambda =
        lambdas.Lookup(p.values[keys[0]], p.values[keys[1]], p.values[keys[2]],
                       p.offering.Name());
    const double adjusted = Adjust(pred.capacity, lambda, xi, candidates);
    std::string explanation;
    if (pred.default_fallback) {
      explanation = "default_fallback";
    } else if (store) {
      explanation = "bucket " + pred.matched_level + "=" + pred.matched_value;
    } else {
      explanation = "target_encoding";
    }
    if (lambda != 0.0) explanation += ";personalized";
    out.Row({input.resource_ids[i], p.offering.Name(),
             ProvisionerName(config.provisioner),
             csv::FormatNumber(pred.capacity), csv::FormatNumber(pred.raw),
             csv::FormatNumber(lambda), csv::FormatNumber(adjusted),
             pred.matched_level, pred.matched_value,
             std::to_string(pred.support), explanation});
  }
  out.Close();
  if (unknown > 0) {
    log << "warning: " << unknown
        << " rows name an offering absent from the catalog\n";
  }
  log << "wrote " << input.profiles.size() << " recommendations\n";
  return kExitOk;
}

int CmdEvaluate(const PipelineConfig& config, std::ostream& log) {
  EnsureOutputDir(config);
  const SkuCatalog catalog = ReadCatalog(config.Path("catalog", "catalog.csv"));
  const std::size_t dim = DimensionIndex(config, catalog);
  const std::string dim_name = catalog.dims()[dim].name;
  const ProfileTable profiles =
      ReadProfiles(config.Path("profiles", "profiles.csv"));
  const auto split = ReadSplit(config.Path("split", "split.csv"));
  const auto labels =
      ReadLabels(config.Path("rightsized", "rightsized.csv"), dim_name);
  const HierarchyModel hierarchy =
      HierarchyModel::Load(config.Path("hierarchy", "hierarchy.json"));
  CheckSchema(hierarchy, profiles.feature_names);
  const PredictionStore store = PredictionStore::Load(
      config.Path("prediction_store", "prediction_store.csv"));
  const auto te = TargetEncodingProvisioner::FromJson(
      ReadJson(config.Path("te_model", "te_model.json")));

  // Only test-split telemetry is loaded.
  std::set<std::string> test_ids;
  for (const auto& [id, s] : split) {
    if (s == Split::kTest) test_ids.insert(id);
  }
  LoadReport report;
  const auto traces = ReadTelemetry(config.Path("telemetry", "telemetry.csv"),
                                    catalog.dims(), &report);
  const double eta = config.rightsizer.Eta(dim);
  std::vector<EvalWorkload> workloads;
  std::vector<double> hier_pred, te_pred, user, rightsized;
  std::vector<bool> censored;
  for (std::size_t i = 0; i < profiles.resource_ids.size(); ++i) {
    const std::string& id = profiles.resource_ids[i];
    if (!test_ids.count(id)) continue;
    auto t = traces.find(id);
    auto l = labels.find(id);
    const ProfileRecord& p = profiles.profiles[i];
    if (t == traces.end() || l == labels.end() || !catalog.Has(p.offering)) {
      continue;
    }
    const CandidateSet& candidates = catalog.Get(p.offering, dim);
    workloads.emplace_back(Resample(t->second, config.rightsizer.bin_width_min),
                           dim, eta, p.offering,
                           std::vector<double>(candidates.values().begin(),
                                               candidates.values().end()));
    hier_pred.push_back(PredictFromStore(store, hierarchy, p, candidates).raw);
    te_pred.push_back(te.Predict(p).raw);
    user.push_back(l->second.user);
    rightsized.push_back(l->second.rightsized);
    censored.push_back(l->second.censored);
  }
  if (workloads.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "no test workloads to evaluate");
  }

  const double tau = config.rightsizer.throttling_bound;
  const LogTransform xi(config.log_base);
  std::map<std::string, CurveResult> curves;
  curves["hierarchical"] =
      ParetoCurve(hier_pred, workloads, config.exponents, tau, xi);
  curves["target_encoding"] =
      ParetoCurve(te_pred, workloads, config.exponents, tau, xi);
  curves["default_baseline"] =
      DefaultBaseline(workloads, tau, config.baseline_max_per_offering);
  WriteCurves(config.Path("curves", "curves.csv"), curves);

  const auto baseline_best = BestUnderThrottling(
      curves["default_baseline"].points, config.throttle_bound);

  csv::Writer out(config.Path("summary", "summary.csv"));
  out.Row({"model", "operating_point", "mean_abs_slack", "throttling_ratio",
           "slack_reduction_vs_baseline", "total_vcores", "throttled_hours"});
  auto emit = [&](const std::string& model, const std::string& point,
                  const EvalPoint& p, const std::vector<double>& caps,
                  std::span<const EvalWorkload> ws) {
    const CostTotals cost =
        ExtrapolateCost(MeasureCost(ws, caps), ws.size(),
                        config.population == 0 ? ws.size() : config.population);
    std::string reduction;
    if (baseline_best && baseline_best->mean_abs_slack > 0.0) {
      reduction = csv::FormatNumber(1.0 - p.mean_abs_slack /
                                              baseline_best->mean_abs_slack);
    }
    out.Row({model, point, csv::FormatNumber(p.mean_abs_slack),
             csv::FormatNumber(p.throttling_ratio), reduction,
             csv::FormatNumber(cost.vcores),
             csv::FormatNumber(cost.throttled_hours)});
  };
  auto scaled = [&](const std::vector<double>& pred, double e) {
    std::vector<double> caps(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      caps[i] = Discretize(pred[i] * std::pow(xi.base(), e),
                           workloads[i].candidates(), xi);
    }
    return caps;
  };
  for (const std::string model : {"hierarchical", "target_encoding"}) {
    const auto& pred = model == "hierarchical" ? hier_pred : te_pred;
    if (auto best = BestUnderThrottling(curves[model].points,
                                        config.throttle_bound)) {
      emit(model, "exponent=" + csv::FormatNumber(best->exponent), *best,
           scaled(pred, best->exponent), workloads);
    } else {
      log << "warning: " << model << " has no point under the throttling bound\n";
    }
  }
  if (baseline_best) {
    // Rebuild the baseline capacities from the chosen defaults.
    std::map<std::string, double> defaults;
    std::istringstream labels(baseline_best->label);
    for (std::string item; std::getline(labels, item, '|');) {
      const auto eq = item.find('=');
      defaults[item.substr(0, eq)] = csv::ParseNumber(item.substr(eq + 1));
    }
    std::vector<double> caps;
    for (const auto& w : workloads) caps.push_back(defaults.at(w.offering().Name()));
    emit("default_baseline", baseline_best->label, *baseline_best, caps,
         workloads);
  }
  emit("user_selection", "as_provisioned", Evaluate(workloads, user, tau), user,
       workloads);
  emit("rightsized", "labels", Evaluate(workloads, rightsized, tau),
       rightsized, workloads);

  std::vector<EvalWorkload> uncensored_w;
  std::vector<double> uncensored_c;
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    if (!censored[i]) {
      uncensored_w.push_back(workloads[i]);
      uncensored_c.push_back(rightsized[i]);
    }
  }
  if (!uncensored_w.empty()) {
    emit("rightsized_uncensored", "labels",
         Evaluate(uncensored_w, uncensored_c, tau), uncensored_c, uncensored_w);
  }
  out.Close();
  log << "evaluated " << workloads.size() << " test workloads\n";
  return kExitOk;
}

int CmdSimulate(const PipelineConfig& config, bool grid, std::ostream& log) {
  EnsureOutputDir(config);
  const SimConfig& sim = config.simulation;
  const std::size_t seeds = std::max<std::size_t>(config.simulation_seeds, 1);
  std::vector<SimMetrics> mean(sim.iterations + 1);
  std::vector<double> signals(sim.iterations + 1, 0.0);
  for (std::size_t k = 0; k < seeds; ++k) {
    SimConfig c = sim;
    c.seed = sim.seed + k;
    const auto history = RunSimulation(c);
    for (std::size_t t = 0; t < history.size(); ++t) {
      mean[t].iteration = t;
      mean[t].rmse += history[t].rmse / static_cast<double>(seeds);
      mean[t].p80_error += history[t].p80_error / static_cast<double>(seeds);
      signals[t] += static_cast<double>(history[t].n_signals);
    }
  }
  for (std::size_t t = 0; t < mean.size(); ++t) {
    mean[t].n_signals = static_cast<std::size_t>(
        std::llround(signals[t] / static_cast<double>(seeds)));
  }
  WriteSimMetrics(config.Path("sim_metrics", "sim_metrics.csv"), mean);
  const auto conv = ConvergenceIteration(mean);
  log << "mean RMSE at iteration " << sim.iterations << ": "
      << mean.back().rmse << "; 80th-percentile convergence at "
      << (conv ? std::to_string(*conv) : std::string("never")) << "\n";
  if (grid) {
    const auto cells = RunGrid(sim, config.grid_noises, config.grid_sigmas,
                               config.grid_rates, config.grid_seeds);
    WriteSimGrid(config.Path("sim_grid", "sim_grid.csv"), cells);
    log << "wrote " << cells.size() << " grid cells\n";
  }
  return kExitOk;
}

int CmdUpdateProfiles(const PipelineConfig& config, std::ostream& log) {
  EnsureOutputDir(config);
  const fs::path store_path = config.Path("lambda_store", "lambda_store.json");
  StoreLock lock(store_path);
  LambdaStore store =
      fs::exists(store_path) ? LambdaStore::Load(store_path) : LambdaStore();

  std::vector<SatisfactionSignal> signals;
  const fs::path signal_path = config.Path("signals", "signals.csv");
  if (fs::exists(signal_path)) signals = ReadSignals(signal_path);

  // tickets.csv: customer,subscription,resource_group,stratification,
  // symptoms,subject,resolution
  const fs::path ticket_path = config.Path("tickets", "tickets.csv");
  std::size_t from_tickets = 0;
  if (fs::exists(ticket_path)) {
    csv::Reader in(ticket_path);
    const std::size_t c = in.Column("customer");
    const std::size_t s = in.Column("subscription");
    const std::size_t r = in.Column("resource_group");
    const std::size_t st = in.Column("stratification");
    const std::size_t sy = in.Column("symptoms");
    const std::size_t su = in.Column("subject");
    const std::size_t re = in.Column("resolution");
    std::vector<std::string> f;
    while (in.Next(f)) {
      if (f.size() != in.header().size()) {
        throw Error(ErrorCode::kInput, ticket_path.string() + ":" +
                                           std::to_string(in.line_number()) +
                                           ": wrong field count");
      }
      const int gamma = ClassifyTicket({f[sy], f[su], f[re]}, config.ticket_filters);
      if (gamma == 0) continue;
      signals.push_back({{f[c], f[s], f[r], f[st]},
                         static_cast<double>(gamma),
                         SignalSource::kCri});
      ++from_tickets;
    }
  }

  for (const auto& sig : signals) Propagate(store, sig, config.propagation);
  store.BumpVersion();
  store.Save(store_path);
  log << "applied " << signals.size() << " signals (" << from_tickets
      << " from tickets); store version " << store.version() << "\n";
  return kExitOk;
}

}  // namespace skurec
