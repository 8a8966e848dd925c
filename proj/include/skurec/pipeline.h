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

#ifndef SKUREC_PIPELINE_H_
#define SKUREC_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "skurec/datagen.h"
#include "skurec/evaluator.h"
#include "skurec/personalizer.h"
#include "skurec/provisioners.h"
#include "skurec/rightsizer.h"
#include "skurec/simulator.h"

namespace skurec {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitGate = 1;
inline constexpr int kExitInput = 2;

enum class ProvisionerKind { kHierarchical, kTargetEncoding };

const char* ProvisionerName(ProvisionerKind kind);

struct PipelineConfig {
  // Every artifact lives in the output directory unless a path is given.
  std::filesystem::path output_dir = "out";
  std::map<std::string, std::filesystem::path> paths;

  RightsizerConfig rightsizer;
  std::string dimension;  // empty: the catalog's first dimension
  double log_base = 2.0;

  ProvisionerKind provisioner = ProvisionerKind::kHierarchical;
  HierarchicalConfig hierarchical;
  double hierarchy_threshold = 0.6;
  TargetEncodingConfig target_encoding;
  std::size_t min_offering_rows = 10;

  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  double validation_gate = 1.0;

  // Profile features that hold the customer, subscription and resource group.
  std::vector<std::string> lambda_keys = {"CloudCustomerGuid", "SubscriptionId",
                                          "ResourceGroup"};
  PropagationConfig propagation;
  TicketFilters ticket_filters = TicketFilters::Default();

  SyntheticSpec synthetic;
  bool upscale = true;
  UpscaleSpec upscale_spec;

  SimConfig simulation;
  std::size_t simulation_seeds = 20;
  std::vector<double> grid_noises = {0.0, 0.13, 0.26, 0.40};
  std::vector<double> grid_sigmas = {0.0, 0.1, 0.25};
  std::vector<double> grid_rates = {0.1, 0.4, 0.7, 1.0};
  std::size_t grid_seeds = 5;

  std::vector<double> exponents = DefaultExponents();
  double throttle_bound = 0.10;
  std::size_t baseline_max_per_offering = 10;
  std::size_t population = 0;  // 0: no cost extrapolation

  std::uint64_t seed = 0;

  // Resolves a named artifact: an explicit path, else output_dir/default.
  std::filesystem::path Path(const std::string& name,
                             const std::string& default_file) const;
  // Applies a seed to every seeded component.
  void SetSeed(std::uint64_t value);

  static PipelineConfig FromJson(const nlohmann::json& j);
  static PipelineConfig Load(const std::filesystem::path& path);
};

// Each command reads and writes files under the configured paths, logs to
// `log`, and returns a process exit code. Library errors propagate as
// skurec::Error.
int CmdGenSynthetic(const PipelineConfig& config, std::ostream& log);
int CmdRightsize(const PipelineConfig& config, std::ostream& log);
int CmdLearnHierarchy(const PipelineConfig& config, std::ostream& log);
int CmdTrain(const PipelineConfig& config, std::ostream& log);
int CmdPredict(const PipelineConfig& config, std::ostream& log);
int CmdEvaluate(const PipelineConfig& config, std::ostream& log);
int CmdSimulate(const PipelineConfig& config, bool grid, std::ostream& log);
int CmdUpdateProfiles(const PipelineConfig& config, std::ostream& log);

// Maps an error to the exit code the tool reports for it.
int ExitCodeFor(const Error& error);

}  // namespace skurec

#endif  // SKUREC_PIPELINE_H_
