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

// Command-line front end for the batch pipeline.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "skurec/core.h"
#include "skurec/pipeline.h"

int main(int argc, char** argv) {
  CLI::App app{"skurec: SKU capacity recommendations from telemetry and profiles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  app.add_option("-c,--config", config_path, "JSON pipeline config")
      ->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("-s,--seed", seed, "seed for every component");

  bool grid = false;
  std::string provisioner;
  app.add_subcommand("gen-synthetic", "write a synthetic dataset");
  app.add_subcommand("rightsize", "rightsize every resource");
  app.add_subcommand("learn-hierarchy", "learn the profile feature chain");
  app.add_subcommand("train", "fit provisioners and export the prediction store");
  auto* predict = app.add_subcommand("predict", "recommend capacities");
  auto* evaluate = app.add_subcommand("evaluate", "Pareto curves on the test split");
  auto* simulate = app.add_subcommand("simulate", "personalization simulation");
  simulate->add_flag("--grid", grid, "also sweep noise, sigma and signal rate");
  app.add_subcommand("update-profiles", "apply satisfaction signals");
  for (auto* sub : {predict, evaluate}) {
    sub->add_option("--provisioner", provisioner, "hierarchical or target_encoding")
        ->check(CLI::IsMember({"hierarchical", "target_encoding"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? skurec::kExitOk : skurec::kExitInput;
  }

  try {
    skurec::PipelineConfig config = config_path.empty()
                                         ? skurec::PipelineConfig{}
                                         : skurec::PipelineConfig::Load(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (*seed_opt) config.SetSeed(seed);
    if (provisioner == "target_encoding") {
      config.provisioner = skurec::ProvisionerKind::kTargetEncoding;
    } else if (provisioner == "hierarchical") {
      config.provisioner = skurec::ProvisionerKind::kHierarchical;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "gen-synthetic") return skurec::CmdGenSynthetic(config, std::cerr);
    if (name == "rightsize") return skurec::CmdRightsize(config, std::cerr);
    if (name == "learn-hierarchy") return skurec::CmdLearnHierarchy(config, std::cerr);
    if (name == "train") return skurec::CmdTrain(config, std::cerr);
    if (name == "predict") return skurec::CmdPredict(config, std::cerr);
    if (name == "evaluate") return skurec::CmdEvaluate(config, std::cerr);
    if (name == "simulate") return skurec::CmdSimulate(config, grid, std::cerr);
    if (name == "update-profiles") return skurec::CmdUpdateProfiles(config, std::cerr);
  } catch (const skurec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return skurec::ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return skurec::kExitInput;
  }
  return skurec::kExitInput;
}
