/* Copyright 2026 The Radcam Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// radcam: generate synthetic scenes, train, run inference and evaluate.
//
//   radcam gen   --config C --seed N --count K --out DIR
//   radcam train --config C --scenes DIR --checkpoint CKPT --out DIR
//   radcam infer --config C --scenes DIR --checkpoint CKPT --out DIR
//   radcam eval  --scenes DIR --detections FILE [--detections FILE...] --out DIR
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric abort.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "radcam/commands.h"
#include "radcam/config.h"
#include "radcam/parallel.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> ablate;
  std::optional<int> threads;
  std::string scenes;
  std::string checkpoint;
  std::string out;
  std::vector<std::string> detections;
  int count = 10;
};

radcam::RunConfig ResolveConfig(const Options& o) {
  radcam::RunConfig c = o.config.empty() ? radcam::RunConfig{} : radcam::LoadConfig(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.ablate) c.ablation = radcam::AblationFlags::Parse(*o.ablate);
  if (o.threads) c.threads = *o.threads;
  c.Validate();
  std::cout << "# effective config (hash " << c.Hash() << ")\n" << c.Dump() << std::flush;
  return c;
}

void AddCommon(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key = value config file");
  cmd->add_option("--seed", o.seed, "run seed (overrides run.seed)");
  cmd->add_option("--threads", o.threads, "scene-level worker threads");
}

}  // namespace

int main(int argc, char** argv) {
  radcam::TuneAllocator();
  CLI::App app{"radar-camera BEV detector: synthetic data, training, inference, evaluation"};
  app.require_subcommand(1);
  Options o;

  CLI::App* gen = app.add_subcommand("gen", "generate synthetic scenes");
  AddCommon(gen, o);
  gen->add_option("--count", o.count, "number of scenes")->check(CLI::NonNegativeNumber);
  gen->add_option("--out", o.out, "output directory")->required();

  CLI::App* train = app.add_subcommand("train", "train a model on a scene directory");
  AddCommon(train, o);
  train->add_option("--ablate", o.ablate, "enabled stages: rgbq,rcg,rgpp,pra or none");
  train->add_option("--scenes", o.scenes, "training scene directory")->required();
  train->add_option("--checkpoint", o.checkpoint, "checkpoint manifest to write")->required();
  train->add_option("--out", o.out, "directory for the loss log and plots")->required();

  CLI::App* infer = app.add_subcommand("infer", "run detection over a scene directory");
  AddCommon(infer, o);
  infer->add_option("--ablate", o.ablate, "enabled stages: rgbq,rcg,rgpp,pra or none");
  infer->add_option("--scenes", o.scenes, "scene directory")->required();
  infer->add_option("--checkpoint", o.checkpoint, "trained checkpoint manifest")->required();
  infer->add_option("--out", o.out, "output directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate detections against scene ground truth");
  eval->add_option("--threads", o.threads, "scene loading threads");
  eval->add_option("--scenes", o.scenes, "scene directory")->required();
  eval->add_option("--detections", o.detections, "detections.json, repeatable")->required();
  eval->add_option("--out", o.out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const radcam::RunConfig c = ResolveConfig(o);
      const std::string hash = radcam::CmdGen(c, o.count, o.out);
      std::cout << "wrote " << o.count << " scenes to " << o.out << " (manifest hash " << hash
                << ")\n";
    } else if (*train) {
      const radcam::RunConfig c = ResolveConfig(o);
      radcam::CmdTrain(c, o.scenes, o.checkpoint, o.out);
      std::cout << "wrote checkpoint " << o.checkpoint << "\n";
    } else if (*infer) {
      const radcam::RunConfig c = ResolveConfig(o);
      radcam::CmdInfer(c, o.checkpoint, o.scenes, o.out);
      std::cout << "wrote " << (std::filesystem::path(o.out) / "detections.json").string() << "\n";
    } else if (*eval) {
      std::vector<std::filesystem::path> files(o.detections.begin(), o.detections.end());
      std::cout << radcam::CmdEval(files, o.scenes, o.out, o.threads.value_or(1));
    }
  } catch (const radcam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const radcam::NumericError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const radcam::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
