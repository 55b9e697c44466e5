// Copyright 2026 The MIA Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: synth, score, pseudo-label, train, infer, evaluate and
// pipeline subcommands over the mia library.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mia/checkpoint.h"
#include "mia/errors.h"
#include "mia/pipeline.h"
#include "mia/rng.h"

namespace {

namespace fs = std::filesystem;

nlohmann::json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw mia::StorageError("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw mia::ConfigError(path.string() + ": " + e.what());
  }
}

void ReportFailure(const std::string& kind, const std::string& message, const fs::path& out) {
  const std::string line = nlohmann::json{{"error", kind}, {"message", message}}.dump();
  std::cerr << line << std::endl;
  std::error_code ec;
  if (!out.empty() && fs::is_directory(out, ec)) {
    std::ofstream marker(out / ".failed");
    marker << line << "\n";
  }
}

struct Options {
  std::string config;
  std::string out;
  std::string manifest;
  std::string scores;
  std::string labels;
  std::string checkpoint;
  std::string level = "utterance";
  std::string metric = "cosine";
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  bool overwrite = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference attacks on frame-level speech representations"};
  app.require_subcommand(1);
  Options opt;

  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Output directory")->required();
    sub->add_flag("--overwrite", opt.overwrite, "Replace a non-empty output directory");
  };
  auto add_level = [&](CLI::App* sub) {
    sub->add_option("--level", opt.level, "utterance or speaker")
        ->check(CLI::IsMember({"utterance", "speaker"}));
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature dataset");
  synth->add_option("--config", opt.config, "SynthConfig JSON")->required();
  synth->add_option("--seed", opt.seed, "Run seed (used when the config has no seed)");
  add_out(synth);

  auto* score = app.add_subcommand("score", "Basic attack scores for a manifest");
  score->add_option("--manifest", opt.manifest, "NDJSON manifest")->required();
  add_level(score);
  score->add_option("--metric", opt.metric, "cosine or euclidean")
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  add_out(score);

  auto* pseudo = app.add_subcommand("pseudo-label", "Select top/bottom-k pseudo-labels");
  pseudo->add_option("--scores", opt.scores, "Score CSV")->required();
  add_level(pseudo);
  pseudo->add_option("--k", opt.k, "Items per class (default 500 utterance, 1 speaker)");
  add_out(pseudo);

  auto* train = app.add_subcommand("train", "Train the improved attack network");
  train->add_option("--labels", opt.labels, "Pseudo-label JSON")->required();
  train->add_option("--manifest", opt.manifest, "Manifest holding the labeled items")->required();
  train->add_option("--config", opt.config, "TrainConfig JSON");
  train->add_option("--seed", opt.seed, "Run seed (used when the config has no seed)");
  add_out(train);

  auto* infer = app.add_subcommand("infer", "Improved attack scores from a checkpoint");
  infer->add_option("--checkpoint", opt.checkpoint, "Checkpoint file")->required();
  infer->add_option("--manifest", opt.manifest, "NDJSON manifest")->required();
  add_out(infer);

  auto* evaluate = app.add_subcommand("evaluate", "ROC, AUC and TPR at fixed FPR");
  evaluate->add_option("--scores", opt.scores, "Score CSV with membership labels")->required();
  evaluate->add_option("--config", opt.config, "JSON with optional fpr_targets");
  add_out(evaluate);

  auto* pipeline = app.add_subcommand("pipeline", "Basic and improved attack end to end");
  pipeline->add_option("--config", opt.config, "PipelineConfig JSON")->required();
  add_level(pipeline);
  pipeline->add_option("--metric", opt.metric, "cosine or euclidean")
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  pipeline->add_option("--k", opt.k, "Pseudo-label count per class");
  pipeline->add_option("--seed", opt.seed, "Run seed");
  add_out(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ReportFailure("usage", e.what(), {});
    return 2;
  }

  const fs::path out(opt.out);
  try {
    mia::PrepareOutputDir(out, opt.overwrite);
    const mia::Level level = mia::ParseLevel(opt.level);
    const mia::Metric metric = mia::ParseMetric(opt.metric);
    const std::uint64_t run_seed = opt.seed.value_or(0);

    if (*synth) {
      mia::SynthConfig base;
      base.seed = mia::DeriveSeed(run_seed, mia::kSynthSeedStage);
      mia::RunSynth(mia::SynthConfigFromJson(ReadJsonFile(opt.config), base), out);
    } else if (*score) {
      mia::RunScore(opt.manifest, level, metric, out);
    } else if (*pseudo) {
      const std::size_t k = opt.k.value_or(level == mia::Level::kUtterance ? mia::kDefaultUtteranceK
                                                                         : mia::kDefaultSpeakerK);
      mia::RunPseudoLabel(opt.scores, level, k, out);
    } else if (*train) {
      mia::TrainConfig base;
      base.seed = mia::DeriveSeed(run_seed, mia::kTrainSeedStage);
      const mia::TrainConfig cfg =
          opt.config.empty() ? base : mia::TrainConfigFromJson(ReadJsonFile(opt.config), base);
      mia::RunTrain(opt.labels, opt.manifest, cfg, out);
    } else if (*infer) {
      mia::RunInfer(opt.checkpoint, opt.manifest, out);
    } else if (*evaluate) {
      std::vector<double> targets = mia::kDefaultFprTargets;
      if (!opt.config.empty()) {
        const auto j = ReadJsonFile(opt.config);
        if (j.contains("fpr_targets")) targets = j["fpr_targets"].get<std::vector<double>>();
      }
      mia::RunEvaluate(opt.scores, targets, out);
    } else if (*pipeline) {
      nlohmann::json j = ReadJsonFile(opt.config);
      if (pipeline->count("--level")) j["level"] = opt.level;
      if (pipeline->count("--metric")) j["metric"] = opt.metric;
      if (opt.k) j["k"] = *opt.k;
      if (opt.seed) j["seed"] = *opt.seed;
      const auto cfg = mia::PipelineConfigFromJson(j, fs::path(opt.config).parent_path());
      const auto summary = mia::RunPipeline(cfg, out);
      std::cout << mia::SummaryToJson(summary).dump() << std::endl;
    }
  } catch (const mia::Error& e) {
    ReportFailure(e.kind(), e.what(), out);
    return 1;
  } catch (const nlohmann::json::exception& e) {
    ReportFailure("config", e.what(), out);
    return 1;
  } catch (const std::exception& e) {
    ReportFailure("internal", e.what(), out);
    return 1;
  }
  return 0;
}
