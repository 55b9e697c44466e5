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

#ifndef MIA_PIPELINE_H_
#define MIA_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mia/evaluation.h"
#include "mia/pseudo_label.h"
#include "mia/scoring.h"
#include "mia/synthesizer.h"
#include "mia/training.h"

namespace mia {

// Sub-seed stages derived from the pipeline seed with DeriveSeed().
inline constexpr std::uint64_t kSynthSeedStage = 3;
inline constexpr std::uint64_t kTrainSeedStage = 4;

struct PipelineConfig {
  std::filesystem::path target_manifest;          // pool under attack
  std::optional<std::filesystem::path> aux_manifest;  // pseudo-label pool, defaults to target
  std::optional<SynthConfig> synth;               // generate the target pool first
  Level level = Level::kUtterance;
  Metric metric = Metric::kCosine;
  std::optional<std::size_t> k;                   // defaults: 500 utterance, 1 speaker
  std::optional<double> k_fraction;               // k = max(1, round(fraction * pool rows))
  TrainConfig train;
  std::vector<double> fpr_targets = kDefaultFprTargets;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Relative paths in the config resolve against `base_dir`. Explicit "seed"
// entries inside "synth" or "train" override the derived sub-seeds.
PipelineConfig PipelineConfigFromJson(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir);

struct PipelineSummary {
  double basic_auc = 0.0;
  double improved_auc = 0.0;
  Level level = Level::kUtterance;
  Metric metric = Metric::kCosine;
  std::size_t k = 0;
  std::string pseudo_label_pool;  // "target" or "aux"
  std::uint64_t seed = 0;
  std::size_t basic_skipped = 0;
  std::size_t improved_skipped = 0;
};

nlohmann::json SummaryToJson(const PipelineSummary& summary);

// Creates `dir`. A non-empty existing directory is an error unless
// `overwrite`, in which case its contents are removed first.
void PrepareOutputDir(const std::filesystem::path& dir, bool overwrite);

// Each Run* function writes its artifacts under `out_dir`, which must exist.
Manifest RunSynth(const SynthConfig& cfg, const std::filesystem::path& out_dir);

// scores.csv and skipped.csv.
ScoredDataset RunScore(const std::filesystem::path& manifest, Level level, Metric metric,
                       const std::filesystem::path& out_dir);

// pseudo_labels.json.
PseudoLabelSet RunPseudoLabel(const std::filesystem::path& scores, Level level, std::size_t k,
                              const std::filesystem::path& out_dir);

// checkpoint.miac and train_history.json.
void RunTrain(const std::filesystem::path& labels, const std::filesystem::path& manifest,
              const TrainConfig& cfg, const std::filesystem::path& out_dir);

// scores.csv and skipped.csv holding improved-attack scores.
ScoredDataset RunInfer(const std::filesystem::path& checkpoint,
                       const std::filesystem::path& manifest,
                       const std::filesystem::path& out_dir);

// report.json and roc.csv.
EvalReport RunEvaluate(const std::filesystem::path& scores, const std::vector<double>& fpr_targets,
                       const std::filesystem::path& out_dir);

// Full flow, laid out as
//   data/ (when synthesizing)  basic/  labels/  model/  improved/  summary.json
// where each stage directory holds exactly what the matching Run* writes.
PipelineSummary RunPipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir);

std::size_t ScaledK(double fraction, std::size_t pool_rows);

}  // namespace mia

#endif  // MIA_PIPELINE_H_
