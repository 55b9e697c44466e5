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

#include "mia/pipeline.h"

#include <cmath>
#include <iostream>

#include "binary_io.h"
#include "mia/attack_model.h"
#include "mia/checkpoint.h"
#include "mia/errors.h"
#include "mia/rng.h"
#include "parallel.h"

namespace mia {
namespace {

namespace fs = std::filesystem;

std::string SkippedToCsv(const std::vector<SkippedItem>& skipped) {
  std::string out = "id,reason\n";
  for (const auto& s : skipped) {
    std::string reason = s.reason;
    for (char& c : reason) {
      if (c == '\n' || c == ',') c = ' ';
    }
    out += s.id + "," + reason + "\n";
  }
  return out;
}

void WriteScored(const ScoredDataset& scored, const fs::path& out_dir) {
  WriteScoreTable(scored.table, out_dir / "scores.csv");
  internal::WriteFileBytes(out_dir / "skipped.csv", SkippedToCsv(scored.skipped));
  for (const auto& s : scored.skipped) {
    std::cerr << "warning: skipped \"" << s.id << "\": " << s.reason << "\n";
  }
}

void MakeDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StorageError("cannot create " + dir.string() + ": " + ec.message());
}

fs::path ResolveAgainst(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

ScoredDataset InferScores(const Checkpoint& checkpoint, const Manifest& manifest,
                          std::span<const FeatureSequence> sequences) {
  ScoredDataset out;
  out.table.kind = checkpoint.level();
  if (const auto* net = std::get_if<UtteranceNet>(&checkpoint.net)) {
    std::vector<double> scores(sequences.size());
    std::vector<std::string> reasons(sequences.size());
    internal::ParallelFor(sequences.size(), [&](std::size_t i) {
      try {
        scores[i] = ImprovedUtteranceScore(*net, sequences[i]);
      } catch (const TooFewFramesError& e) {
        reasons[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      const auto& entry = manifest.entries[i];
      if (reasons[i].empty()) {
        out.table.rows.push_back({entry.utterance_id, scores[i], entry.membership});
      } else {
        out.skipped.push_back({entry.utterance_id, reasons[i]});
      }
    }
  } else {
    const auto& snet = std::get<SpeakerNet>(checkpoint.net);
    const auto groups = GroupBySpeaker(sequences);
    std::vector<double> scores(groups.size());
    std::vector<std::string> reasons(groups.size());
    internal::ParallelFor(groups.size(), [&](std::size_t i) {
      try {
        scores[i] = ImprovedSpeakerScore(snet, groups[i]);
      } catch (const TooFewUtterancesError& e) {
        reasons[i] = e.what();
      } catch (const TooFewFramesError& e) {
        reasons[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (reasons[i].empty()) {
        out.table.rows.push_back(
            {groups[i].speaker_id, scores[i], SpeakerMembership(manifest, groups[i].speaker_id)});
      } else {
        out.skipped.push_back({groups[i].speaker_id, reasons[i]});
      }
    }
  }
  return out;
}

}  // namespace

void PipelineConfig::Validate() const {
  if (target_manifest.empty() && !synth) {
    throw ConfigError("pipeline needs target_manifest or a synth section");
  }
  if (k && *k < 1) throw ConfigError("k must be at least 1");
  if (k_fraction && !(*k_fraction > 0.0 && *k_fraction <= 0.5)) {
    throw ConfigError("k_fraction must lie in (0, 0.5]");
  }
  train.Validate();
  for (double t : fpr_targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("fpr_targets must lie in [0, 1]");
  }
}

PipelineConfig PipelineConfigFromJson(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  PipelineConfig cfg;
  try {
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("target_manifest")) {
      cfg.target_manifest = ResolveAgainst(base_dir, j["target_manifest"].get<std::string>());
    }
    if (j.contains("aux_manifest")) {
      cfg.aux_manifest = ResolveAgainst(base_dir, j["aux_manifest"].get<std::string>());
    }
    if (j.contains("synth")) {
      SynthConfig base;
      base.seed = DeriveSeed(cfg.seed, kSynthSeedStage);
      cfg.synth = SynthConfigFromJson(j["synth"], base);
    }
    if (j.contains("level")) cfg.level = ParseLevel(j["level"].get<std::string>());
    if (j.contains("metric")) cfg.metric = ParseMetric(j["metric"].get<std::string>());
    if (j.contains("k")) cfg.k = j["k"].get<std::size_t>();
    if (j.contains("k_fraction")) cfg.k_fraction = j["k_fraction"].get<double>();
    TrainConfig train_base;
    train_base.seed = DeriveSeed(cfg.seed, kTrainSeedStage);
    cfg.train = j.contains("train") ? TrainConfigFromJson(j["train"], train_base) : train_base;
    if (j.contains("fpr_targets")) cfg.fpr_targets = j["fpr_targets"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

nlohmann::json SummaryToJson(const PipelineSummary& s) {
  return {{"basic_auc", s.basic_auc},
          {"improved_auc", s.improved_auc},
          {"level", ToString(s.level)},
          {"metric", ToString(s.metric)},
          {"k", s.k},
          {"pseudo_label_pool", s.pseudo_label_pool},
          {"seed", s.seed},
          {"basic_skipped", s.basic_skipped},
          {"improved_skipped", s.improved_skipped}};
}

void PrepareOutputDir(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw StorageError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec)) {
      if (!overwrite) {
        throw StorageError("output directory " + dir.string() +
                           " is not empty; pass --overwrite to replace it");
      }
      for (const auto& child : fs::directory_iterator(dir)) fs::remove_all(child.path());
    }
  }
  MakeDir(dir);
}

std::size_t ScaledK(double fraction, std::size_t pool_rows) {
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool_rows)));
  return std::max<std::size_t>(1, k);
}

Manifest RunSynth(const SynthConfig& cfg, const fs::path& out_dir) {
  return GenerateSynthetic(cfg, out_dir);
}

ScoredDataset RunScore(const fs::path& manifest_path, Level level, Metric metric,
                       const fs::path& out_dir) {
  const Manifest manifest = LoadManifest(manifest_path);
  ScoredDataset scored = ScoreDataset(manifest, level, metric);
  WriteScored(scored, out_dir);
  return scored;
}

PseudoLabelSet RunPseudoLabel(const fs::path& scores, Level level, std::size_t k,
                              const fs::path& out_dir) {
  const PseudoLabelSet labels = SelectPseudoLabels(ReadScoreTable(scores, level), k);
  WritePseudoLabels(labels, out_dir / "pseudo_labels.json");
  return labels;
}

void RunTrain(const fs::path& labels_path, const fs::path& manifest_path, const TrainConfig& cfg,
              const fs::path& out_dir) {
  const PseudoLabelSet labels = ReadPseudoLabels(labels_path);
  const Manifest manifest = LoadManifest(manifest_path);
  const auto pool = LoadSequences(manifest);
  Checkpoint checkpoint;
  checkpoint.train = cfg;
  TrainingHistory history;
  if (labels.level == Level::kUtterance) {
    auto trained = TrainUtteranceAttack(labels, pool, cfg);
    checkpoint.net = std::move(trained.net);
    history = std::move(trained.history);
  } else {
    auto trained = TrainSpeakerAttack(labels, pool, cfg);
    checkpoint.net = std::move(trained.net);
    history = std::move(trained.history);
  }
  WriteCheckpoint(checkpoint, out_dir / "checkpoint.miac");
  const nlohmann::json h = {{"initial_loss", history.initial_loss},
                            {"epoch_losses", history.epoch_losses}};
  internal::WriteFileBytes(out_dir / "train_history.json", h.dump(2) + "\n");
}

ScoredDataset RunInfer(const fs::path& checkpoint_path, const fs::path& manifest_path,
                       const fs::path& out_dir) {
  const Checkpoint checkpoint = ReadCheckpoint(checkpoint_path);
  const Manifest manifest = LoadManifest(manifest_path);
  const auto sequences = LoadSequences(manifest);
  ScoredDataset scored = InferScores(checkpoint, manifest, sequences);
  WriteScored(scored, out_dir);
  return scored;
}

EvalReport RunEvaluate(const fs::path& scores, const std::vector<double>& fpr_targets,
                       const fs::path& out_dir) {
  const EvalReport report = Evaluate(ReadScoreTable(scores, Level::kUtterance), fpr_targets);
  EmitReport(report, out_dir);
  return report;
}

PipelineSummary RunPipeline(const PipelineConfig& cfg, const fs::path& out_dir) {
  cfg.Validate();
  fs::path target = cfg.target_manifest;
  if (cfg.synth) {
    MakeDir(out_dir / "data");
    RunSynth(*cfg.synth, out_dir / "data");
    if (target.empty()) target = out_dir / "data" / "manifest.ndjson";
  }
  const fs::path aux = cfg.aux_manifest.value_or(target);

  PipelineSummary summary;
  summary.level = cfg.level;
  summary.metric = cfg.metric;
  summary.seed = cfg.seed;
  summary.pseudo_label_pool = cfg.aux_manifest ? "aux" : "target";

  MakeDir(out_dir / "basic");
  const ScoredDataset basic = RunScore(target, cfg.level, cfg.metric, out_dir / "basic");
  summary.basic_skipped = basic.skipped.size();
  summary.basic_auc = RunEvaluate(out_dir / "basic" / "scores.csv", cfg.fpr_targets,
                                  out_dir / "basic").auc;

  // Pseudo-labels come from the basic scores of the auxiliary pool.
  fs::path aux_scores = out_dir / "basic" / "scores.csv";
  std::size_t pool_rows = basic.table.rows.size();
  if (cfg.aux_manifest) {
    MakeDir(out_dir / "aux");
    pool_rows = RunScore(aux, cfg.level, cfg.metric, out_dir / "aux").table.rows.size();
    aux_scores = out_dir / "aux" / "scores.csv";
  }
  std::size_t k = cfg.level == Level::kUtterance ? kDefaultUtteranceK : kDefaultSpeakerK;
  if (cfg.k_fraction) k = ScaledK(*cfg.k_fraction, pool_rows);
  if (cfg.k) k = *cfg.k;
  summary.k = k;

  MakeDir(out_dir / "labels");
  RunPseudoLabel(aux_scores, cfg.level, k, out_dir / "labels");
  MakeDir(out_dir / "model");
  RunTrain(out_dir / "labels" / "pseudo_labels.json", aux, cfg.train, out_dir / "model");
  MakeDir(out_dir / "improved");
  const ScoredDataset improved =
      RunInfer(out_dir / "model" / "checkpoint.miac", target, out_dir / "improved");
  summary.improved_skipped = improved.skipped.size();
  summary.improved_auc = RunEvaluate(out_dir / "improved" / "scores.csv", cfg.fpr_targets,
                                     out_dir / "improved").auc;

  internal::WriteFileBytes(out_dir / "summary.json", SummaryToJson(summary).dump(2) + "\n");
  return summary;
}

}  // namespace mia
