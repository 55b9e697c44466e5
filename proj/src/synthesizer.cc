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

#include "mia/synthesizer.h"

#include <cmath>
#include <cstdio>

#include "mia/errors.h"
#include "mia/rng.h"

namespace mia {
namespace {

std::string SpeakerId(int s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%04d", s);
  return buf;
}

std::string UtteranceId(int s, int u) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "spk%04d_u%03d", s, u);
  return buf;
}

}  // namespace

double SynthConfig::SeenUtteranceScale() const {
  return utterance_scale_unseen + separability * (utterance_scale_seen - utterance_scale_unseen);
}

double SynthConfig::SeenFrameScale() const {
  return frame_scale_unseen + separability * (frame_scale_seen - frame_scale_unseen);
}

void SynthConfig::Validate() const {
  if (dim < 1) throw ConfigError("synth: q must be at least 1");
  if (num_speakers_seen < 0 || num_speakers_unseen < 0 ||
      num_speakers_seen + num_speakers_unseen < 1) {
    throw ConfigError("synth: speaker counts must be non-negative with at least one speaker");
  }
  if (utterances_per_speaker < 1) throw ConfigError("synth: utterances_per_speaker must be >= 1");
  if (min_frames < 1 || max_frames < min_frames) {
    throw ConfigError("synth: frame range must satisfy 1 <= min_frames <= max_frames");
  }
  if (!(separability >= 0.0 && separability <= 1.0)) {
    throw ConfigError("synth: separability must lie in [0, 1]");
  }
  for (double s : {centroid_scale, utterance_scale_seen, utterance_scale_unseen, frame_scale_seen,
                   frame_scale_unseen}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("synth: all scales must be positive");
  }
}

nlohmann::json SynthConfigToJson(const SynthConfig& c) {
  return {{"q", c.dim},
          {"num_speakers_seen", c.num_speakers_seen},
          {"num_speakers_unseen", c.num_speakers_unseen},
          {"utterances_per_speaker", c.utterances_per_speaker},
          {"min_frames", c.min_frames},
          {"max_frames", c.max_frames},
          {"separability", c.separability},
          {"centroid_scale", c.centroid_scale},
          {"utterance_scale_seen", c.utterance_scale_seen},
          {"utterance_scale_unseen", c.utterance_scale_unseen},
          {"frame_scale_seen", c.frame_scale_seen},
          {"frame_scale_unseen", c.frame_scale_unseen},
          {"seed", c.seed}};
}

SynthConfig SynthConfigFromJson(const nlohmann::json& j, SynthConfig c) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  try {
    if (j.contains("q")) c.dim = j["q"].get<int>();
    if (j.contains("num_speakers_seen")) c.num_speakers_seen = j["num_speakers_seen"].get<int>();
    if (j.contains("num_speakers_unseen")) c.num_speakers_unseen = j["num_speakers_unseen"].get<int>();
    if (j.contains("utterances_per_speaker")) {
      c.utterances_per_speaker = j["utterances_per_speaker"].get<int>();
    }
    if (j.contains("frames")) c.min_frames = c.max_frames = j["frames"].get<int>();
    if (j.contains("min_frames")) c.min_frames = j["min_frames"].get<int>();
    if (j.contains("max_frames")) c.max_frames = j["max_frames"].get<int>();
    if (j.contains("separability")) c.separability = j["separability"].get<double>();
    if (j.contains("centroid_scale")) c.centroid_scale = j["centroid_scale"].get<double>();
    if (j.contains("utterance_scale_seen")) c.utterance_scale_seen = j["utterance_scale_seen"].get<double>();
    if (j.contains("utterance_scale_unseen")) {
      c.utterance_scale_unseen = j["utterance_scale_unseen"].get<double>();
    }
    if (j.contains("frame_scale_seen")) c.frame_scale_seen = j["frame_scale_seen"].get<double>();
    if (j.contains("frame_scale_unseen")) c.frame_scale_unseen = j["frame_scale_unseen"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.Validate();
  return c;
}

Manifest GenerateSynthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.Validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "features", ec);
  if (ec) throw StorageError("cannot create " + (out_dir / "features").string() + ": " + ec.message());

  Rng rng(cfg.seed);
  Manifest manifest;
  manifest.base_dir = out_dir;
  manifest.dim = static_cast<std::uint32_t>(cfg.dim);
  nlohmann::json meta = {{"generator", "synthetic-hierarchical-gaussian"},
                         {"q", cfg.dim},
                         {"config", SynthConfigToJson(cfg)}};
  manifest.metadata_json = meta.dump();

  const int q = cfg.dim;
  const int num_speakers = cfg.num_speakers_seen + cfg.num_speakers_unseen;
  Eigen::RowVectorXd centroid(q);
  Eigen::RowVectorXd utt_mean(q);
  for (int s = 0; s < num_speakers; ++s) {
    const bool seen = s < cfg.num_speakers_seen;
    const double sigma_u = seen ? cfg.SeenUtteranceScale() : cfg.utterance_scale_unseen;
    const double sigma_f = seen ? cfg.SeenFrameScale() : cfg.frame_scale_unseen;
    for (int d = 0; d < q; ++d) centroid(d) = cfg.centroid_scale * rng.Normal();

    for (int u = 0; u < cfg.utterances_per_speaker; ++u) {
      int m = cfg.min_frames;
      if (cfg.max_frames > cfg.min_frames) {
        m += static_cast<int>(rng.Below(static_cast<std::uint64_t>(cfg.max_frames - cfg.min_frames + 1)));
      }
      for (int d = 0; d < q; ++d) utt_mean(d) = centroid(d) + sigma_u * rng.Normal();

      FeatureSequence seq;
      seq.utterance_id = UtteranceId(s, u);
      seq.speaker_id = SpeakerId(s);
      seq.frames.resize(m, q);
      for (int t = 0; t < m; ++t) {
        for (int d = 0; d < q; ++d) seq.frames(t, d) = utt_mean(d) + sigma_f * rng.Normal();
      }
      const std::string rel = "features/" + seq.utterance_id + ".miaf";
      WriteFeatureFile(seq, out_dir / rel);
      manifest.entries.push_back(ManifestEntry{seq.utterance_id, seq.speaker_id, rel,
                                               seen ? Membership::kSeen : Membership::kUnseen});
    }
  }
  WriteManifest(manifest, out_dir / "manifest.ndjson");
  return manifest;
}

}  // namespace mia
