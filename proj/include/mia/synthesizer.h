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

#ifndef MIA_SYNTHESIZER_H_
#define MIA_SYNTHESIZER_H_

#include <cstdint>
#include <filesystem>

#include "json.hpp"
#include "mia/feature_store.h"

namespace mia {

// Hierarchical Gaussian stand-in for a target/auxiliary representation dump.
//
//   speaker centroid   mu_s  ~ N(0, centroid_scale^2 I)
//   utterance mean     mu_su = mu_s + N(0, sigma_u^2 I)
//   frame              h_t   = mu_su + N(0, sigma_f^2 I)
//
// Unseen speakers always use the *_unseen scales. Seen speakers use
//   sigma(gamma) = unseen + gamma * (seen - unseen)
// so gamma = 0 makes the classes identical and gamma = 1 applies the full
// configured gap. Larger seen frame noise raises the utterance score; tighter
// seen utterance means raise the speaker score.
struct SynthConfig {
  int dim = 32;
  int num_speakers_seen = 20;
  int num_speakers_unseen = 20;
  int utterances_per_speaker = 10;
  int min_frames = 50;
  int max_frames = 50;
  double separability = 1.0;
  double centroid_scale = 1.0;
  double utterance_scale_seen = 0.05;
  double utterance_scale_unseen = 0.5;
  double frame_scale_seen = 1.0;
  double frame_scale_unseen = 0.3;
  std::uint64_t seed = 0;

  double SeenUtteranceScale() const;
  double SeenFrameScale() const;
  // Throws ConfigError on non-positive scales/counts or gamma outside [0, 1].
  void Validate() const;
};

nlohmann::json SynthConfigToJson(const SynthConfig& cfg);
SynthConfig SynthConfigFromJson(const nlohmann::json& j, SynthConfig base = {});

// Writes <out_dir>/features/<utterance>.miaf and <out_dir>/manifest.ndjson.
//
// Draw order from Rng(cfg.seed): speakers in id order (seen speakers first);
// per speaker the q centroid draws, then per utterance the frame count
// (only when min_frames < max_frames), q offset draws, then m*q frame draws
// in frame-major order.
Manifest GenerateSynthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace mia

#endif  // MIA_SYNTHESIZER_H_
