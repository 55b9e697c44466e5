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

#ifndef MIA_CHECKPOINT_H_
#define MIA_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"
#include "mia/attack_model.h"
#include "mia/scoring.h"
#include "mia/training.h"

namespace mia {

nlohmann::json TrainConfigToJson(const TrainConfig& cfg);
// Missing keys keep their defaults; unknown keys are ignored.
TrainConfig TrainConfigFromJson(const nlohmann::json& j, TrainConfig base = {});

// Checkpoint layout (little-endian):
//   "MIAC" | u32 version = 1 | u64 header_bytes | header JSON |
//   u64 parameter_count | parameter_count float64 values
// The header records the architecture, q, p, r, seed, the training config
// and the parameter order (see Flatten()).
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::variant<UtteranceNet, SpeakerNet> net;
  TrainConfig train;

  Level level() const {
    return std::holds_alternative<UtteranceNet>(net) ? Level::kUtterance : Level::kSpeaker;
  }
};

std::string EncodeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DecodeCheckpoint(std::string_view bytes);
void WriteCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

}  // namespace mia

#endif  // MIA_CHECKPOINT_H_
