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

#ifndef MIA_PSEUDO_LABEL_H_
#define MIA_PSEUDO_LABEL_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mia/scoring.h"

namespace mia {

// Auxiliary items at the score extremes: the k highest-scoring are labeled
// pseudo-seen, the k lowest pseudo-unseen.
struct PseudoLabelSet {
  Level level = Level::kUtterance;
  std::size_t k = 0;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
};

inline constexpr std::size_t kDefaultUtteranceK = 500;
inline constexpr std::size_t kDefaultSpeakerK = 1;

// Ties are broken by ascending id, so the result does not depend on row
// order. Throws InsufficientDataError when 2k exceeds the row count and
// ConfigError when k == 0.
PseudoLabelSet SelectPseudoLabels(const ScoreTable& table, std::size_t k);

std::string PseudoLabelsToJson(const PseudoLabelSet& labels);
PseudoLabelSet PseudoLabelsFromJson(std::string_view json);
void WritePseudoLabels(const PseudoLabelSet& labels, const std::filesystem::path& path);
PseudoLabelSet ReadPseudoLabels(const std::filesystem::path& path);

}  // namespace mia

#endif  // MIA_PSEUDO_LABEL_H_
