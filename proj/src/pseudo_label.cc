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

#include "mia/pseudo_label.h"

#include <algorithm>
#include <unordered_set>

#include "binary_io.h"
#include "json.hpp"
#include "mia/errors.h"

namespace mia {

PseudoLabelSet SelectPseudoLabels(const ScoreTable& table, std::size_t k) {
  if (k == 0) throw ConfigError("pseudo-label k must be at least 1");
  if (2 * k > table.rows.size()) {
    throw InsufficientDataError("pseudo-labeling needs 2k = " + std::to_string(2 * k) +
                                " rows but the score table has " +
                                std::to_string(table.rows.size()));
  }
  std::vector<const ScoreRow*> by_desc;
  by_desc.reserve(table.rows.size());
  for (const auto& row : table.rows) by_desc.push_back(&row);
  std::vector<const ScoreRow*> by_asc = by_desc;

  std::sort(by_desc.begin(), by_desc.end(), [](const ScoreRow* a, const ScoreRow* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->id < b->id;
  });
  std::sort(by_asc.begin(), by_asc.end(), [](const ScoreRow* a, const ScoreRow* b) {
    if (a->score != b->score) return a->score < b->score;
    return a->id < b->id;
  });

  PseudoLabelSet labels;
  labels.level = table.kind;
  labels.k = k;
  std::unordered_set<std::string> taken;
  for (std::size_t i = 0; i < k; ++i) {
    labels.positives.push_back(by_desc[i]->id);
    taken.insert(by_desc[i]->id);
  }
  // With heavy ties the ascending walk could reach a positive; skip those.
  for (const ScoreRow* row : by_asc) {
    if (labels.negatives.size() == k) break;
    if (!taken.contains(row->id)) labels.negatives.push_back(row->id);
  }
  return labels;
}

std::string PseudoLabelsToJson(const PseudoLabelSet& labels) {
  nlohmann::json j = {{"level", ToString(labels.level)},
                      {"k", labels.k},
                      {"positives", labels.positives},
                      {"negatives", labels.negatives}};
  return j.dump(2) + "\n";
}

PseudoLabelSet PseudoLabelsFromJson(std::string_view text) {
  PseudoLabelSet labels;
  try {
    const auto j = nlohmann::json::parse(text);
    labels.level = ParseLevel(j.at("level").get<std::string>());
    labels.k = j.at("k").get<std::size_t>();
    labels.positives = j.at("positives").get<std::vector<std::string>>();
    labels.negatives = j.at("negatives").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("pseudo-label JSON: ") + e.what());
  }
  if (labels.positives.size() != labels.k || labels.negatives.size() != labels.k) {
    throw ValidationError("pseudo-label JSON: positives/negatives must each hold k ids");
  }
  std::unordered_set<std::string> pos(labels.positives.begin(), labels.positives.end());
  for (const auto& id : labels.negatives) {
    if (pos.contains(id)) throw ValidationError("id \"" + id + "\" is both positive and negative");
  }
  return labels;
}

void WritePseudoLabels(const PseudoLabelSet& labels, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, PseudoLabelsToJson(labels));
}

PseudoLabelSet ReadPseudoLabels(const std::filesystem::path& path) {
  return PseudoLabelsFromJson(internal::ReadFileBytes(path));
}

}  // namespace mia
