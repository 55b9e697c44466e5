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

#include "mia/scoring.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "binary_io.h"
#include "mia/errors.h"
#include "parallel.h"

namespace mia {
namespace {

constexpr std::size_t kPairwiseBlock = 8;

double CosineCore(ConstRow a, ConstRow b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DegenerateVectorError("zero-norm vector in cosine measure");
  return a.dot(b) / (na * nb);
}

// Re-raises a degenerate-vector failure of pair (i, j) naming the zero row.
[[noreturn]] void RethrowDegenerate(const DegenerateVectorError& e,
                                    const auto& rows, std::size_t i, std::size_t j,
                                    const char* what, const std::string& owner) {
  const std::size_t bad = rows(i).norm() == 0.0 ? i : j;
  throw DegenerateVectorError(std::string(what) + " " + std::to_string(bad) + " of \"" +
                                  owner + "\" has zero norm (" + e.what() + ")",
                              bad);
}

}  // namespace

double CosineSimilarity(ConstRow a, ConstRow b) {
  if (a.size() != b.size()) throw ConfigError("dimension mismatch in cosine similarity");
  return std::clamp(CosineCore(a, b), -1.0, 1.0);
}

double CosineDistance(ConstRow a, ConstRow b) { return 1.0 - CosineSimilarity(a, b); }

double EuclideanDistance(ConstRow a, ConstRow b) {
  if (a.size() != b.size()) throw ConfigError("dimension mismatch in euclidean distance");
  return (a - b).norm();
}

std::string_view ToString(Level level) {
  return level == Level::kUtterance ? "utterance" : "speaker";
}

Level ParseLevel(std::string_view token) {
  if (token == "utterance") return Level::kUtterance;
  if (token == "speaker") return Level::kSpeaker;
  throw ConfigError("unknown level \"" + std::string(token) + "\"");
}

std::string_view ToString(Metric metric) {
  return metric == Metric::kCosine ? "cosine" : "euclidean";
}

Metric ParseMetric(std::string_view token) {
  if (token == "cosine") return Metric::kCosine;
  if (token == "euclidean") return Metric::kEuclidean;
  throw ConfigError("unknown metric \"" + std::string(token) + "\"");
}

PairMeasure UtteranceMeasure(Metric metric) {
  if (metric == Metric::kCosine) return CosineDistance;
  return EuclideanDistance;
}

PairMeasure SpeakerMeasure(Metric metric) {
  if (metric == Metric::kCosine) return CosineSimilarity;
  return [](ConstRow a, ConstRow b) { return -EuclideanDistance(a, b); };
}

double PairwiseSum(std::span<const double> terms) {
  if (terms.size() <= kPairwiseBlock) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return PairwiseSum(terms.first(half)) + PairwiseSum(terms.subspan(half));
}

double UtteranceScore(const FeatureSequence& seq, const PairMeasure& distance) {
  const std::size_t m = seq.num_frames();
  if (m < 2) {
    throw TooFewFramesError("utterance \"" + seq.utterance_id + "\" has " + std::to_string(m) +
                            " frame(s); at least 2 are required");
  }
  std::vector<double> terms;
  terms.reserve(m * (m - 1) / 2);
  auto row = [&](std::size_t i) { return seq.frames.row(static_cast<Eigen::Index>(i)); };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      try {
        terms.push_back(distance(row(i), row(j)));
      } catch (const DegenerateVectorError& e) {
        RethrowDegenerate(e, row, i, j, "frame", seq.utterance_id);
      }
    }
  }
  return PairwiseSum(terms) / static_cast<double>(terms.size());
}

std::vector<Eigen::RowVectorXd> SpeakerMeanEmbeddings(const SpeakerGroup& group) {
  std::vector<Eigen::RowVectorXd> means;
  means.reserve(group.sequences.size());
  for (const auto& seq : group.sequences) {
    if (seq.num_frames() == 0) {
      throw TooFewFramesError("utterance \"" + seq.utterance_id + "\" has no frames");
    }
    means.push_back(seq.frames.colwise().mean());
  }
  return means;
}

double SpeakerScore(const SpeakerGroup& group, const PairMeasure& similarity) {
  const std::size_t n = group.sequences.size();
  if (n < 2) {
    throw TooFewUtterancesError("speaker \"" + group.speaker_id + "\" has " + std::to_string(n) +
                                " utterance(s); at least 2 are required");
  }
  const auto means = SpeakerMeanEmbeddings(group);
  auto row = [&](std::size_t i) -> const Eigen::RowVectorXd& { return means[i]; };
  std::vector<double> terms;
  terms.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        terms.push_back(similarity(means[i], means[j]));
      } catch (const DegenerateVectorError& e) {
        RethrowDegenerate(e, row, i, j, "mean embedding of utterance", group.speaker_id);
      }
    }
  }
  return PairwiseSum(terms) / static_cast<double>(terms.size());
}

Membership Decide(double score, const ThresholdRule& rule) {
  return score > rule.threshold ? Membership::kSeen : Membership::kUnseen;
}

Membership SpeakerMembership(const Manifest& manifest, std::string_view speaker_id) {
  std::optional<Membership> common;
  for (const auto& e : manifest.entries) {
    if (e.speaker_id != speaker_id) continue;
    if (!common) {
      common = e.membership;
    } else if (*common != e.membership) {
      return Membership::kUnknown;
    }
  }
  return common.value_or(Membership::kUnknown);
}

ScoredDataset ScoreDataset(const Manifest& manifest, std::span<const FeatureSequence> sequences,
                           Level level, Metric metric) {
  if (sequences.size() != manifest.entries.size()) {
    throw ConfigError("sequence count does not match manifest entry count");
  }
  ScoredDataset result;
  result.table.kind = level;

  std::vector<std::string> ids;
  std::vector<Membership> labels;
  std::vector<std::optional<double>> scores;
  std::vector<std::string> reasons;

  if (level == Level::kUtterance) {
    const PairMeasure d = UtteranceMeasure(metric);
    const std::size_t n = sequences.size();
    scores.resize(n);
    reasons.resize(n);
    internal::ParallelFor(n, [&](std::size_t i) {
      try {
        scores[i] = UtteranceScore(sequences[i], d);
      } catch (const TooFewFramesError& e) {
        reasons[i] = e.what();
      } catch (const DegenerateVectorError& e) {
        reasons[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(manifest.entries[i].utterance_id);
      labels.push_back(manifest.entries[i].membership);
    }
  } else {
    const PairMeasure delta = SpeakerMeasure(metric);
    const auto groups = GroupBySpeaker(sequences);
    scores.resize(groups.size());
    reasons.resize(groups.size());
    internal::ParallelFor(groups.size(), [&](std::size_t i) {
      try {
        scores[i] = SpeakerScore(groups[i], delta);
      } catch (const TooFewFramesError& e) {
        reasons[i] = e.what();
      } catch (const TooFewUtterancesError& e) {
        reasons[i] = e.what();
      } catch (const DegenerateVectorError& e) {
        reasons[i] = e.what();
      }
    });
    for (const auto& g : groups) {
      ids.push_back(g.speaker_id);
      labels.push_back(SpeakerMembership(manifest, g.speaker_id));
    }
  }

  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (scores[i]) {
      result.table.rows.push_back(ScoreRow{ids[i], *scores[i], labels[i]});
    } else {
      result.skipped.push_back(SkippedItem{ids[i], reasons[i]});
    }
  }
  return result;
}

ScoredDataset ScoreDataset(const Manifest& manifest, Level level, Metric metric) {
  const auto sequences = LoadSequences(manifest);
  return ScoreDataset(manifest, sequences, level, metric);
}

std::string ScoreTableToCsv(const ScoreTable& table) {
  std::string out = "id,score,membership\n";
  char buf[64];
  for (const auto& row : table.rows) {
    if (row.id.find_first_of(",\n\"") != std::string::npos) {
      throw ValidationError("id \"" + row.id + "\" cannot be written to score CSV");
    }
    std::snprintf(buf, sizeof(buf), "%.17g", row.score);
    out += row.id;
    out += ',';
    out += buf;
    out += ',';
    out += ToString(row.membership);
    out += '\n';
  }
  return out;
}

ScoreTable ScoreTableFromCsv(std::string_view csv, Level kind) {
  ScoreTable table;
  table.kind = kind;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "id,score,membership") throw FormatError("score CSV: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw FormatError("score CSV line " + std::to_string(line_no) + ": expected 3 fields");
    }
    ScoreRow row;
    row.id = line.substr(0, c1);
    const std::string score_text = line.substr(c1 + 1, c2 - c1 - 1);
    char* end = nullptr;
    row.score = std::strtod(score_text.c_str(), &end);
    if (score_text.empty() || *end != '\0' || !std::isfinite(row.score)) {
      throw FormatError("score CSV line " + std::to_string(line_no) + ": bad score \"" +
                        score_text + "\"");
    }
    row.membership = ParseMembership(line.substr(c2 + 1));
    table.rows.push_back(std::move(row));
  }
  if (line_no == 0) throw FormatError("score CSV: missing header");
  std::unordered_map<std::string, int> seen_ids;
  for (const auto& row : table.rows) {
    if (++seen_ids[row.id] > 1) throw ValidationError("duplicate id \"" + row.id + "\" in score CSV");
  }
  return table;
}

void WriteScoreTable(const ScoreTable& table, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, ScoreTableToCsv(table));
}

ScoreTable ReadScoreTable(const std::filesystem::path& path, Level kind) {
  return ScoreTableFromCsv(internal::ReadFileBytes(path), kind);
}

}  // namespace mia
