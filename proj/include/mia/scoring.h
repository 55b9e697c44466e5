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

#ifndef MIA_SCORING_H_
#define MIA_SCORING_H_

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mia/feature_store.h"

namespace mia {

using ConstRow = Eigen::Ref<const Eigen::RowVectorXd>;

// d(a, b) for utterance scoring, delta(a, b) for speaker scoring.
using PairMeasure = std::function<double(ConstRow, ConstRow)>;

// Cosine measures throw DegenerateVectorError on a zero-norm argument.
double CosineSimilarity(ConstRow a, ConstRow b);
double CosineDistance(ConstRow a, ConstRow b);
double EuclideanDistance(ConstRow a, ConstRow b);

enum class Level { kUtterance, kSpeaker };
enum class Metric { kCosine, kEuclidean };

std::string_view ToString(Level level);
Level ParseLevel(std::string_view token);
std::string_view ToString(Metric metric);
Metric ParseMetric(std::string_view token);

// Distance for utterance-level scoring: cosine distance or euclidean.
PairMeasure UtteranceMeasure(Metric metric);
// Similarity for speaker-level scoring: cosine similarity, or negated
// euclidean distance so that larger still means "more similar".
PairMeasure SpeakerMeasure(Metric metric);

// Sum with pairwise (cascade) reduction.
double PairwiseSum(std::span<const double> terms);

// Mean of d over all m(m-1)/2 unordered frame pairs.
// Throws TooFewFramesError for m < 2; DegenerateVectorError carries the
// offending frame index.
double UtteranceScore(const FeatureSequence& seq, const PairMeasure& distance);

// Per-utterance mean over frames. Throws TooFewFramesError on an empty
// sequence.
std::vector<Eigen::RowVectorXd> SpeakerMeanEmbeddings(const SpeakerGroup& group);

// Mean of delta over all n(n-1)/2 unordered pairs of mean embeddings.
// Throws TooFewUtterancesError for n < 2.
double SpeakerScore(const SpeakerGroup& group, const PairMeasure& similarity);

struct ThresholdRule {
  double threshold = 0.0;
};

// Strict: seen iff score > threshold.
Membership Decide(double score, const ThresholdRule& rule);

struct ScoreRow {
  std::string id;
  double score = 0.0;
  Membership membership = Membership::kUnknown;
};

struct ScoreTable {
  Level kind = Level::kUtterance;
  std::vector<ScoreRow> rows;
};

struct SkippedItem {
  std::string id;
  std::string reason;
};

struct ScoredDataset {
  ScoreTable table;
  std::vector<SkippedItem> skipped;
};

// Speaker membership is the common membership of the speaker's utterances,
// or unknown when they disagree.
Membership SpeakerMembership(const Manifest& manifest, std::string_view speaker_id);

// Batch driver over a loaded manifest. Items failing a scoring precondition
// go to the skip list; rows keep manifest (or first-appearance) order.
ScoredDataset ScoreDataset(const Manifest& manifest, std::span<const FeatureSequence> sequences,
                           Level level, Metric metric = Metric::kCosine);
ScoredDataset ScoreDataset(const Manifest& manifest, Level level,
                           Metric metric = Metric::kCosine);

// CSV `id,score,membership`, scores at 17 significant digits.
std::string ScoreTableToCsv(const ScoreTable& table);
ScoreTable ScoreTableFromCsv(std::string_view csv, Level kind);
void WriteScoreTable(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable ReadScoreTable(const std::filesystem::path& path, Level kind);

}  // namespace mia

#endif  // MIA_SCORING_H_
