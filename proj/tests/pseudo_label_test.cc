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
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mia/errors.h"

namespace mia {
namespace {

ScoreTable Table(std::initializer_list<std::pair<const char*, double>> rows) {
  ScoreTable t{Level::kUtterance, {}};
  for (const auto& [id, s] : rows) t.rows.push_back({id, s, Membership::kUnknown});
  return t;
}

TEST(SelectPseudoLabelsTest, PicksExtremes) {
  const auto labels = SelectPseudoLabels(Table({{"a", 0.9}, {"b", 0.1}, {"c", 0.5}, {"d", 0.7}}), 1);
  EXPECT_EQ(labels.positives, std::vector<std::string>{"a"});
  EXPECT_EQ(labels.negatives, std::vector<std::string>{"b"});
  EXPECT_EQ(labels.k, 1u);
}

TEST(SelectPseudoLabelsTest, TiesBreakByAscendingId) {
  const auto labels =
      SelectPseudoLabels(Table({{"d", 0.5}, {"b", 0.5}, {"c", 0.5}, {"a", 0.5}}), 2);
  EXPECT_EQ(labels.positives, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(labels.negatives, (std::vector<std::string>{"c", "d"}));
}

TEST(SelectPseudoLabelsTest, InsufficientRowsNamesBothNumbers) {
  try {
    SelectPseudoLabels(Table({{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}}), 3);
    FAIL() << "expected InsufficientDataError";
  } catch (const InsufficientDataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("6"), std::string::npos);
    EXPECT_NE(msg.find("4"), std::string::npos);
  }
  EXPECT_THROW(SelectPseudoLabels(Table({{"a", 1}}), 0), ConfigError);
}

TEST(SelectPseudoLabelsTest, KeepsLevel) {
  ScoreTable t = Table({{"s1", 1}, {"s2", 0}});
  t.kind = Level::kSpeaker;
  EXPECT_EQ(SelectPseudoLabels(t, 1).level, Level::kSpeaker);
}

TEST(SelectPseudoLabelsTest, PropertiesOnRandomTables) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> score(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 60;
    const std::size_t k = 1 + gen() % (n / 2);
    ScoreTable t{Level::kUtterance, {}};
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores so ties occur.
      t.rows.push_back({"id" + std::to_string(i), std::round(score(gen) * 8) / 8,
                        Membership::kUnknown});
    }
    const ScoreTable original = t;
    const auto labels = SelectPseudoLabels(t, k);
    ASSERT_EQ(labels.positives.size(), k);
    ASSERT_EQ(labels.negatives.size(), k);
    for (const auto& p : labels.positives) {
      EXPECT_EQ(std::count(labels.negatives.begin(), labels.negatives.end(), p), 0);
    }
    auto score_of = [&](const std::string& id) {
      return std::find_if(t.rows.begin(), t.rows.end(), [&](auto& r) { return r.id == id; })->score;
    };
    double min_pos = 1e9, max_neg = -1e9;
    for (const auto& id : labels.positives) min_pos = std::min(min_pos, score_of(id));
    for (const auto& id : labels.negatives) max_neg = std::max(max_neg, score_of(id));
    EXPECT_GE(min_pos, max_neg);

    std::shuffle(t.rows.begin(), t.rows.end(), gen);
    const auto again = SelectPseudoLabels(t, k);
    EXPECT_EQ(again.positives, labels.positives);
    EXPECT_EQ(again.negatives, labels.negatives);
    std::sort(t.rows.begin(), t.rows.end(), [](auto& a, auto& b) { return a.id < b.id; });
    ScoreTable sorted_original = original;
    std::sort(sorted_original.rows.begin(), sorted_original.rows.end(),
              [](auto& a, auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(t.rows[i].score, sorted_original.rows[i].score);
  }
}

TEST(PseudoLabelJsonTest, RoundTrip) {
  PseudoLabelSet labels{Level::kSpeaker, 2, {"s1", "s9"}, {"s3", "s4"}};
  const auto back = PseudoLabelsFromJson(PseudoLabelsToJson(labels));
  EXPECT_EQ(back.level, labels.level);
  EXPECT_EQ(back.k, labels.k);
  EXPECT_EQ(back.positives, labels.positives);
  EXPECT_EQ(back.negatives, labels.negatives);
}

TEST(PseudoLabelJsonTest, RejectsInconsistentSets) {
  EXPECT_THROW(PseudoLabelsFromJson(
                   R"({"level":"utterance","k":1,"positives":["a"],"negatives":["a"]})"),
               ValidationError);
  EXPECT_THROW(PseudoLabelsFromJson(
                   R"({"level":"utterance","k":2,"positives":["a"],"negatives":["b"]})"),
               ValidationError);
  EXPECT_THROW(PseudoLabelsFromJson("{"), FormatError);
}

}  // namespace
}  // namespace mia
