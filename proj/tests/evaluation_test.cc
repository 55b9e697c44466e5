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

#include "mia/evaluation.h"

#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "mia/errors.h"
#include "test_util.h"

namespace mia {
namespace {

using testing::BruteForceAuc;

ScoreTable Table(std::initializer_list<double> seen, std::initializer_list<double> unseen) {
  ScoreTable t{Level::kUtterance, {}};
  int i = 0;
  for (double s : seen) t.rows.push_back({"p" + std::to_string(i++), s, Membership::kSeen});
  for (double s : unseen) t.rows.push_back({"n" + std::to_string(i++), s, Membership::kUnseen});
  return t;
}

std::vector<std::pair<double, double>> Vertices(const std::vector<RocPoint>& roc) {
  std::vector<std::pair<double, double>> v;
  for (const auto& p : roc) v.emplace_back(p.fpr, p.tpr);
  return v;
}

TEST(RocCurveTest, PerfectSeparation) {
  const auto roc = RocCurve(Table({0.9}, {0.1}));
  EXPECT_EQ(Vertices(roc), (std::vector<std::pair<double, double>>{{0, 0}, {0, 1}, {1, 1}}));
  // Thresholds reproduce each vertex under the strict decision rule.
  EXPECT_EQ(roc[0].threshold, 0.9);
  EXPECT_EQ(roc[1].threshold, 0.1);
  EXPECT_LT(roc[2].threshold, 0.1);
}

TEST(RocCurveTest, FullTieCollapses) {
  const auto t = Table({0.5}, {0.5});
  EXPECT_EQ(Vertices(RocCurve(t)), (std::vector<std::pair<double, double>>{{0, 0}, {1, 1}}));
  EXPECT_EQ(Auc(t), 0.5);
}

TEST(RocCurveTest, Staircase) {
  const auto t = Table({0.8, 0.3}, {0.5, 0.1});
  EXPECT_EQ(Vertices(RocCurve(t)), (std::vector<std::pair<double, double>>{
                                       {0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}}));
  EXPECT_EQ(TrapezoidArea(RocCurve(t)), 0.75);
}

TEST(RocCurveTest, SingleClassIsError) {
  EXPECT_THROW(RocCurve(Table({0.1, 0.2}, {})), EvaluationError);
  EXPECT_THROW(Auc(Table({}, {0.3})), EvaluationError);
}

TEST(RocCurveTest, UnknownRowsExcluded) {
  auto t = Table({0.9}, {0.1});
  t.rows.push_back({"x", 0.5, Membership::kUnknown});
  EXPECT_EQ(Auc(t), 1.0);
  EXPECT_EQ(Evaluate(t).num_unknown, 1u);
  ScoreTable only_unknown{Level::kUtterance, {{"x", 0.5, Membership::kUnknown}}};
  EXPECT_THROW(Auc(only_unknown), EvaluationError);
}

TEST(AucTest, Examples) {
  EXPECT_EQ(Auc(Table({0.8, 0.3}, {0.5, 0.1})), 0.75);  // (1 + 1 + 0 + 1) / 4
  EXPECT_EQ(Auc(Table({0.2, 0.2}, {0.2, 0.2, 0.2})), 0.5);
  EXPECT_EQ(Auc(Table({5, 6, 7}, {1, 2})), 1.0);
}

TEST(TprAtFprTest, Examples) {
  EXPECT_EQ(TprAtFpr(Table({0.9}, {0.1}), 0.0), 1.0);
  EXPECT_EQ(TprAtFpr(Table({0.5}, {0.5}), 0.05), 0.0);
  EXPECT_EQ(TprAtFpr(Table({0.8, 0.3}, {0.5, 0.1}), 0.4), 0.5);
  EXPECT_THROW(TprAtFpr(Table({0.9}, {0.1}), 1.5), EvaluationError);
}

TEST(AucPropertyTest, MatchesBruteForceAndTrapezoid) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> size(2, 200);
  std::uniform_int_distribution<int> coarse(0, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(gen);
    ScoreTable t{Level::kUtterance, {}};
    for (int i = 0; i < n; ++i) {
      const auto m = (i == 0) ? Membership::kSeen
                     : (i == 1) ? Membership::kUnseen
                                : (gen() % 2 ? Membership::kSeen : Membership::kUnseen);
      t.rows.push_back({"r" + std::to_string(i), coarse(gen) / 10.0, m});
    }
    const double auc = Auc(t);
    EXPECT_EQ(auc, BruteForceAuc(t));
    EXPECT_NEAR(TrapezoidArea(RocCurve(t)), auc, 1e-12);

    // Strictly increasing transform.
    ScoreTable transformed = t;
    for (auto& r : transformed.rows) r.score = std::exp(3.0 * r.score) - 7.0;
    EXPECT_EQ(Auc(transformed), auc);

    // Relabel symmetry.
    ScoreTable swapped = t;
    for (auto& r : swapped.rows) {
      r.membership = r.membership == Membership::kSeen ? Membership::kUnseen : Membership::kSeen;
    }
    EXPECT_NEAR(Auc(swapped), 1.0 - auc, 1e-12);

    EXPECT_NO_THROW(ValidateReport(Evaluate(t)));
  }
}

TEST(AucPropertyTest, IidScoresAreNearChance) {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> score(0.0, 1.0);
  ScoreTable t{Level::kUtterance, {}};
  for (int i = 0; i < 2000; ++i) {
    t.rows.push_back({"r" + std::to_string(i), score(gen),
                      i < 1000 ? Membership::kSeen : Membership::kUnseen});
  }
  const double auc = Auc(t);
  EXPECT_GE(auc, 0.45);
  EXPECT_LE(auc, 0.55);
}

TEST(ReportTest, EmitWritesJsonAndCsv) {
  const auto dir = testing::TempDir("report");
  const auto report = Evaluate(Table({0.9}, {0.1}));
  EmitReport(report, dir);
  std::ifstream csv(dir / "roc.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::ifstream json(dir / "report.json");
  const std::string text((std::istreambuf_iterator<char>(json)), std::istreambuf_iterator<char>());
  EXPECT_EQ(ReportFromJson(text), report);
}

TEST(ReportTest, JsonRoundTrip) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> score(0.0, 1.0);
  ScoreTable t{Level::kUtterance, {}};
  for (int i = 0; i < 50; ++i) {
    t.rows.push_back({"r" + std::to_string(i), score(gen) + (i % 2) * 0.7,
                      i % 2 ? Membership::kSeen : Membership::kUnseen});
  }
  const auto report = Evaluate(t, {0.1, 0.01, 0.3});
  EXPECT_EQ(ReportFromJson(ReportToJson(report)), report);
  ASSERT_EQ(report.tpr_at.size(), 3u);
  EXPECT_EQ(report.tpr_at[0].target_fpr, 0.01);
}

TEST(ReportTest, EmptyRocRefusedBeforeWrite) {
  const auto dir = testing::TempDir("report_empty");
  EvalReport bad;
  EXPECT_THROW(EmitReport(bad, dir / "out"), ValidationError);
  EXPECT_FALSE(std::filesystem::exists(dir / "out"));
}

TEST(ReportTest, YoudenPicksBestVertex) {
  const auto report = Evaluate(Table({0.8, 0.3}, {0.5, 0.1}));
  EXPECT_EQ(report.youden.tpr - report.youden.fpr, 0.5);
  EXPECT_EQ(report.youden.fpr, 0.0);
}

}  // namespace
}  // namespace mia
