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

#ifndef MIA_EVALUATION_H_
#define MIA_EVALUATION_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mia/scoring.h"

namespace mia {

// One ROC vertex. `threshold` reproduces the vertex under Decide(): items
// scoring strictly above it are predicted seen.
struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;

  bool operator==(const RocPoint&) const = default;
};

struct OperatingPoint {
  double target_fpr = 0.0;
  double tpr = 0.0;

  bool operator==(const OperatingPoint&) const = default;
};

struct EvalReport {
  std::vector<RocPoint> roc;
  double auc = 0.0;
  std::vector<OperatingPoint> tpr_at;
  std::size_t num_seen = 0;
  std::size_t num_unseen = 0;
  std::size_t num_unknown = 0;  // rows excluded for unknown membership
  // Vertex maximizing TPR - FPR (first on ties), reported as a convenience.
  RocPoint youden;

  bool operator==(const EvalReport&) const = default;
};

inline const std::vector<double> kDefaultFprTargets = {0.01, 0.05, 0.1};

// Seen is the positive class. Rows with unknown membership are excluded;
// EvaluationError unless at least one seen and one unseen row remain.
// Tied scores collapse into a single vertex.
std::vector<RocPoint> RocCurve(const ScoreTable& table);

// Mann-Whitney statistic with half credit for ties.
double Auc(const ScoreTable& table);

// Largest TPR over vertices with FPR <= target (no interpolation).
double TprAtFpr(const ScoreTable& table, double target_fpr);
double TprAtFpr(const std::vector<RocPoint>& roc, double target_fpr);

// Area under the ROC polyline by the trapezoid rule.
double TrapezoidArea(const std::vector<RocPoint>& roc);

EvalReport Evaluate(const ScoreTable& table,
                    const std::vector<double>& fpr_targets = kDefaultFprTargets);

// Throws ValidationError when the ROC is empty or violates its invariants.
void ValidateReport(const EvalReport& report);

std::string ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(std::string_view json);
std::string RocToCsv(const std::vector<RocPoint>& roc);

// Writes <dir>/report.json and <dir>/roc.csv after validation.
void EmitReport(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace mia

#endif  // MIA_EVALUATION_H_
