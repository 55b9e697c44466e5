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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "binary_io.h"
#include "json.hpp"
#include "mia/errors.h"

namespace mia {
namespace {

struct Labeled {
  double score;
  bool seen;
};

struct Split {
  std::vector<Labeled> items;  // sorted by descending score
  std::size_t num_seen = 0;
  std::size_t num_unseen = 0;
  std::size_t num_unknown = 0;
};

Split SplitByMembership(const ScoreTable& table) {
  Split split;
  for (const auto& row : table.rows) {
    if (!std::isfinite(row.score)) throw EvaluationError("non-finite score for \"" + row.id + "\"");
    switch (row.membership) {
      case Membership::kSeen:
        split.items.push_back({row.score, true});
        ++split.num_seen;
        break;
      case Membership::kUnseen:
        split.items.push_back({row.score, false});
        ++split.num_unseen;
        break;
      case Membership::kUnknown:
        ++split.num_unknown;
        break;
    }
  }
  if (split.num_seen == 0 || split.num_unseen == 0) {
    throw EvaluationError("evaluation needs both seen and unseen rows (seen=" +
                          std::to_string(split.num_seen) +
                          ", unseen=" + std::to_string(split.num_unseen) + ")");
  }
  std::sort(split.items.begin(), split.items.end(),
            [](const Labeled& a, const Labeled& b) { return a.score > b.score; });
  return split;
}

std::vector<RocPoint> RocFromSplit(const Split& split) {
  const auto& items = split.items;
  const double p = static_cast<double>(split.num_seen);
  const double n = static_cast<double>(split.num_unseen);
  std::vector<RocPoint> roc;
  roc.push_back({0.0, 0.0, items.front().score});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < items.size();) {
    const double s = items[i].score;
    while (i < items.size() && items[i].score == s) {
      (items[i].seen ? tp : fp) += 1;
      ++i;
    }
    const double next = i < items.size() ? items[i].score
                                         : std::nextafter(s, -std::numeric_limits<double>::infinity());
    roc.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / p, next});
  }
  return roc;
}

std::string FormatShortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

nlohmann::json PointToJson(const RocPoint& p) {
  return {{"fpr", p.fpr}, {"tpr", p.tpr}, {"threshold", p.threshold}};
}

RocPoint PointFromJson(const nlohmann::json& j) {
  return {j.at("fpr").get<double>(), j.at("tpr").get<double>(), j.at("threshold").get<double>()};
}

}  // namespace

std::vector<RocPoint> RocCurve(const ScoreTable& table) {
  return RocFromSplit(SplitByMembership(table));
}

double Auc(const ScoreTable& table) {
  Split split = SplitByMembership(table);
  // Walk ascending tie groups; doubled counts keep the half credit integral.
  std::reverse(split.items.begin(), split.items.end());
  unsigned long long doubled = 0;
  std::size_t unseen_below = 0;
  const auto& items = split.items;
  for (std::size_t i = 0; i < items.size();) {
    const double s = items[i].score;
    std::size_t seen_here = 0, unseen_here = 0;
    while (i < items.size() && items[i].score == s) {
      (items[i].seen ? seen_here : unseen_here) += 1;
      ++i;
    }
    doubled += static_cast<unsigned long long>(seen_here) * (2 * unseen_below + unseen_here);
    unseen_below += unseen_here;
  }
  return static_cast<double>(doubled) /
         (2.0 * static_cast<double>(split.num_seen) * static_cast<double>(split.num_unseen));
}

double TprAtFpr(const std::vector<RocPoint>& roc, double target_fpr) {
  if (!(target_fpr >= 0.0 && target_fpr <= 1.0)) {
    throw EvaluationError("target FPR must lie in [0, 1]");
  }
  double best = 0.0;
  for (const auto& p : roc) {
    if (p.fpr <= target_fpr) best = std::max(best, p.tpr);
  }
  return best;
}

double TprAtFpr(const ScoreTable& table, double target_fpr) {
  return TprAtFpr(RocCurve(table), target_fpr);
}

double TrapezoidArea(const std::vector<RocPoint>& roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i) {
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
  }
  return area;
}

EvalReport Evaluate(const ScoreTable& table, const std::vector<double>& fpr_targets) {
  const Split split = SplitByMembership(table);
  EvalReport report;
  report.roc = RocFromSplit(split);
  report.auc = Auc(table);
  report.num_seen = split.num_seen;
  report.num_unseen = split.num_unseen;
  report.num_unknown = split.num_unknown;
  std::vector<double> targets = fpr_targets;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (double target : targets) report.tpr_at.push_back({target, TprAtFpr(report.roc, target)});
  report.youden = report.roc.front();
  for (const auto& p : report.roc) {
    if (p.tpr - p.fpr > report.youden.tpr - report.youden.fpr) report.youden = p;
  }
  return report;
}

void ValidateReport(const EvalReport& report) {
  const auto& roc = report.roc;
  if (roc.empty()) throw ValidationError("report has an empty ROC curve");
  if (roc.front().fpr != 0.0 || roc.front().tpr != 0.0) {
    throw ValidationError("ROC curve must start at (0, 0)");
  }
  if (roc.back().fpr != 1.0 || roc.back().tpr != 1.0) {
    throw ValidationError("ROC curve must end at (1, 1)");
  }
  for (std::size_t i = 1; i < roc.size(); ++i) {
    if (roc[i].fpr < roc[i - 1].fpr || roc[i].tpr < roc[i - 1].tpr) {
      throw ValidationError("ROC curve is not monotone at vertex " + std::to_string(i));
    }
  }
  if (!(report.auc >= 0.0 && report.auc <= 1.0)) throw ValidationError("AUC outside [0, 1]");
}

std::string ReportToJson(const EvalReport& report) {
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& p : report.roc) roc.push_back(PointToJson(p));
  nlohmann::json tpr_at = nlohmann::json::object();
  for (const auto& op : report.tpr_at) tpr_at[FormatShortest(op.target_fpr)] = op.tpr;
  nlohmann::json j = {{"auc", report.auc},
                      {"roc", roc},
                      {"tpr_at", tpr_at},
                      {"counts",
                       {{"num_seen", report.num_seen},
                        {"num_unseen", report.num_unseen},
                        {"num_unknown_excluded", report.num_unknown}}},
                      {"youden", PointToJson(report.youden)}};
  return j.dump(2) + "\n";
}

EvalReport ReportFromJson(std::string_view text) {
  EvalReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    report.auc = j.at("auc").get<double>();
    for (const auto& p : j.at("roc")) report.roc.push_back(PointFromJson(p));
    for (const auto& [key, value] : j.at("tpr_at").items()) {
      report.tpr_at.push_back({std::stod(key), value.get<double>()});
    }
    std::sort(report.tpr_at.begin(), report.tpr_at.end(),
              [](const auto& a, const auto& b) { return a.target_fpr < b.target_fpr; });
    const auto& counts = j.at("counts");
    report.num_seen = counts.at("num_seen").get<std::size_t>();
    report.num_unseen = counts.at("num_unseen").get<std::size_t>();
    report.num_unknown = counts.value("num_unknown_excluded", std::size_t{0});
    report.youden = PointFromJson(j.at("youden"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report JSON: ") + e.what());
  }
  return report;
}

std::string RocToCsv(const std::vector<RocPoint>& roc) {
  std::string out = "fpr,tpr,threshold\n";
  char buf[128];
  for (const auto& p : roc) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.fpr, p.tpr, p.threshold);
    out += buf;
  }
  return out;
}

void EmitReport(const EvalReport& report, const std::filesystem::path& dir) {
  ValidateReport(report);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw StorageError("cannot create " + dir.string() + ": " + ec.message());
  internal::WriteFileBytes(dir / "report.json", ReportToJson(report));
  internal::WriteFileBytes(dir / "roc.csv", RocToCsv(report.roc));
}

}  // namespace mia
